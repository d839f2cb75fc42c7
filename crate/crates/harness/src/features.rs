//! Trajectory and global-sample feature rows, and the wide experiment table
//! the portfolios select columns from.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use trajela::ela::{compute_all, Provenance, SampleSet, ELA_FEATURE_NAMES};
use trajela::forest::RowMeta;
use trajela::state::STATE_FEATURE_NAMES;
use trajela::stats::median;
use trajela::{rng, Instance, TrainingData};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::io::{fmt_f64, parse_f64, parse_u32, read_csv, CsvSink};
use crate::portfolio::{ela_columns, global_columns, sv_columns};
use crate::runs::{instances, RunRecord};
use crate::streams;

/// One row of a feature file. Global rows carry no run, state variables or
/// target.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub fid: u32,
    pub iid: u32,
    pub run: Option<u32>,
    pub source: Provenance,
    pub ela: Vec<f64>,
    pub sv: Option<[f64; 5]>,
    pub target: Option<f64>,
}

/// Features of the first `trajectory_prefix` points of each listed run.
pub fn trajectory_features(cfg: &ExperimentConfig, runs: &[&RunRecord]) -> Result<Vec<FeatureRow>> {
    log::info!("trajectory features for {} runs", runs.len());
    runs.par_iter()
        .map(|r| {
            let (x, y) = r.trajectory.prefix(cfg.trajectory_prefix);
            let fv = compute_all(&SampleSet::from_rows(&x, y)?)?;
            Ok(FeatureRow {
                fid: r.meta.fid,
                iid: r.meta.iid,
                run: Some(r.meta.run),
                source: Provenance::Trajectory,
                ela: fv.values,
                sv: Some(r.snapshot),
                target: Some(r.precision),
            })
        })
        .collect()
}

/// Elementwise median over repeated feature computations.
pub fn elementwise_median(reps: &[Vec<f64>]) -> Vec<f64> {
    let p = reps.first().map_or(0, Vec::len);
    (0..p)
        .map(|j| {
            let col: Vec<f64> = reps.iter().map(|r| r[j]).collect();
            median(&col).expect("at least one repetition")
        })
        .collect()
}

/// Features of one uniform sample of `size` points in the search box.
pub fn global_sample_features(inst: &Instance, size: usize, seed: u64) -> Result<Vec<f64>> {
    let domain = inst.domain();
    let mut r = rng::stream(seed);
    let x: Vec<Vec<f64>> = (0..size).map(|_| domain.sample(&mut r)).collect();
    let y = x.iter().map(|p| inst.evaluate(p)).collect::<trajela::Result<Vec<f64>>>()?;
    Ok(compute_all(&SampleSet::from_rows(&x, y)?)?.values)
}

pub fn global_seed(master: u64, fid: u32, iid: u32, size: usize, rep: usize) -> u64 {
    rng::derive_seed(
        master,
        &[streams::GLOBAL, fid as u64, iid as u64, size as u64, rep as u64],
    )
}

/// Per instance and sample size: the elementwise median of
/// `global_repetitions` independent computations. Ordered by
/// `(fid, iid, size)`.
pub fn global_features(cfg: &ExperimentConfig, sizes: &[usize]) -> Result<Vec<FeatureRow>> {
    let insts = instances(cfg)?;
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    let tasks: Vec<(&Instance, usize)> = insts
        .iter()
        .flat_map(|inst| sizes.iter().map(move |&s| (inst, s)))
        .collect();
    log::info!(
        "global features: {} instance/size pairs x {} repetitions",
        tasks.len(),
        cfg.global_repetitions
    );
    tasks
        .into_par_iter()
        .map(|(inst, size)| {
            let (fid, iid) = (inst.fid().get(), inst.iid());
            let reps = (0..cfg.global_repetitions)
                .map(|k| global_sample_features(inst, size, global_seed(cfg.seed, fid, iid, size, k)))
                .collect::<Result<Vec<_>>>()?;
            Ok(FeatureRow {
                fid,
                iid,
                run: None,
                source: Provenance::global(size).expect("validated size"),
                ela: elementwise_median(&reps),
                sv: None,
                target: None,
            })
        })
        .collect()
}

fn feature_header() -> Vec<&'static str> {
    let mut h = vec!["fid", "iid", "run", "source"];
    h.extend(ELA_FEATURE_NAMES);
    h.extend(STATE_FEATURE_NAMES);
    h.push("target_precision");
    h
}

pub fn write_features(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut w = CsvSink::create(path, &feature_header())?;
    for r in rows {
        let mut row = vec![
            r.fid.to_string(),
            r.iid.to_string(),
            r.run.map(|v| v.to_string()).unwrap_or_default(),
            r.source.as_str().to_string(),
        ];
        row.extend(r.ela.iter().map(|&v| fmt_f64(v)));
        match &r.sv {
            Some(sv) => row.extend(sv.iter().map(|&v| fmt_f64(v))),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        row.push(r.target.map(fmt_f64).unwrap_or_default());
        w.row(&row)?;
    }
    w.finish()
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let opt_f64 = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            parse_f64(s, path).map(Some)
        }
    };
    read_csv(path, &feature_header())?
        .iter()
        .map(|rec| {
            let ela = (0..38).map(|j| parse_f64(&rec[4 + j], path)).collect::<Result<Vec<_>>>()?;
            let sv_vals = (0..5).map(|j| opt_f64(&rec[42 + j])).collect::<Result<Vec<_>>>()?;
            let sv = if sv_vals.iter().all(Option::is_some) {
                let mut a = [0.0; 5];
                for (d, s) in a.iter_mut().zip(&sv_vals) {
                    *d = s.expect("checked");
                }
                Some(a)
            } else if sv_vals.iter().all(Option::is_none) {
                None
            } else {
                return Err(HarnessError::parse(path, "partially filled state variables"));
            };
            Ok(FeatureRow {
                fid: parse_u32(&rec[0], path)?,
                iid: parse_u32(&rec[1], path)?,
                run: if rec[2].is_empty() { None } else { Some(parse_u32(&rec[2], path)?) },
                source: rec[3].parse()?,
                ela,
                sv,
                target: opt_f64(&rec[47])?,
            })
        })
        .collect()
}

/// One row per trajectory feature row, with columns: trajectory ELA, state
/// variables, then one prefixed ELA block per global sample size present.
/// Global features are joined on `(fid, iid)`.
pub fn build_table(traj: &[FeatureRow], global: &[FeatureRow]) -> Result<TrainingData> {
    let mut by_size: BTreeMap<usize, BTreeMap<(u32, u32), &[f64]>> = BTreeMap::new();
    for g in global {
        let size = match g.source {
            Provenance::Global250 => 250,
            Provenance::Global2000 => 2000,
            Provenance::Trajectory => {
                return Err(HarnessError::Config("trajectory row among global features".into()));
            }
        };
        by_size.entry(size).or_default().insert((g.fid, g.iid), &g.ela);
    }
    let mut names = ela_columns();
    names.extend(sv_columns());
    for &size in by_size.keys() {
        names.extend(global_columns(size));
    }

    let p = names.len();
    let mut data = Vec::with_capacity(traj.len() * p);
    let mut targets = Vec::with_capacity(traj.len());
    let mut meta = Vec::with_capacity(traj.len());
    for r in traj {
        let (Some(run), Some(sv), Some(t)) = (r.run, r.sv, r.target) else {
            return Err(HarnessError::Config(format!(
                "trajectory row ({}, {}) lacks run, state variables or target",
                r.fid, r.iid
            )));
        };
        data.extend_from_slice(&r.ela);
        data.extend_from_slice(&sv);
        for (size, rows) in &by_size {
            let g = rows.get(&(r.fid, r.iid)).ok_or_else(|| {
                HarnessError::Config(format!("no global{size} features for ({}, {})", r.fid, r.iid))
            })?;
            data.extend_from_slice(g);
        }
        targets.push(t);
        meta.push(RowMeta {
            fid: r.fid,
            iid: r.iid,
            run,
        });
    }
    let x = Array2::from_shape_vec((traj.len(), p), data).expect("row widths checked");
    Ok(TrainingData::new(names, x, targets, meta)?)
}
