//! CMA-ES runs over the problem grid and the median-run selection.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use trajela::bbob::make_instance;
use trajela::cmaes::{self, CmaOptions, TrajectoryEntry};
use trajela::forest::RowMeta;
use trajela::state::STATE_FEATURE_NAMES;
use trajela::{rng, Instance, Trajectory};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::io::{fmt_f64, parse_f64, parse_u32, read_csv, CsvSink};
use crate::streams;

/// One finished run: its trajectory, the state snapshot and the precision
/// reached at the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub meta: RowMeta,
    pub precision: f64,
    pub evals_at_snapshot: usize,
    pub snapshot: [f64; 5],
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecord {
    pub meta: RowMeta,
    pub target_precision: f64,
}

impl RunRecord {
    pub fn precision_record(&self) -> PrecisionRecord {
        PrecisionRecord {
            meta: self.meta,
            target_precision: self.precision,
        }
    }
}

pub fn instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    let mut out = Vec::with_capacity(cfg.fids.len() * cfg.iids.len());
    for &fid in &cfg.fids {
        for &iid in &cfg.iids {
            out.push(make_instance(fid, iid, cfg.dim)?);
        }
    }
    Ok(out)
}

pub fn run_seed(master: u64, meta: RowMeta) -> u64 {
    rng::derive_seed(master, &[streams::RUN, meta.fid as u64, meta.iid as u64, meta.run as u64])
}

/// All `fids × iids × runs` runs, in that order.
pub fn run_trajectories(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let insts = instances(cfg)?;
    let tasks: Vec<(&Instance, u32)> = insts
        .iter()
        .flat_map(|inst| (0..cfg.runs_per_instance).map(move |r| (inst, r)))
        .collect();
    log::info!("running {} CMA-ES runs", tasks.len());
    let options = CmaOptions::default();
    tasks
        .into_par_iter()
        .map(|(inst, run)| {
            let meta = RowMeta {
                fid: inst.fid().get(),
                iid: inst.iid(),
                run,
            };
            let out = cmaes::run(inst, cfg.budget, run_seed(cfg.seed, meta), cfg.snapshot_at, &options)?;
            Ok(RunRecord {
                meta,
                precision: out.trajectory.precision_at_budget,
                evals_at_snapshot: out.snapshot.evals_at_snapshot,
                snapshot: out.snapshot.values(),
                trajectory: out.trajectory,
            })
        })
        .collect()
}

/// Per `(fid, iid)`, the run holding the lower median precision (the
/// `⌈n/2⌉`-th smallest); among runs sharing that value the lowest run index.
/// Output is ordered by `(fid, iid)`.
pub fn select_median_runs(records: &[PrecisionRecord]) -> Vec<PrecisionRecord> {
    let mut groups: BTreeMap<(u32, u32), Vec<PrecisionRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.meta.fid, r.meta.iid)).or_default().push(*r);
    }
    groups
        .into_values()
        .map(|mut g| {
            g.sort_by(|a, b| a.target_precision.total_cmp(&b.target_precision).then(a.meta.run.cmp(&b.meta.run)));
            let median = g[(g.len() - 1) / 2].target_precision;
            *g.iter()
                .filter(|r| r.target_precision == median)
                .min_by_key(|r| r.meta.run)
                .expect("median is attained")
        })
        .collect()
}

fn trajectory_header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["fid", "iid", "run", "eval"].iter().map(|s| s.to_string()).collect();
    h.extend((1..=dim).map(|i| format!("x{i}")));
    h.push("y".into());
    h.push("best_so_far".into());
    h
}

const PRECISION_HEADER: [&str; 4] = ["fid", "iid", "run", "target_precision"];

fn snapshot_header() -> Vec<&'static str> {
    let mut h = vec!["fid", "iid", "run", "evals_at_snapshot"];
    h.extend(STATE_FEATURE_NAMES);
    h
}

fn meta_fields(m: RowMeta) -> [String; 3] {
    [m.fid.to_string(), m.iid.to_string(), m.run.to_string()]
}

fn parse_meta(rec: &csv::StringRecord, path: &Path) -> Result<RowMeta> {
    Ok(RowMeta {
        fid: parse_u32(&rec[0], path)?,
        iid: parse_u32(&rec[1], path)?,
        run: parse_u32(&rec[2], path)?,
    })
}

pub fn write_trajectories(path: &Path, dim: usize, runs: &[RunRecord]) -> Result<()> {
    let mut w = CsvSink::create(path, &trajectory_header(dim))?;
    for r in runs {
        let m = meta_fields(r.meta);
        for (e, best) in r.trajectory.entries.iter().zip(&r.trajectory.best_so_far) {
            let mut row: Vec<String> = m.to_vec();
            row.push(e.eval.to_string());
            row.extend(e.x.iter().map(|&v| fmt_f64(v)));
            row.push(fmt_f64(e.y));
            row.push(fmt_f64(*best));
            w.row(&row)?;
        }
    }
    w.finish()
}

pub fn write_precisions(path: &Path, records: &[PrecisionRecord]) -> Result<()> {
    let mut w = CsvSink::create(path, &PRECISION_HEADER)?;
    for r in records {
        let mut row = meta_fields(r.meta).to_vec();
        row.push(fmt_f64(r.target_precision));
        w.row(&row)?;
    }
    w.finish()
}

pub fn read_precisions(path: &Path) -> Result<Vec<PrecisionRecord>> {
    read_csv(path, &PRECISION_HEADER)?
        .iter()
        .map(|rec| {
            Ok(PrecisionRecord {
                meta: parse_meta(rec, path)?,
                target_precision: parse_f64(&rec[3], path)?,
            })
        })
        .collect()
}

pub fn write_snapshots(path: &Path, runs: &[RunRecord]) -> Result<()> {
    let mut w = CsvSink::create(path, &snapshot_header())?;
    for r in runs {
        let mut row = meta_fields(r.meta).to_vec();
        row.push(r.evals_at_snapshot.to_string());
        row.extend(r.snapshot.iter().map(|&v| fmt_f64(v)));
        w.row(&row)?;
    }
    w.finish()
}

/// Reassembles runs from the three files written by `run-trajectories`.
pub fn read_runs(trajectories: &Path, snapshots: &Path, precisions: &Path, dim: usize) -> Result<Vec<RunRecord>> {
    let precision: BTreeMap<RowMeta, f64> = read_precisions(precisions)?
        .into_iter()
        .map(|p| (p.meta, p.target_precision))
        .collect();

    let mut traj: BTreeMap<RowMeta, Trajectory> = BTreeMap::new();
    for rec in read_csv(trajectories, &trajectory_header(dim))? {
        let meta = parse_meta(&rec, trajectories)?;
        let eval = parse_u32(&rec[3], trajectories)? as usize;
        let x = (0..dim)
            .map(|i| parse_f64(&rec[4 + i], trajectories))
            .collect::<Result<Vec<f64>>>()?;
        let y = parse_f64(&rec[4 + dim], trajectories)?;
        let best = parse_f64(&rec[5 + dim], trajectories)?;
        let t = traj.entry(meta).or_insert_with(|| Trajectory {
            entries: Vec::new(),
            best_so_far: Vec::new(),
            precision_at_budget: f64::NAN,
        });
        if eval != t.entries.len() + 1 {
            return Err(HarnessError::parse(trajectories, format!("{meta:?}: evaluation {eval} out of order")));
        }
        t.entries.push(TrajectoryEntry { eval, x, y });
        t.best_so_far.push(best);
    }

    let mut runs = Vec::with_capacity(traj.len());
    for rec in read_csv(snapshots, &snapshot_header())? {
        let meta = parse_meta(&rec, snapshots)?;
        let mut snapshot = [0.0; 5];
        for (k, s) in snapshot.iter_mut().enumerate() {
            *s = parse_f64(&rec[4 + k], snapshots)?;
        }
        let missing = |what: &str| HarnessError::parse(snapshots, format!("{meta:?} has no {what}"));
        let mut trajectory = traj.remove(&meta).ok_or_else(|| missing("trajectory"))?;
        let p = *precision.get(&meta).ok_or_else(|| missing("precision"))?;
        trajectory.precision_at_budget = p;
        runs.push(RunRecord {
            meta,
            precision: p,
            evals_at_snapshot: parse_u32(&rec[3], snapshots)? as usize,
            snapshot,
            trajectory,
        });
    }
    Ok(runs)
}
