//! Leave-one-instance-out cross-validation of the raw/log forest pair.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use trajela::forest::{ForestParams, RowMeta, TargetTransform};
use trajela::selector::optimize_threshold;
use trajela::stats::median;
use trajela::{rng, Forest, Prediction, TrainingData};

use crate::config::{ExperimentConfig, TauPolicy};
use crate::error::{HarnessError, Result};
use crate::io::{self, fmt_f64, parse_f64, parse_u32, read_csv, CsvSink};
use crate::streams;

/// Fold `k` tests on instance `test_iid` of every function and trains on
/// all other instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub test_iid: u32,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn leave_one_instance_out(meta: &[RowMeta], iids: &[u32]) -> Vec<Fold> {
    iids.iter()
        .map(|&k| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..meta.len()).partition(|&i| meta[i].iid == k);
            Fold { test_iid: k, train, test }
        })
        .collect()
}

/// Fails if a training row shares an instance with the test instance or if a
/// test row also appears among the training rows.
pub fn audit_fold(meta: &[RowMeta], fold: &Fold) -> Result<()> {
    let test: BTreeSet<RowMeta> = fold.test.iter().map(|&i| meta[i]).collect();
    for &i in &fold.train {
        if meta[i].iid == fold.test_iid || test.contains(&meta[i]) {
            return Err(HarnessError::Leakage(format!(
                "training row {:?} belongs to test instance {}",
                meta[i], fold.test_iid
            )));
        }
    }
    if fold.test.iter().any(|&i| meta[i].iid != fold.test_iid) {
        return Err(HarnessError::Leakage(format!("fold {} tests on a foreign instance", fold.test_iid)));
    }
    Ok(())
}

/// The selector threshold: one pooled value, or one per test instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Tau {
    Pooled(f64),
    Nested(BTreeMap<u32, f64>),
}

impl Tau {
    pub fn for_iid(&self, iid: u32) -> f64 {
        match self {
            Tau::Pooled(t) => *t,
            Tau::Nested(m) => m[&iid],
        }
    }

    /// Report cell: the value, or `iid:value` pairs joined by spaces.
    pub fn display(&self) -> String {
        match self {
            Tau::Pooled(t) => fmt_f64(*t),
            Tau::Nested(m) => m
                .iter()
                .map(|(k, v)| format!("{k}:{}", fmt_f64(*v)))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

/// JSON form of [`Tau`]; numbers are strings so that `inf` survives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauRecord {
    Pooled(String),
    Nested(BTreeMap<String, String>),
}

impl From<&Tau> for TauRecord {
    fn from(t: &Tau) -> Self {
        match t {
            Tau::Pooled(v) => TauRecord::Pooled(fmt_f64(*v)),
            Tau::Nested(m) => TauRecord::Nested(m.iter().map(|(k, v)| (k.to_string(), fmt_f64(*v))).collect()),
        }
    }
}

impl TauRecord {
    pub fn to_tau(&self, path: &Path) -> Result<Tau> {
        Ok(match self {
            TauRecord::Pooled(s) => Tau::Pooled(parse_f64(s, path)?),
            TauRecord::Nested(m) => Tau::Nested(
                m.iter()
                    .map(|(k, v)| Ok((parse_u32(k, path)?, parse_f64(v, path)?)))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioOutcome {
    pub name: String,
    pub features: Vec<String>,
    /// Pooled out-of-sample predictions in table row order, with the
    /// combined prediction filled in.
    pub records: Vec<Prediction>,
    pub tau: Tau,
    pub folds: Vec<FoldSize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldSize {
    pub test_iid: u32,
    pub n_train: usize,
    pub n_test: usize,
}

/// Stable 64-bit tag of a portfolio name for seeding.
fn name_tag(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Median over `model_repeats` independent fits of the raw and the log model;
/// returns `(unscaled, log10)` predictions for `test`.
fn fit_predict(
    cfg: &ExperimentConfig,
    train: &TrainingData,
    test: &TrainingData,
    seed: u64,
    save: Option<(&Path, String)>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let params = ForestParams {
        log_floor: cfg.log_floor,
        ..ForestParams::with_trees(cfg.n_trees)
    };
    let mut per_rep: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(cfg.model_repeats);
    for rep in 0..cfg.model_repeats {
        let raw = Forest::fit(train, TargetTransform::Raw, rng::derive_seed(seed, &[rep as u64, 0]), &params)?;
        let log = Forest::fit(train, TargetTransform::Log10, rng::derive_seed(seed, &[rep as u64, 1]), &params)?;
        if let Some((dir, stem)) = &save {
            raw.save(&dir.join(format!("{stem}_rep{rep}_raw.json")))?;
            log.save(&dir.join(format!("{stem}_rep{rep}_log10.json")))?;
        }
        per_rep.push((raw.predict_set(test)?, log.predict_set(test)?));
    }
    let med = |pick: fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<f64> {
        (0..test.len())
            .map(|i| {
                let v: Vec<f64> = per_rep.iter().map(|r| pick(r)[i]).collect();
                median(&v).expect("at least one repeat")
            })
            .collect()
    };
    Ok((med(|r| &r.0), med(|r| &r.1)))
}

fn records_for(data: &TrainingData, rows: &[usize], u: &[f64], l: &[f64]) -> Vec<Prediction> {
    rows.iter()
        .zip(u.iter().zip(l))
        .map(|(&i, (&pu, &pl))| Prediction::new(data.row_meta()[i], data.targets()[i], pu, pl))
        .collect()
}

/// Threshold optimized on inner leave-one-instance-out predictions of the
/// training instances of one outer fold.
fn nested_tau(cfg: &ExperimentConfig, train: &TrainingData, seed: u64) -> Result<f64> {
    let mut iids: Vec<u32> = train.row_meta().iter().map(|m| m.iid).collect();
    iids.sort_unstable();
    iids.dedup();
    let mut inner = Vec::new();
    for fold in leave_one_instance_out(train.row_meta(), &iids) {
        audit_fold(train.row_meta(), &fold)?;
        let (tr, te) = (train.select_rows(&fold.train), train.select_rows(&fold.test));
        let (u, l) = fit_predict(cfg, &tr, &te, rng::derive_seed(seed, &[fold.test_iid as u64]), None)?;
        inner.extend(records_for(train, &fold.test, &u, &l));
    }
    Ok(optimize_threshold(&inner)?)
}

/// Trains and tests both models on every leave-one-instance-out fold of
/// `data` restricted to `features`, then fits the threshold.
pub fn evaluate_portfolio(
    cfg: &ExperimentConfig,
    data: &TrainingData,
    name: &str,
    features: &[String],
    save_models: Option<&Path>,
) -> Result<PortfolioOutcome> {
    if features.is_empty() {
        return Err(HarnessError::Config(format!("portfolio {name} has no features")));
    }
    let sub = data.select_features(features)?;
    let folds = leave_one_instance_out(sub.row_meta(), &cfg.iids);
    for f in &folds {
        audit_fold(sub.row_meta(), f)?;
        if f.train.len() < 2 || f.test.is_empty() {
            return Err(HarnessError::Config(format!(
                "fold {} has {} training and {} test rows",
                f.test_iid,
                f.train.len(),
                f.test.len()
            )));
        }
    }
    if let Some(dir) = save_models {
        io::ensure_dir(dir)?;
    }
    log::info!("portfolio {name}: {} features, {} folds", features.len(), folds.len());

    let tag = name_tag(name);
    let per_fold = folds
        .par_iter()
        .map(|f| {
            let seed = rng::derive_seed(cfg.seed, &[streams::FOREST, tag, f.test_iid as u64]);
            let train = sub.select_rows(&f.train);
            let test = sub.select_rows(&f.test);
            let save = save_models.map(|d| (d, format!("fold{}", f.test_iid)));
            let (u, l) = fit_predict(cfg, &train, &test, seed, save)?;
            let tau = match cfg.tau_policy {
                TauPolicy::Pooled => None,
                TauPolicy::Nested => Some(nested_tau(cfg, &train, rng::derive_seed(seed, &[u64::MAX]))?),
            };
            Ok((records_for(&sub, &f.test, &u, &l), tau))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut slots: Vec<Option<Prediction>> = vec![None; sub.len()];
    let mut nested = BTreeMap::new();
    for (f, (recs, tau)) in folds.iter().zip(per_fold) {
        for (&i, r) in f.test.iter().zip(recs) {
            slots[i] = Some(r);
        }
        if let Some(t) = tau {
            nested.insert(f.test_iid, t);
        }
    }
    let records: Vec<Prediction> = slots.into_iter().flatten().collect();
    if records.len() != sub.len() {
        return Err(HarnessError::Config(format!(
            "{} of {} rows belong to no fold; check the configured iids",
            sub.len() - records.len(),
            sub.len()
        )));
    }
    let tau = match cfg.tau_policy {
        TauPolicy::Pooled => Tau::Pooled(optimize_threshold(&records)?),
        TauPolicy::Nested => Tau::Nested(nested),
    };
    let records = records.into_iter().map(|r| r.with_tau(tau.for_iid(r.iid))).collect();
    Ok(PortfolioOutcome {
        name: name.to_string(),
        features: features.to_vec(),
        records,
        tau,
        folds: folds
            .iter()
            .map(|f| FoldSize {
                test_iid: f.test_iid,
                n_train: f.train.len(),
                n_test: f.test.len(),
            })
            .collect(),
    })
}

const PREDICTION_HEADER: [&str; 6] = ["fid", "iid", "run", "true_precision", "pred_unscaled", "pred_log10"];

pub fn write_predictions(path: &Path, records: &[Prediction]) -> Result<()> {
    let mut w = CsvSink::create(path, &PREDICTION_HEADER)?;
    for r in records {
        w.row([
            r.fid.to_string(),
            r.iid.to_string(),
            r.run.to_string(),
            fmt_f64(r.true_precision),
            fmt_f64(r.pred_unscaled),
            fmt_f64(r.pred_log10),
        ])?;
    }
    w.finish()
}

/// Reads a predictions file; combined predictions are filled in from `tau`.
pub fn read_predictions(path: &Path, tau: &Tau) -> Result<Vec<Prediction>> {
    read_csv(path, &PREDICTION_HEADER)?
        .iter()
        .map(|rec| {
            let meta = RowMeta {
                fid: parse_u32(&rec[0], path)?,
                iid: parse_u32(&rec[1], path)?,
                run: parse_u32(&rec[2], path)?,
            };
            let p = Prediction::new(
                meta,
                parse_f64(&rec[3], path)?,
                parse_f64(&rec[4], path)?,
                parse_f64(&rec[5], path)?,
            );
            Ok(p.with_tau(tau.for_iid(meta.iid)))
        })
        .collect()
}

const FOLD_HEADER: [&str; 4] = ["portfolio", "test_iid", "n_train", "n_test"];

pub fn write_folds(path: &Path, outcomes: &[&PortfolioOutcome]) -> Result<()> {
    let mut w = CsvSink::create(path, &FOLD_HEADER)?;
    for o in outcomes {
        for f in &o.folds {
            w.row([
                o.name.clone(),
                f.test_iid.to_string(),
                f.n_train.to_string(),
                f.n_test.to_string(),
            ])?;
        }
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(runs: u32) -> Vec<RowMeta> {
        let mut v = Vec::new();
        for fid in 1..=24 {
            for iid in 1..=5 {
                for run in 0..runs {
                    v.push(RowMeta { fid, iid, run });
                }
            }
        }
        v
    }

    #[test]
    fn fold_sizes() {
        for (runs, train, test) in [(1, 96, 24), (20, 1920, 480)] {
            let meta = grid(runs);
            let folds = leave_one_instance_out(&meta, &[1, 2, 3, 4, 5]);
            assert_eq!(folds.len(), 5);
            for f in &folds {
                assert_eq!((f.train.len(), f.test.len()), (train, test));
                audit_fold(&meta, f).unwrap();
            }
        }
    }

    #[test]
    fn audit_catches_leaks() {
        let meta = grid(1);
        let mut f = leave_one_instance_out(&meta, &[1, 2, 3, 4, 5]).remove(2);
        f.train.push(f.test[0]);
        assert!(matches!(audit_fold(&meta, &f), Err(HarnessError::Leakage(_))));
    }

    #[test]
    fn tau_json_keeps_infinity() {
        let t = Tau::Pooled(f64::INFINITY);
        let json = serde_json::to_string(&TauRecord::from(&t)).unwrap();
        assert_eq!(json, "\"inf\"");
        let back: TauRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_tau(Path::new("x")).unwrap(), t);
        let n = Tau::Nested([(1, 0.5), (2, 0.0)].into_iter().collect());
        let back: TauRecord = serde_json::from_str(&serde_json::to_string(&TauRecord::from(&n)).unwrap()).unwrap();
        assert_eq!(back.to_tau(Path::new("x")).unwrap(), n);
        assert_eq!(n.display(), "1:0.5 2:0");
    }
}
