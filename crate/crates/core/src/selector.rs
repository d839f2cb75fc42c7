//! Threshold selector that switches between the unscaled and the log model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::forest::{RandomForestModel, RowMeta, TargetTransform};
use crate::{Error, Result, Scalar};

/// `10^pred_log10` when that is strictly below `tau`, otherwise `pred_unscaled`.
pub fn combined_predict<T: Scalar>(pred_unscaled: T, pred_log10: T, tau: T) -> T {
    let from_log = T::lit(10.0).powf(pred_log10);
    if from_log < tau {
        from_log
    } else {
        pred_unscaled
    }
}

/// Out-of-sample predictions for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord<T> {
    pub fid: u32,
    pub iid: u32,
    pub run: u32,
    pub true_precision: T,
    pub pred_unscaled: T,
    pub pred_log10: T,
    pub pred_combined: T,
}

impl<T: Scalar> PredictionRecord<T> {
    /// Record whose combined prediction starts out as the unscaled one (τ = 0).
    pub fn new(meta: RowMeta, true_precision: T, pred_unscaled: T, pred_log10: T) -> Self {
        Self {
            fid: meta.fid,
            iid: meta.iid,
            run: meta.run,
            true_precision,
            pred_unscaled,
            pred_log10,
            pred_combined: pred_unscaled,
        }
    }

    pub fn meta(&self) -> RowMeta {
        RowMeta {
            fid: self.fid,
            iid: self.iid,
            run: self.run,
        }
    }

    pub fn pred_from_log(&self) -> T {
        T::lit(10.0).powf(self.pred_log10)
    }

    pub fn with_tau(mut self, tau: T) -> Self {
        self.pred_combined = combined_predict(self.pred_unscaled, self.pred_log10, tau);
        self
    }
}

pub fn rmse<T: Scalar>(truths: &[T], preds: &[T]) -> Result<T> {
    if truths.len() != preds.len() {
        return Err(Error::DimensionMismatch {
            expected: truths.len(),
            got: preds.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::EmptyData("rmse of nothing".into()));
    }
    let ss: T = truths.iter().zip(preds).map(|(&t, &p)| (t - p) * (t - p)).sum();
    Ok((ss / T::from_usize_lossy(truths.len())).sqrt())
}

/// Which prediction of a record to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Combined,
    Unscaled,
    Log,
}

impl<T: Scalar> PredictionRecord<T> {
    pub fn prediction(&self, v: Variant) -> T {
        match v {
            Variant::Combined => self.pred_combined,
            Variant::Unscaled => self.pred_unscaled,
            Variant::Log => self.pred_from_log(),
        }
    }
}

pub fn records_rmse<T: Scalar>(records: &[PredictionRecord<T>], v: Variant) -> Result<T> {
    let t: Vec<T> = records.iter().map(|r| r.true_precision).collect();
    let p: Vec<T> = records.iter().map(|r| r.prediction(v)).collect();
    rmse(&t, &p)
}

/// Grid `{0, ∞} ∪ {10^pred_log10}` in ascending order.
pub fn threshold_grid<T: Scalar>(records: &[PredictionRecord<T>]) -> Vec<T> {
    let mut g: Vec<T> = records.iter().map(|r| r.pred_from_log()).collect();
    g.push(T::zero());
    g.push(T::infinity());
    g.sort_by(crate::stats::total_cmp);
    g.dedup();
    g
}

/// The grid τ with the lowest combined RMSE; ties go to the smallest τ.
pub fn optimize_threshold<T: Scalar>(records: &[PredictionRecord<T>]) -> Result<T> {
    if records.is_empty() {
        return Err(Error::EmptyData("no prediction records".into()));
    }
    let mut best = (T::infinity(), T::zero());
    for tau in threshold_grid(records) {
        let ss: T = records
            .iter()
            .map(|r| {
                let e = r.true_precision - combined_predict(r.pred_unscaled, r.pred_log10, tau);
                e * e
            })
            .sum();
        if ss < best.0 {
            best = (ss, tau);
        }
    }
    Ok(best.1)
}

/// Mean absolute error of the chosen prediction per function id.
pub fn abs_errors_by_function<T: Scalar>(records: &[PredictionRecord<T>], v: Variant) -> BTreeMap<u32, T> {
    let mut acc: BTreeMap<u32, (T, usize)> = BTreeMap::new();
    for r in records {
        let e = acc.entry(r.fid).or_insert((T::zero(), 0));
        e.0 = e.0 + (r.true_precision - r.prediction(v)).abs();
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(fid, (s, n))| (fid, s / T::from_usize_lossy(n)))
        .collect()
}

/// A pair of forests and the threshold that gates them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorModel<T> {
    pub tau: T,
    pub unscaled: RandomForestModel<T>,
    pub log: RandomForestModel<T>,
}

impl<T: Scalar> SelectorModel<T> {
    pub fn new(tau: T, unscaled: RandomForestModel<T>, log: RandomForestModel<T>) -> Result<Self> {
        if unscaled.transform() != TargetTransform::Raw || log.transform() != TargetTransform::Log10 {
            return Err(Error::InvalidArgument("selector needs a raw and a log10 model".into()));
        }
        if unscaled.feature_names() != log.feature_names() {
            return Err(Error::Schema("the two models use different features".into()));
        }
        if tau.is_nan() || tau < T::zero() {
            return Err(Error::InvalidArgument(format!("threshold must be >= 0, got {tau}")));
        }
        Ok(Self { tau, unscaled, log })
    }

    /// `(unscaled, log10, combined)` predictions for one feature row.
    pub fn predict(&self, x: &[T]) -> Result<(T, T, T)> {
        let u = self.unscaled.predict(x)?;
        let l = self.log.predict(x)?;
        Ok((u, l, combined_predict(u, l, self.tau)))
    }
}
