//! Exploratory landscape analysis features computed from already evaluated
//! points: y-distribution, meta-model, dispersion, nearest-better clustering
//! and information content (38 values in total).
//!
//! Degenerate inputs never produce NaN. They are encoded as 0 for
//! correlations and entropies and 1 for ratios (unless a feature states
//! otherwise), and the feature name is recorded in
//! [`FeatureVector::degenerate`].

mod dispersion;
mod distr;
mod ic;
mod meta;
mod nbc;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use dispersion::{dispersion, DispersionFeatures, DISPERSION_QUANTILES};
pub use distr::{ela_distr, number_of_peaks, silverman_bandwidth, DistrFeatures};
pub use ic::{
    entropy, epsilon_grid, information_content, nearest_neighbor_tour, partial_information,
    symbols, tour_slopes, IcFeatures,
};
pub use meta::{ela_meta, MetaFeatures};
pub use nbc::{nearest_better, NbcFeatures};

use crate::{Error, Result, Scalar};

pub const ELA_FEATURE_NAMES: [&str; 38] = [
    "ela_distr.skewness",
    "ela_distr.kurtosis",
    "ela_distr.number_of_peaks",
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.intercept",
    "ela_meta.lin_simple.coef.min",
    "ela_meta.lin_simple.coef.max",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.lin_w_interact.adj_r2",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
    "ela_meta.quad_w_interact.adj_r2",
    "disp.ratio_mean_02",
    "disp.ratio_mean_05",
    "disp.ratio_mean_10",
    "disp.ratio_mean_25",
    "disp.ratio_median_02",
    "disp.ratio_median_05",
    "disp.ratio_median_10",
    "disp.ratio_median_25",
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "disp.diff_mean_10",
    "disp.diff_mean_25",
    "disp.diff_median_02",
    "disp.diff_median_05",
    "disp.diff_median_10",
    "disp.diff_median_25",
    "nbc.nn_nb.sd_ratio",
    "nbc.nn_nb.mean_ratio",
    "nbc.nn_nb.cor",
    "nbc.dist_ratio.coeff_var",
    "nbc.nb_fitness.cor",
    "ic.h.max",
    "ic.eps.s",
    "ic.eps.max",
    "ic.eps.ratio",
    "ic.m0",
];

/// Minimum sample size accepted by [`compute_all`].
pub const MIN_SAMPLES: usize = 30;

/// Evaluated points `X` (n × d) and their fitness values `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    x: Array2<T>,
    y: Vec<T>,
}

impl<T: Scalar> SampleSet<T> {
    pub fn new(x: Array2<T>, y: Vec<T>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::InvalidSample(format!(
                "{} points but {} fitness values",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() < 2 || x.ncols() < 1 {
            return Err(Error::InvalidSample(format!(
                "need at least 2 points in at least 1 dimension, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample("non-finite entry".into()));
        }
        Ok(Self { x, y })
    }

    pub fn from_rows(rows: &[Vec<T>], y: Vec<T>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidSample("ragged point rows".into()));
        }
        let flat: Vec<T> = rows.iter().flatten().copied().collect();
        let x = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::InvalidSample(e.to_string()))?;
        Self::new(x, y)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<T> {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    /// Order that sorts by fitness, ties broken by original index.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.y[a]
                .partial_cmp(&self.y[b])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        let x = self.x.select(ndarray::Axis(0), rows);
        let y = rows.iter().map(|&i| self.y[i]).collect();
        Self { x, y }
    }

    /// The same sample reordered by `(y, index)`.
    pub fn canonicalized(&self) -> Self {
        self.select(&self.canonical_order())
    }

    #[cfg(test)]
    fn distance(&self, i: usize, j: usize) -> T {
        self.x
            .row(i)
            .iter()
            .zip(self.x.row(j).iter())
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }
}

/// Pairwise Euclidean distances, kept both as a full row-major matrix (for
/// row scans) and in condensed upper-triangle order.
#[derive(Debug, Clone)]
pub struct Distances<T> {
    n: usize,
    full: Vec<T>,
    data: Vec<T>,
}

impl<T: Scalar> Distances<T> {
    pub fn new(s: &SampleSet<T>) -> Self {
        let n = s.len();
        let d = s.dim();
        let x = s.x.as_standard_layout();
        let x = x.as_slice().expect("standard layout");
        let mut full = vec![T::zero(); n * n];
        for (i, row) in full.chunks_exact_mut(n).enumerate() {
            let xi = &x[i * d..(i + 1) * d];
            for (j, out) in row.iter_mut().enumerate() {
                let xj = &x[j * d..(j + 1) * d];
                *out = xi
                    .iter()
                    .zip(xj)
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .fold(T::zero(), |acc, v| acc + v)
                    .sqrt();
            }
        }
        let mut data = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 0..n {
            data.extend_from_slice(&full[i * n + i + 1..(i + 1) * n]);
        }
        Self { n, full, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.full[i * self.n + j]
    }

    /// Distances from point `i` to every point (0 at `i` itself).
    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.full[i * self.n..(i + 1) * self.n]
    }

    pub fn all(&self) -> &[T] {
        &self.data
    }

    /// Pairwise distances among `rows`.
    pub fn subset(&self, rows: &[usize]) -> Vec<T> {
        let mut out = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
        for (k, &i) in rows.iter().enumerate() {
            for &j in &rows[k + 1..] {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

/// Where the evaluated points came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Trajectory,
    Global250,
    Global2000,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Trajectory => "trajectory",
            Provenance::Global250 => "global250",
            Provenance::Global2000 => "global2000",
        }
    }

    pub fn global(size: usize) -> Option<Self> {
        match size {
            250 => Some(Provenance::Global250),
            2000 => Some(Provenance::Global2000),
            _ => None,
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trajectory" => Ok(Provenance::Trajectory),
            "global250" => Ok(Provenance::Global250),
            "global2000" => Ok(Provenance::Global2000),
            other => Err(Error::Schema(format!("unknown provenance '{other}'"))),
        }
    }
}

/// The 38 ELA values in [`ELA_FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub degenerate: BTreeSet<String>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn names() -> &'static [&'static str; 38] {
        &ELA_FEATURE_NAMES
    }

    pub fn get(&self, name: &str) -> Option<T> {
        ELA_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }

    pub fn is_degenerate(&self, name: &str) -> bool {
        self.degenerate.contains(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, T)> + '_ {
        ELA_FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }
}

/// Accumulates named values and degeneracy flags from the feature sets.
#[derive(Default)]
pub(crate) struct Collector<T> {
    pub names: Vec<&'static str>,
    pub values: Vec<T>,
    pub degenerate: BTreeSet<String>,
}

impl<T: Scalar> Collector<T> {
    pub fn push(&mut self, name: &'static str, value: T, degenerate: bool) {
        self.names.push(name);
        self.values.push(value);
        if degenerate {
            self.degenerate.insert(name.to_string());
        }
    }
}

/// A group of named features produced by one feature set.
pub trait FeatureSet<T> {
    fn write_into(&self, out: &mut Vec<(&'static str, T, bool)>);
}

/// All 38 features on the canonically ordered sample.
pub fn compute_all<T: Scalar>(s: &SampleSet<T>) -> Result<FeatureVector<T>> {
    if s.len() < MIN_SAMPLES {
        return Err(Error::InvalidSample(format!(
            "need at least {MIN_SAMPLES} points, got {}",
            s.len()
        )));
    }
    let s = s.canonicalized();
    let dist = Distances::new(&s);
    let mut entries = Vec::with_capacity(38);
    distr::ela_distr(&s).write_into(&mut entries);
    meta::ela_meta(&s)?.write_into(&mut entries);
    dispersion::dispersion_with(&s, &dist).write_into(&mut entries);
    nbc::nearest_better_with(&s, &dist).write_into(&mut entries);
    ic::information_content_with(&s, &dist).write_into(&mut entries);

    let mut c = Collector::default();
    for (name, value, flag) in entries {
        c.push(name, value, flag);
    }
    debug_assert_eq!(c.names, ELA_FEATURE_NAMES);
    if let Some((n, v)) = c.names.iter().zip(&c.values).find(|(_, v)| !v.is_finite()) {
        return Err(Error::NumericalBreakdown(format!("feature {n} evaluated to {v}")));
    }
    Ok(FeatureVector {
        values: c.values,
        degenerate: c.degenerate,
    })
}
