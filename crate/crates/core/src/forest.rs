//! Random-forest regression built from CART trees.
//!
//! Trees use the variance criterion, consider every feature at each split
//! and grow until leaves are pure or hold fewer than `min_samples_split`
//! samples. Each tree draws from its own RNG stream derived from the forest
//! seed and the tree index, so fitting in parallel gives the same model as
//! fitting sequentially.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result, Scalar};

/// Version tag written into serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Clamp applied to zero precisions before taking log10.
pub const DEFAULT_LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetTransform {
    Raw,
    Log10,
}

impl TargetTransform {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetTransform::Raw => "raw",
            TargetTransform::Log10 => "log10",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub log_floor: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 1000,
            bootstrap: true,
            min_samples_split: 2,
            max_depth: None,
            log_floor: DEFAULT_LOG_FLOOR,
        }
    }
}

impl ForestParams {
    pub fn with_trees(n_trees: usize) -> Self {
        Self {
            n_trees,
            ..Self::default()
        }
    }
}

/// Identifies the run a training row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowMeta {
    pub fid: u32,
    pub iid: u32,
    pub run: u32,
}

/// Named feature matrix with non-negative targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet<T> {
    feature_names: Vec<String>,
    features: Array2<T>,
    targets: Vec<T>,
    row_meta: Vec<RowMeta>,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn new(
        feature_names: Vec<String>,
        features: Array2<T>,
        targets: Vec<T>,
        row_meta: Vec<RowMeta>,
    ) -> Result<Self> {
        let (m, p) = features.dim();
        if feature_names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: feature_names.len(),
            });
        }
        if targets.len() != m || row_meta.len() != m {
            return Err(Error::Schema(format!(
                "{m} feature rows, {} targets, {} row labels",
                targets.len(),
                row_meta.len()
            )));
        }
        if features.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::Schema("non-finite entry in training data".into()));
        }
        if targets.iter().any(|&t| t < T::zero()) {
            return Err(Error::Schema("negative target precision".into()));
        }
        Ok(Self {
            feature_names,
            features,
            targets,
            row_meta,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Array2<T> {
        &self.features
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn row_meta(&self) -> &[RowMeta] {
        &self.row_meta
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            features: self.features.select(ndarray::Axis(0), rows),
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
            row_meta: rows.iter().map(|&i| self.row_meta[i]).collect(),
        }
    }

    /// Keeps the named columns in the given order.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let cols = column_indices(&self.feature_names, names)?;
        Ok(Self {
            feature_names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            features: self.features.select(ndarray::Axis(1), &cols),
            targets: self.targets.clone(),
            row_meta: self.row_meta.clone(),
        })
    }

    pub fn column(&self, name: &str) -> Option<ArrayView1<'_, T>> {
        let j = self.feature_names.iter().position(|n| n == name)?;
        Some(self.features.column(j))
    }
}

fn column_indices<S: AsRef<str>>(have: &[String], want: &[S]) -> Result<Vec<usize>> {
    want.iter()
        .map(|n| {
            let n = n.as_ref();
            have.iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::Schema(format!("missing feature '{n}'")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node<T> {
    Leaf {
        value: T,
    },
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// A fitted regression tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T> {
    nodes: Vec<Node<T>>,
    /// Total variance reduction contributed by each feature.
    importance: Vec<f64>,
}

impl<T: Scalar> Tree<T> {
    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn go<T>(nodes: &[Node<T>], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn predict(&self, x: &[T]) -> T {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Fits one tree on the rows listed in `sample` (repeats allowed).
    pub fn fit(x: &Array2<T>, y: &[T], sample: Vec<usize>, params: &ForestParams) -> Self {
        let p = x.ncols();
        let mut tree = Tree {
            nodes: Vec::new(),
            importance: vec![0.0; p],
        };
        // (node slot, rows, depth)
        let mut stack = vec![(0usize, sample, 0usize)];
        tree.nodes.push(Node::Leaf { value: T::zero() });
        let mut pairs: Vec<(T, T)> = Vec::new();
        while let Some((slot, rows, depth)) = stack.pop() {
            let value = rows.iter().map(|&r| y[r]).sum::<T>() / T::from_usize_lossy(rows.len());
            let pure = rows.iter().all(|&r| y[r] == y[rows[0]]);
            let depth_ok = params.max_depth.is_none_or(|d| depth < d);
            if pure || rows.len() < params.min_samples_split.max(2) || !depth_ok {
                tree.nodes[slot] = Node::Leaf { value };
                continue;
            }
            let Some(split) = best_split(x, y, &rows, &mut pairs) else {
                tree.nodes[slot] = Node::Leaf { value };
                continue;
            };
            tree.importance[split.feature] += split.gain.max(0.0);
            let (lrows, rrows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&r| x[[r, split.feature]] <= split.threshold);
            let left = tree.nodes.len();
            tree.nodes.push(Node::Leaf { value: T::zero() });
            let right = tree.nodes.len();
            tree.nodes.push(Node::Leaf { value: T::zero() });
            tree.nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, rrows, depth + 1));
            stack.push((left, lrows, depth + 1));
        }
        tree
    }
}

struct Split<T> {
    feature: usize,
    threshold: T,
    gain: f64,
}

/// Variance-minimizing split over all features and all midpoints between
/// distinct consecutive values. Ties go to the first feature and the lowest
/// threshold. Sums are accumulated in f64.
fn best_split<T: Scalar>(x: &Array2<T>, y: &[T], rows: &[usize], pairs: &mut Vec<(T, T)>) -> Option<Split<T>> {
    let n = rows.len();
    let total: f64 = rows.iter().map(|&r| y[r].as_f64()).sum();
    let total_sq: f64 = rows.iter().map(|&r| y[r].as_f64().powi(2)).sum();
    let parent_sse = total_sq - total * total / n as f64;
    let mut best: Option<(f64, usize, T)> = None;
    for j in 0..x.ncols() {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (x[[r, j]], y[r])));
        pairs.sort_by(|a, b| crate::stats::total_cmp(&a.0, &b.0));
        if pairs[0].0 == pairs[n - 1].0 {
            continue;
        }
        let mut left_sum = 0.0;
        for k in 0..n - 1 {
            left_sum += pairs[k].1.as_f64();
            if pairs[k].0 == pairs[k + 1].0 {
                continue;
            }
            let nl = (k + 1) as f64;
            let nr = (n - k - 1) as f64;
            let right_sum = total - left_sum;
            // Maximizing this is equivalent to minimizing the children's SSE.
            let score = left_sum * left_sum / nl + right_sum * right_sum / nr;
            if best.is_none_or(|(s, _, _)| score > s) {
                let (a, b) = (pairs[k].0, pairs[k + 1].0);
                let mut t = (a + b) / T::lit(2.0);
                if !(t < b) {
                    t = a;
                }
                best = Some((score, j, t));
            }
        }
    }
    best.map(|(score, feature, threshold)| Split {
        feature,
        threshold,
        gain: parent_sse - (total_sq - score),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel<T> {
    version: u32,
    feature_names: Vec<String>,
    transform: TargetTransform,
    seed: u64,
    params: ForestParams,
    trees: Vec<Tree<T>>,
}

impl<T: Scalar> RandomForestModel<T> {
    /// Fits `params.n_trees` trees; with `Log10` the targets are
    /// `log10(max(t, log_floor))`.
    pub fn fit(data: &TrainingSet<T>, transform: TargetTransform, seed: u64, params: &ForestParams) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::EmptyData(format!("need at least 2 training rows, got {}", data.len())));
        }
        if data.n_features() == 0 {
            return Err(Error::EmptyData("no features".into()));
        }
        if params.n_trees == 0 {
            return Err(Error::InvalidArgument("forest needs at least one tree".into()));
        }
        let floor = T::lit(params.log_floor);
        let y: Vec<T> = match transform {
            TargetTransform::Raw => data.targets.clone(),
            TargetTransform::Log10 => data.targets.iter().map(|&t| t.max(floor).log10()).collect(),
        };
        let m = data.len();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|k| {
                let sample: Vec<usize> = if params.bootstrap {
                    let mut r = rng::derived_stream(seed, &[k as u64]);
                    (0..m).map(|_| r.random_range(0..m)).collect()
                } else {
                    (0..m).collect()
                };
                Tree::fit(&data.features, &y, sample, params)
            })
            .collect();
        Ok(Self {
            version: MODEL_FORMAT_VERSION,
            feature_names: data.feature_names.clone(),
            transform,
            seed,
            params: params.clone(),
            trees,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn transform(&self) -> TargetTransform {
        self.transform
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn trees(&self) -> &[Tree<T>] {
        &self.trees
    }

    /// Mean tree output for a row in training-column order. For a `Log10`
    /// model the result is the predicted log10 precision.
    pub fn predict(&self, x: &[T]) -> Result<T> {
        if x.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite feature value".into()));
        }
        let sum: T = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok(sum / T::from_usize_lossy(self.trees.len()))
    }

    /// Prediction from `(name, value)` pairs in any order; extra names are ignored.
    pub fn predict_named(&self, row: &[(&str, T)]) -> Result<T> {
        let x = self
            .feature_names
            .iter()
            .map(|n| {
                row.iter()
                    .find(|(k, _)| k == n)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| Error::Schema(format!("missing feature '{n}'")))
            })
            .collect::<Result<Vec<T>>>()?;
        self.predict(&x)
    }

    /// Predictions for every row of a data set with matching (or superset) columns.
    pub fn predict_set(&self, data: &TrainingSet<T>) -> Result<Vec<T>> {
        let cols = column_indices(&data.feature_names, &self.feature_names)?;
        (0..data.len())
            .map(|i| {
                let x: Vec<T> = cols.iter().map(|&j| data.features[[i, j]]).collect();
                self.predict(&x)
            })
            .collect()
    }

    /// Mean decrease in impurity, normalized per tree, averaged over trees
    /// and scaled to sum to 1. All zeros when no tree ever split.
    pub fn feature_importance(&self) -> Vec<(String, f64)> {
        let p = self.feature_names.len();
        let mut acc = vec![0.0; p];
        for t in &self.trees {
            let s: f64 = t.importance.iter().sum();
            if s > 0.0 {
                for (a, v) in acc.iter_mut().zip(&t.importance) {
                    *a += v / s;
                }
            }
        }
        let s: f64 = acc.iter().sum();
        if s > 0.0 {
            acc.iter_mut().for_each(|a| *a /= s);
        }
        self.feature_names.iter().cloned().zip(acc).collect()
    }

    pub fn to_writer<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Self> {
        let m: Self = serde_json::from_reader(r).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if m.version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {} (expected {MODEL_FORMAT_VERSION})",
                m.version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(f);
        self.to_writer(&mut w)?;
        w.flush().map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
        Self::from_reader(BufReader::new(f))
    }
}
