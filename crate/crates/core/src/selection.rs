//! Feature-portfolio selection: correlation filtering, recursive feature
//! elimination and the intersection of per-fold selections.

use ndarray::Array2;

use crate::forest::{ForestParams, RandomForestModel, TargetTransform, TrainingSet};
use crate::stats::pearson;
use crate::{rng, selector, Error, Result, Scalar};

/// Absolute Pearson correlation of every column pair; constant columns count as 0.
pub fn abs_correlations<T: Scalar>(x: &Array2<T>) -> Array2<f64> {
    let p = x.ncols();
    let cols: Vec<Vec<T>> = (0..p).map(|j| x.column(j).to_vec()).collect();
    let mut c = Array2::zeros((p, p));
    for i in 0..p {
        c[[i, i]] = 1.0;
        for j in (i + 1)..p {
            let r = pearson(&cols[i], &cols[j]).map_or(0.0, |r| r.as_f64().abs());
            c[[i, j]] = r;
            c[[j, i]] = r;
        }
    }
    c
}

/// Greedy correlation filter. Pairs are visited in feature-name order; from
/// the first pair whose |correlation| exceeds `threshold`, the feature with
/// the larger mean |correlation| to the other remaining features is dropped
/// (the later one on a tie). Survivors keep the input column order.
pub fn correlation_filter<T: Scalar>(names: &[String], x: &Array2<T>, threshold: f64) -> Result<Vec<String>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    if names.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: names.len(),
        });
    }
    let c = abs_correlations(x);
    let mut alive: Vec<usize> = (0..names.len()).collect();
    alive.sort_by(|&a, &b| names[a].cmp(&names[b]).then(a.cmp(&b)));

    let mean_cor = |k: usize, alive: &[usize]| -> f64 {
        let others: Vec<f64> = alive.iter().filter(|&&o| o != k).map(|&o| c[[k, o]]).collect();
        others.iter().sum::<f64>() / others.len().max(1) as f64
    };
    loop {
        let pair = alive.iter().enumerate().find_map(|(a, &i)| {
            alive[a + 1..]
                .iter()
                .find(|&&j| c[[i, j]] > threshold)
                .map(|&j| (i, j))
        });
        let Some((i, j)) = pair else { break };
        let drop = if mean_cor(i, &alive) > mean_cor(j, &alive) { i } else { j };
        alive.retain(|&k| k != drop);
    }
    alive.sort_unstable();
    Ok(alive.into_iter().map(|k| names[k].clone()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfeParams {
    pub forest: ForestParams,
    pub folds: usize,
    pub transform: TargetTransform,
    pub seed: u64,
}

impl Default for RfeParams {
    fn default() -> Self {
        Self {
            forest: ForestParams::with_trees(100),
            folds: 5,
            transform: TargetTransform::Log10,
            seed: 0,
        }
    }
}

/// Fold index per row: grouped by instance id when there are at least two
/// instances, otherwise by row position.
fn fold_labels<T: Scalar>(data: &TrainingSet<T>, folds: usize) -> Vec<usize> {
    let mut iids: Vec<u32> = data.row_meta().iter().map(|m| m.iid).collect();
    iids.sort_unstable();
    iids.dedup();
    if iids.len() >= 2 {
        let k = folds.min(iids.len());
        data.row_meta()
            .iter()
            .map(|m| iids.binary_search(&m.iid).expect("iid present") % k)
            .collect()
    } else {
        let k = folds.min(data.len());
        (0..data.len()).map(|i| i % k).collect()
    }
}

/// Out-of-fold RMSE of a forest on the given feature subset, measured in the
/// space of `params.transform`.
pub fn out_of_fold_rmse<T: Scalar>(data: &TrainingSet<T>, features: &[String], params: &RfeParams) -> Result<f64> {
    let sub = data.select_features(features)?;
    let labels = fold_labels(&sub, params.folds.max(2));
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let floor = T::lit(params.forest.log_floor);
    let mut truth = Vec::with_capacity(sub.len());
    let mut pred = Vec::with_capacity(sub.len());
    for fold in 0..k {
        let train: Vec<usize> = (0..sub.len()).filter(|&i| labels[i] != fold).collect();
        let test: Vec<usize> = (0..sub.len()).filter(|&i| labels[i] == fold).collect();
        if train.len() < 2 || test.is_empty() {
            continue;
        }
        let seed = rng::derive_seed(params.seed, &[features.len() as u64, fold as u64]);
        let model = RandomForestModel::fit(&sub.select_rows(&train), params.transform, seed, &params.forest)?;
        let test_set = sub.select_rows(&test);
        pred.extend(model.predict_set(&test_set)?.into_iter().map(|v| v.as_f64()));
        truth.extend(test_set.targets().iter().map(|&t| match params.transform {
            TargetTransform::Raw => t.as_f64(),
            TargetTransform::Log10 => t.max(floor).log10().as_f64(),
        }));
    }
    selector::rmse(&truth, &pred)
}

/// Recursive feature elimination. Each round scores the current set by
/// out-of-fold RMSE, then drops the feature with the lowest forest importance
/// (the later one on a tie). Returns the set of size `keep`, or with
/// `keep = None` the best-scoring set (the smaller one on a tie).
pub fn recursive_feature_elimination<T: Scalar>(
    data: &TrainingSet<T>,
    keep: Option<usize>,
    params: &RfeParams,
) -> Result<Vec<String>> {
    let p = data.n_features();
    if p < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 features, got {p}")));
    }
    if let Some(k) = keep {
        if k == 0 || k > p {
            return Err(Error::InvalidArgument(format!("cannot keep {k} of {p} features")));
        }
        if k == p {
            return Ok(data.feature_names().to_vec());
        }
    }
    let mut current = data.feature_names().to_vec();
    let mut best: Option<(f64, Vec<String>)> = None;
    loop {
        if keep.is_none() {
            let score = out_of_fold_rmse(data, &current, params)?;
            log::debug!("rfe: {} features, oof rmse {score:.6}", current.len());
            if best.as_ref().is_none_or(|(s, _)| score <= *s) {
                best = Some((score, current.clone()));
            }
        } else if keep == Some(current.len()) {
            return Ok(current);
        }
        if current.len() == 1 {
            break;
        }
        let seed = rng::derive_seed(params.seed, &[current.len() as u64, u64::MAX]);
        let model = RandomForestModel::fit(&data.select_features(&current)?, params.transform, seed, &params.forest)?;
        let imp = model.feature_importance();
        let mut drop = 0;
        for (k, (_, v)) in imp.iter().enumerate() {
            if *v <= imp[drop].1 {
                drop = k;
            }
        }
        current.remove(drop);
    }
    Ok(best.map(|(_, s)| s).unwrap_or(current))
}

/// Features present in every fold's selection, in the first fold's order.
pub fn fold_intersection(per_fold: &[Vec<String>]) -> Result<Vec<String>> {
    let Some((first, rest)) = per_fold.split_first() else {
        return Err(Error::InvalidArgument("no fold selections to intersect".into()));
    };
    let out: Vec<String> = first
        .iter()
        .filter(|n| rest.iter().all(|s| s.contains(n)))
        .cloned()
        .collect();
    if out.is_empty() {
        log::warn!("fold intersection is empty ({} folds)", per_fold.len());
    }
    Ok(out)
}
