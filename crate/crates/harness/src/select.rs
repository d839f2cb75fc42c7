//! Per-fold feature selection intersected over folds.

use std::collections::BTreeMap;

use rayon::prelude::*;
use trajela::forest::{ForestParams, TargetTransform};
use trajela::selection::{correlation_filter, fold_intersection, recursive_feature_elimination, RfeParams};
use trajela::{rng, TrainingData};

use crate::config::ExperimentConfig;
use crate::cv::leave_one_instance_out;
use crate::error::Result;
use crate::portfolio::{selection_candidates, Portfolio};
use crate::streams;

/// Selected feature lists for every correlation or elimination portfolio in
/// `portfolios`, keyed by portfolio name. Selection runs on the training
/// rows of each leave-one-instance-out fold and keeps the features every
/// fold agreed on.
pub fn select_portfolios(
    cfg: &ExperimentConfig,
    data: &TrainingData,
    portfolios: &[Portfolio],
) -> Result<BTreeMap<String, Vec<String>>> {
    let candidates = selection_candidates();
    let sub = data.select_features(&candidates)?;
    let folds = leave_one_instance_out(sub.row_meta(), &cfg.iids);
    let mut out = BTreeMap::new();
    for p in portfolios {
        let per_fold: Vec<Vec<String>> = match p {
            Portfolio::Correlation { threshold, .. } => folds
                .iter()
                .map(|f| {
                    let train = sub.select_rows(&f.train);
                    correlation_filter(train.feature_names(), train.features(), *threshold)
                })
                .collect::<trajela::Result<_>>()?,
            Portfolio::Rfe => folds
                .par_iter()
                .map(|f| {
                    let params = RfeParams {
                        forest: ForestParams {
                            log_floor: cfg.log_floor,
                            ..ForestParams::with_trees(cfg.rfe_trees)
                        },
                        folds: cfg.cv_folds,
                        transform: TargetTransform::Log10,
                        seed: rng::derive_seed(cfg.seed, &[streams::RFE, f.test_iid as u64]),
                    };
                    recursive_feature_elimination(&sub.select_rows(&f.train), None, &params)
                })
                .collect::<trajela::Result<_>>()?,
            _ => continue,
        };
        for (f, s) in folds.iter().zip(&per_fold) {
            log::debug!("{} fold {}: {} features", p.name(), f.test_iid, s.len());
        }
        let kept = fold_intersection(&per_fold)?;
        log::info!("{}: {} features survive all folds", p.name(), kept.len());
        out.insert(p.name().to_string(), kept);
    }
    Ok(out)
}
