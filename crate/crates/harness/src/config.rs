use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use trajela::cmaes::default_population_size;
use trajela::ela::MIN_SAMPLES;

use crate::error::{HarnessError, Result};
use crate::portfolio::Portfolio;

/// Which runs contribute training rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One row per run.
    AllRuns,
    /// One row per instance: the lower-median run.
    Median,
}

impl FromStr for Mode {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-runs" => Ok(Mode::AllRuns),
            "median" => Ok(Mode::Median),
            other => Err(HarnessError::Config(format!("unknown mode '{other}' (all-runs|median)"))),
        }
    }
}

/// Where the selector threshold is optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauPolicy {
    /// Once, on the pooled out-of-sample predictions of all folds.
    Pooled,
    /// Per outer fold, on inner leave-one-instance-out predictions of the
    /// training instances only.
    Nested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub fids: Vec<u32>,
    pub iids: Vec<u32>,
    pub runs_per_instance: u32,
    pub budget: usize,
    pub snapshot_at: usize,
    pub trajectory_prefix: usize,
    pub global_sample_sizes: Vec<usize>,
    pub global_repetitions: usize,
    /// Inner folds used when scoring feature subsets during elimination.
    pub cv_folds: usize,
    pub seed: u64,
    pub portfolios: Vec<String>,
    pub tau_policy: TauPolicy,
    pub mode: Mode,
    pub n_trees: usize,
    /// Independent forest fits per fold; predictions are their median.
    pub model_repeats: usize,
    pub rfe_trees: usize,
    pub log_floor: f64,
    pub export_trajectories: bool,
}

pub const DEFAULT_PORTFOLIOS: [&str; 11] = [
    "SV",
    "ELA",
    "ELA+SV",
    "GLOB2k",
    "GLOB2k+SV",
    "GLOB250",
    "GLOB250+SV",
    "cor0.50",
    "cor0.75",
    "cor0.90",
    "rfe",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 5,
            fids: (1..=24).collect(),
            iids: (1..=5).collect(),
            runs_per_instance: 20,
            budget: 500,
            snapshot_at: 250,
            trajectory_prefix: 250,
            global_sample_sizes: vec![250, 2000],
            global_repetitions: 50,
            cv_folds: 5,
            seed: 1,
            portfolios: DEFAULT_PORTFOLIOS.iter().map(|s| s.to_string()).collect(),
            tau_policy: TauPolicy::Pooled,
            mode: Mode::Median,
            n_trees: 1000,
            model_repeats: 3,
            rfe_trees: 100,
            log_floor: trajela::forest::DEFAULT_LOG_FLOOR,
            export_trajectories: true,
        }
    }
}

impl ExperimentConfig {
    /// A reduced setting that runs in about a minute: all problems, fewer
    /// runs, repetitions and trees.
    pub fn desk_scale() -> Self {
        Self {
            runs_per_instance: 3,
            global_repetitions: 3,
            n_trees: 100,
            rfe_trees: 20,
            ..Self::default()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.dim < 2 {
            return bad(format!("dim must be at least 2, got {}", self.dim));
        }
        if self.fids.is_empty() || self.fids.iter().any(|f| !(1..=24).contains(f)) {
            return bad(format!("fids must be a nonempty subset of 1..=24, got {:?}", self.fids));
        }
        if has_duplicates(&self.fids) || has_duplicates(&self.iids) {
            return bad("fids and iids must not repeat".into());
        }
        if self.iids.len() < 2 || self.iids.contains(&0) {
            return bad(format!("need at least two positive instance ids, got {:?}", self.iids));
        }
        if self.runs_per_instance == 0 {
            return bad("runs_per_instance must be positive".into());
        }
        if self.budget < default_population_size(self.dim) {
            return bad(format!("budget {} is below one generation", self.budget));
        }
        if self.snapshot_at == 0 || self.snapshot_at > self.budget {
            return bad(format!("snapshot_at {} must lie in 1..={}", self.snapshot_at, self.budget));
        }
        if self.trajectory_prefix < MIN_SAMPLES || self.trajectory_prefix > self.budget {
            return bad(format!(
                "trajectory_prefix {} must lie in {MIN_SAMPLES}..={}",
                self.trajectory_prefix, self.budget
            ));
        }
        if let Some(s) = self.global_sample_sizes.iter().find(|s| ![250, 2000].contains(*s)) {
            return bad(format!("unsupported global sample size {s} (250 or 2000)"));
        }
        if has_duplicates(&self.global_sample_sizes) {
            return bad("global_sample_sizes must not repeat".into());
        }
        if self.global_repetitions == 0 || self.n_trees == 0 || self.model_repeats == 0 || self.rfe_trees == 0 {
            return bad("repetition and tree counts must be positive".into());
        }
        if self.cv_folds < 2 {
            return bad(format!("cv_folds must be at least 2, got {}", self.cv_folds));
        }
        if !(self.log_floor > 0.0 && self.log_floor.is_finite()) {
            return bad(format!("log_floor must be positive, got {}", self.log_floor));
        }
        if self.portfolios.is_empty() {
            return bad("no portfolios configured".into());
        }
        for name in &self.portfolios {
            let p = Portfolio::parse(name)?;
            if let Some(size) = p.global_size() {
                if !self.global_sample_sizes.contains(&size) {
                    return bad(format!("portfolio {name} needs global sample size {size}"));
                }
            }
        }
        if has_duplicates(&self.portfolios) {
            return bad("portfolio names must not repeat".into());
        }
        Ok(())
    }
}

fn has_duplicates<T: Ord + Clone>(v: &[T]) -> bool {
    let mut s = v.to_vec();
    s.sort();
    s.windows(2).any(|w| w[0] == w[1])
}
