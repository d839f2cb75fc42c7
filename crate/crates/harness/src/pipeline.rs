//! Experiment stages. Each stage reads and writes fixed file names in the
//! output directory, so running them one by one through the CLI gives the
//! same files as [`run_pipeline`].

use std::collections::BTreeMap;
use std::path::Path;

use trajela::bbob::InstanceMetadata;
use trajela::TrainingData;

use crate::config::{ExperimentConfig, Mode};
use crate::cv::{evaluate_portfolio, write_folds, write_predictions, PortfolioOutcome, TauRecord};
use crate::error::{HarnessError, Result};
use crate::features::{build_table, global_features, read_features, trajectory_features, write_features, FeatureRow};
use crate::io::{self, ensure_dir, read_json, write_json};
use crate::portfolio::Portfolio;
use crate::report::{self, PortfolioSummary};
use crate::runs::{
    instances, read_precisions, read_runs, run_trajectories, select_median_runs, write_precisions,
    write_snapshots, write_trajectories, PrecisionRecord, RunRecord,
};
use crate::select::select_portfolios;

pub fn instance_metadata(cfg: &ExperimentConfig, reveal_optimum: bool) -> Result<Vec<InstanceMetadata>> {
    Ok(instances(cfg)?.iter().map(|i| i.metadata(reveal_optimum)).collect())
}

/// Runs CMA-ES everywhere and writes trajectories (when enabled),
/// precisions and snapshots.
pub fn stage_run_trajectories(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<RunRecord>> {
    ensure_dir(out)?;
    write_json(&out.join(io::CONFIG), cfg)?;
    write_json(&out.join(io::INSTANCES), &instance_metadata(cfg, false)?)?;
    let runs = run_trajectories(cfg)?;
    if cfg.export_trajectories {
        write_trajectories(&out.join(io::TRAJECTORIES), cfg.dim, &runs)?;
    }
    let precisions: Vec<PrecisionRecord> = runs.iter().map(RunRecord::precision_record).collect();
    write_precisions(&out.join(io::PRECISIONS), &precisions)?;
    write_snapshots(&out.join(io::SNAPSHOTS), &runs)?;
    Ok(runs)
}

pub fn stage_select_median(out: &Path, precisions: &[PrecisionRecord]) -> Result<Vec<PrecisionRecord>> {
    let median = select_median_runs(precisions);
    ensure_dir(out)?;
    write_precisions(&out.join(io::MEDIAN_RUNS), &median)?;
    Ok(median)
}

/// The runs that contribute rows under the configured mode.
pub fn rows_for_mode<'a>(cfg: &ExperimentConfig, runs: &'a [RunRecord]) -> Vec<&'a RunRecord> {
    match cfg.mode {
        Mode::AllRuns => runs.iter().collect(),
        Mode::Median => {
            let p: Vec<PrecisionRecord> = runs.iter().map(RunRecord::precision_record).collect();
            let chosen: Vec<_> = select_median_runs(&p).into_iter().map(|r| r.meta).collect();
            runs.iter().filter(|r| chosen.binary_search(&r.meta).is_ok()).collect()
        }
    }
}

pub fn stage_trajectory_features(cfg: &ExperimentConfig, out: &Path, runs: &[RunRecord]) -> Result<Vec<FeatureRow>> {
    let rows = trajectory_features(cfg, &rows_for_mode(cfg, runs))?;
    ensure_dir(out)?;
    write_features(&out.join(io::FEATURES_TRAJECTORY), &rows)?;
    Ok(rows)
}

pub fn stage_global_features(cfg: &ExperimentConfig, out: &Path, sizes: &[usize]) -> Result<Vec<FeatureRow>> {
    let rows = global_features(cfg, sizes)?;
    ensure_dir(out)?;
    write_features(&out.join(io::FEATURES_GLOBAL), &rows)?;
    Ok(rows)
}

pub fn stage_select_features(
    cfg: &ExperimentConfig,
    out: &Path,
    table: &TrainingData,
    portfolios: &[Portfolio],
) -> Result<BTreeMap<String, Vec<String>>> {
    let path = out.join(io::PORTFOLIOS);
    let mut selected: BTreeMap<String, Vec<String>> = if path.exists() {
        read_json(&path)?
    } else {
        BTreeMap::new()
    };
    selected.extend(select_portfolios(cfg, table, portfolios)?);
    write_json(&path, &selected)?;
    Ok(selected)
}

/// Trains every portfolio; reserved and empty portfolios come back as `None`.
pub fn stage_train(
    cfg: &ExperimentConfig,
    out: &Path,
    table: &TrainingData,
    portfolios: &[Portfolio],
    selected: &BTreeMap<String, Vec<String>>,
    save_models: bool,
) -> Result<Vec<(String, Option<PortfolioOutcome>)>> {
    let mut results = Vec::with_capacity(portfolios.len());
    for p in portfolios {
        let name = p.name().to_string();
        let features = match p.columns(selected)? {
            None => {
                log::warn!("portfolio {name} is reserved and not trained");
                results.push((name, None));
                continue;
            }
            Some(f) if f.is_empty() => {
                log::warn!("portfolio {name} selected no features and is not trained");
                results.push((name, None));
                continue;
            }
            Some(f) => f,
        };
        let model_dir = save_models.then(|| out.join("models").join(&name));
        let o = evaluate_portfolio(cfg, table, &name, &features, model_dir.as_deref())?;
        write_predictions(&out.join(io::predictions_file(&name)), &o.records)?;
        results.push((name, Some(o)));
    }

    let path = out.join(io::THRESHOLDS);
    let mut taus: BTreeMap<String, TauRecord> = if path.exists() { read_json(&path)? } else { BTreeMap::new() };
    for (name, o) in &results {
        if let Some(o) = o {
            taus.insert(name.clone(), TauRecord::from(&o.tau));
        }
    }
    write_json(&path, &taus)?;
    let trained: Vec<&PortfolioOutcome> = results.iter().filter_map(|(_, o)| o.as_ref()).collect();
    if !trained.is_empty() {
        write_folds(&out.join(io::FOLDS), &trained)?;
    }
    Ok(results)
}

/// Writes the report from previously written predictions and thresholds.
pub fn stage_report(cfg: &ExperimentConfig, out: &Path, portfolios: &[Portfolio]) -> Result<Vec<PortfolioSummary>> {
    let tpath = out.join(io::THRESHOLDS);
    let taus: BTreeMap<String, TauRecord> = read_json(&tpath)?;
    let selected: BTreeMap<String, Vec<String>> = {
        let p = out.join(io::PORTFOLIOS);
        if p.exists() {
            read_json(&p)?
        } else {
            BTreeMap::new()
        }
    };
    let mut columns = Vec::with_capacity(portfolios.len());
    for p in portfolios {
        let name = p.name();
        let Some(t) = taus.get(name) else {
            columns.push(report::empty(name));
            continue;
        };
        let tau = t.to_tau(&tpath)?;
        let records = crate::cv::read_predictions(&out.join(io::predictions_file(name)), &tau)?;
        let features = p.columns(&selected).ok().flatten().unwrap_or_default();
        let o = PortfolioOutcome {
            name: name.to_string(),
            features,
            records,
            tau,
            folds: Vec::new(),
        };
        columns.push(report::summarize(&o)?);
    }
    write_reports(cfg, out, &columns)?;
    Ok(columns)
}

fn write_reports(cfg: &ExperimentConfig, out: &Path, columns: &[PortfolioSummary]) -> Result<()> {
    report::write_report(&out.join(io::REPORT), &cfg.fids, columns)?;
    report::write_errors_by_function(&out.join(io::ERRORS_BY_FUNCTION), columns)
}

pub fn configured_portfolios(cfg: &ExperimentConfig) -> Result<Vec<Portfolio>> {
    cfg.portfolios.iter().map(|n| Portfolio::parse(n)).collect()
}

/// Global sample sizes some portfolio needs.
pub fn needed_global_sizes(portfolios: &[Portfolio]) -> Vec<usize> {
    let mut s: Vec<usize> = portfolios.iter().filter_map(Portfolio::global_size).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Loads the experiment table from the feature files in `out`.
pub fn load_table(out: &Path) -> Result<TrainingData> {
    let traj = read_features(&out.join(io::FEATURES_TRAJECTORY))?;
    let gpath = out.join(io::FEATURES_GLOBAL);
    let global = if gpath.exists() { read_features(&gpath)? } else { Vec::new() };
    build_table(&traj, &global)
}

pub fn load_runs(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<RunRecord>> {
    let t = out.join(io::TRAJECTORIES);
    if !t.exists() {
        return Err(HarnessError::Config(format!(
            "{} not found; run run-trajectories with export_trajectories enabled",
            t.display()
        )));
    }
    read_runs(&t, &out.join(io::SNAPSHOTS), &out.join(io::PRECISIONS), cfg.dim)
}

pub fn load_precisions(out: &Path) -> Result<Vec<PrecisionRecord>> {
    read_precisions(&out.join(io::PRECISIONS))
}

#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub n_runs: usize,
    pub n_rows: usize,
    pub outcomes: Vec<PortfolioOutcome>,
    pub columns: Vec<PortfolioSummary>,
}

/// Every stage in order, with the configured portfolios.
pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path, save_models: bool) -> Result<PipelineSummary> {
    cfg.validate()?;
    let portfolios = configured_portfolios(cfg)?;
    let runs = stage_run_trajectories(cfg, out)?;
    let precisions: Vec<PrecisionRecord> = runs.iter().map(RunRecord::precision_record).collect();
    stage_select_median(out, &precisions)?;
    let traj = stage_trajectory_features(cfg, out, &runs)?;
    let n_runs = runs.len();
    drop(runs);
    let sizes = needed_global_sizes(&portfolios);
    let global = if sizes.is_empty() {
        Vec::new()
    } else {
        stage_global_features(cfg, out, &sizes)?
    };
    let table = build_table(&traj, &global)?;
    let selected = if portfolios.iter().any(Portfolio::needs_selection) {
        stage_select_features(cfg, out, &table, &portfolios)?
    } else {
        BTreeMap::new()
    };
    let trained = stage_train(cfg, out, &table, &portfolios, &selected, save_models)?;
    let mut columns = Vec::with_capacity(trained.len());
    let mut outcomes = Vec::new();
    for (name, o) in trained {
        match o {
            Some(o) => {
                columns.push(report::summarize(&o)?);
                outcomes.push(o);
            }
            None => columns.push(report::empty(&name)),
        }
    }
    write_reports(cfg, out, &columns)?;
    Ok(PipelineSummary {
        n_runs,
        n_rows: table.len(),
        outcomes,
        columns,
    })
}
