//! Table-shaped summary: one column per portfolio.

use std::collections::BTreeMap;
use std::path::Path;

use trajela::selector::{abs_errors_by_function, records_rmse, Variant};

use crate::cv::{PortfolioOutcome, Tau};
use crate::error::Result;
use crate::io::{fmt_f64, CsvSink};

pub const ROW_TAU: &str = "Best threshold tau";
pub const ROW_FEATURES: &str = "Number of features";
pub const ROW_RMSE_COMBINED: &str = "Overall RMSE, combined";
pub const ROW_RMSE_UNSCALED: &str = "Overall RMSE, unscaled";
pub const ROW_RMSE_LOG: &str = "Overall RMSE, log";

#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub tau: Tau,
    pub n_features: usize,
    /// Mean absolute error of the combined prediction per function id.
    pub mae_combined: BTreeMap<u32, f64>,
    pub mae_unscaled: BTreeMap<u32, f64>,
    pub mae_log: BTreeMap<u32, f64>,
    pub rmse_combined: f64,
    pub rmse_unscaled: f64,
    pub rmse_log: f64,
}

/// A report column. `scores` is `None` for portfolios that were not
/// trained (reserved selectors or an empty selection).
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSummary {
    pub name: String,
    pub scores: Option<Scores>,
}

pub fn summarize(o: &PortfolioOutcome) -> Result<PortfolioSummary> {
    let r = &o.records;
    Ok(PortfolioSummary {
        name: o.name.clone(),
        scores: Some(Scores {
            tau: o.tau.clone(),
            n_features: o.features.len(),
            mae_combined: abs_errors_by_function(r, Variant::Combined),
            mae_unscaled: abs_errors_by_function(r, Variant::Unscaled),
            mae_log: abs_errors_by_function(r, Variant::Log),
            rmse_combined: records_rmse(r, Variant::Combined)?,
            rmse_unscaled: records_rmse(r, Variant::Unscaled)?,
            rmse_log: records_rmse(r, Variant::Log)?,
        }),
    })
}

pub fn empty(name: &str) -> PortfolioSummary {
    PortfolioSummary {
        name: name.to_string(),
        scores: None,
    }
}

fn fid_row(fid: u32) -> String {
    format!("F{fid} mean absolute error, combined")
}

/// Rows: threshold, feature count, per-function combined MAE, then the three
/// overall RMSE rows. Untrained portfolios get `NA` cells.
pub fn write_report(path: &Path, fids: &[u32], columns: &[PortfolioSummary]) -> Result<()> {
    let mut header = vec!["row".to_string()];
    header.extend(columns.iter().map(|c| c.name.clone()));
    let mut w = CsvSink::create(path, &header)?;
    let mut line = |label: String, cell: &dyn Fn(&Scores) -> String| -> Result<()> {
        let mut row = vec![label];
        row.extend(columns.iter().map(|c| c.scores.as_ref().map_or_else(|| "NA".to_string(), cell)));
        w.row(&row)
    };
    line(ROW_TAU.into(), &|s| s.tau.display())?;
    line(ROW_FEATURES.into(), &|s| s.n_features.to_string())?;
    for &fid in fids {
        line(fid_row(fid), &|s| s.mae_combined.get(&fid).map_or("NA".into(), |v| fmt_f64(*v)))?;
    }
    line(ROW_RMSE_COMBINED.into(), &|s| fmt_f64(s.rmse_combined))?;
    line(ROW_RMSE_UNSCALED.into(), &|s| fmt_f64(s.rmse_unscaled))?;
    line(ROW_RMSE_LOG.into(), &|s| fmt_f64(s.rmse_log))?;
    w.finish()
}

/// Long-format per-function absolute errors of all three predictions.
pub fn write_errors_by_function(path: &Path, columns: &[PortfolioSummary]) -> Result<()> {
    let mut w = CsvSink::create(path, &["portfolio", "fid", "model", "mean_abs_error"])?;
    for c in columns {
        let Some(s) = &c.scores else { continue };
        for (model, table) in [
            ("combined", &s.mae_combined),
            ("unscaled", &s.mae_unscaled),
            ("log", &s.mae_log),
        ] {
            for (fid, v) in table {
                w.row([c.name.clone(), fid.to_string(), model.to_string(), fmt_f64(*v)])?;
            }
        }
    }
    w.finish()
}

/// Parses a report written by [`write_report`] back into
/// `row label -> portfolio -> cell`.
pub fn read_report(path: &Path) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| crate::error::HarnessError::csv(path, e))?;
    let header = r.headers().map_err(|e| crate::error::HarnessError::csv(path, e))?.clone();
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| crate::error::HarnessError::csv(path, e))?;
        let cells = header.iter().zip(rec.iter()).skip(1).map(|(h, v)| (h.to_string(), v.to_string()));
        out.insert(rec[0].to_string(), cells.collect());
    }
    Ok(out)
}
