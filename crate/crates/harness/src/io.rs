//! File names, number formatting and CSV/JSON helpers for the output directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{HarnessError, Result};

pub const CONFIG: &str = "config.json";
pub const INSTANCES: &str = "instances.json";
pub const TRAJECTORIES: &str = "trajectories.csv";
pub const PRECISIONS: &str = "precisions.csv";
pub const SNAPSHOTS: &str = "snapshots.csv";
pub const MEDIAN_RUNS: &str = "median_runs.csv";
pub const FEATURES_TRAJECTORY: &str = "features_trajectory.csv";
pub const FEATURES_GLOBAL: &str = "features_global.csv";
pub const PORTFOLIOS: &str = "portfolios.json";
pub const THRESHOLDS: &str = "thresholds.json";
pub const FOLDS: &str = "folds.csv";
pub const REPORT: &str = "report.csv";
pub const ERRORS_BY_FUNCTION: &str = "errors_by_function.csv";

pub fn predictions_file(portfolio: &str) -> String {
    format!("predictions_{portfolio}.csv")
}

/// Shortest round-trip text; scientific notation outside `[1e-5, 1e16)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| HarnessError::parse(path, format!("not a number: '{s}'")))
}

pub fn parse_u32(s: &str, path: &Path) -> Result<u32> {
    s.trim()
        .parse()
        .map_err(|_| HarnessError::parse(path, format!("not an integer: '{s}'")))
}

pub struct CsvSink {
    path: std::path::PathBuf,
    w: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    pub fn create<S: AsRef<str>>(path: &Path, header: &[S]) -> Result<Self> {
        let f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let mut sink = Self {
            path: path.to_path_buf(),
            w: csv::Writer::from_writer(BufWriter::new(f)),
        };
        sink.row(header.iter().map(|s| s.as_ref()))?;
        Ok(sink)
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).map_err(|e| HarnessError::csv(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush().map_err(|e| HarnessError::io(&self.path, e))
    }
}

/// All records of a CSV file whose header must equal `header`.
pub fn read_csv<S: AsRef<str>>(path: &Path, header: &[S]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    let got = r.headers().map_err(|e| HarnessError::csv(path, e))?.clone();
    if !got.iter().eq(header.iter().map(|s| s.as_ref())) {
        return Err(HarnessError::parse(path, format!("unexpected header {:?}", got)));
    }
    r.records()
        .map(|rec| rec.map_err(|e| HarnessError::csv(path, e)))
        .collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| HarnessError::parse(path, e.to_string()))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::parse(path, e.to_string()))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips() {
        for v in [0.0, 1.0, -2.5, 4.901, 1e-300, 3.3e-6, 123456.789, 1e20, f64::INFINITY, 0.1 + 0.2] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(1e-12), "1e-12");
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }
}
