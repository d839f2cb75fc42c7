//! Named feature portfolios and the column naming of the experiment table.

use std::collections::BTreeMap;
use std::path::Path;

use trajela::ela::ELA_FEATURE_NAMES;
use trajela::state::STATE_FEATURE_NAMES;

use crate::error::{HarnessError, Result};

/// Column prefix of global-sample ELA features.
pub fn global_prefix(size: usize) -> &'static str {
    match size {
        250 => "glob250.",
        2000 => "glob2k.",
        _ => unreachable!("config validation admits only 250 and 2000"),
    }
}

pub fn ela_columns() -> Vec<String> {
    ELA_FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

pub fn sv_columns() -> Vec<String> {
    STATE_FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

pub fn global_columns(size: usize) -> Vec<String> {
    let p = global_prefix(size);
    ELA_FEATURE_NAMES.iter().map(|s| format!("{p}{s}")).collect()
}

/// Columns feature selection starts from: trajectory ELA plus state variables.
pub fn selection_candidates() -> Vec<String> {
    let mut v = ela_columns();
    v.extend(sv_columns());
    v
}

#[derive(Debug, Clone, PartialEq)]
pub enum Portfolio {
    /// A union of trajectory ELA, state variables and global ELA blocks.
    Fixed {
        name: String,
        ela: bool,
        sv: bool,
        global: Option<usize>,
    },
    /// Correlation filter at the given threshold, intersected over folds.
    Correlation { name: String, threshold: f64 },
    /// Recursive feature elimination, intersected over folds.
    Rfe,
    /// An explicit feature list, e.g. from a portfolio file.
    Custom { name: String, features: Vec<String> },
    /// Known selector that is not implemented; its report column stays empty.
    Reserved(String),
}

impl Portfolio {
    pub fn parse(name: &str) -> Result<Self> {
        let fixed = |ela, sv, global| Portfolio::Fixed {
            name: name.to_string(),
            ela,
            sv,
            global,
        };
        Ok(match name {
            "SV" => fixed(false, true, None),
            "ELA" => fixed(true, false, None),
            "ELA+SV" => fixed(true, true, None),
            "GLOB2k" => fixed(false, false, Some(2000)),
            "GLOB2k+SV" => fixed(false, true, Some(2000)),
            "GLOB250" => fixed(false, false, Some(250)),
            "GLOB250+SV" => fixed(false, true, Some(250)),
            "rfe" => Portfolio::Rfe,
            "boruta" | "stepwise" => Portfolio::Reserved(name.to_string()),
            _ => match name.strip_prefix("cor").map(str::parse::<f64>) {
                Some(Ok(t)) if t > 0.0 && t < 1.0 => Portfolio::Correlation {
                    name: name.to_string(),
                    threshold: t,
                },
                _ => return Err(HarnessError::Config(format!("unknown portfolio '{name}'"))),
            },
        })
    }

    pub fn name(&self) -> &str {
        match self {
            Portfolio::Fixed { name, .. }
            | Portfolio::Correlation { name, .. }
            | Portfolio::Custom { name, .. }
            | Portfolio::Reserved(name) => name,
            Portfolio::Rfe => "rfe",
        }
    }

    pub fn global_size(&self) -> Option<usize> {
        match self {
            Portfolio::Fixed { global, .. } => *global,
            _ => None,
        }
    }

    pub fn needs_selection(&self) -> bool {
        matches!(self, Portfolio::Correlation { .. } | Portfolio::Rfe)
    }

    /// Feature columns, looking selected portfolios up in `selected`.
    /// `None` for reserved portfolios.
    pub fn columns(&self, selected: &BTreeMap<String, Vec<String>>) -> Result<Option<Vec<String>>> {
        Ok(Some(match self {
            Portfolio::Fixed { ela, sv, global, .. } => {
                let mut v = Vec::new();
                if *ela {
                    v.extend(ela_columns());
                }
                if let Some(size) = global {
                    v.extend(global_columns(*size));
                }
                if *sv {
                    v.extend(sv_columns());
                }
                v
            }
            Portfolio::Correlation { .. } | Portfolio::Rfe => selected
                .get(self.name())
                .cloned()
                .ok_or_else(|| HarnessError::Config(format!("portfolio {} has not been selected yet", self.name())))?,
            Portfolio::Custom { features, .. } => features.clone(),
            Portfolio::Reserved(_) => return Ok(None),
        }))
    }
}

/// Resolves `--portfolio` arguments: a registry name, or a JSON file
/// `{name: [features]}` contributing one custom portfolio per entry.
pub fn resolve(args: &[String]) -> Result<Vec<Portfolio>> {
    let mut out = Vec::new();
    for a in args {
        if a.ends_with(".json") || Path::new(a).is_file() {
            let text = std::fs::read_to_string(a).map_err(|e| HarnessError::Config(format!("{a}: {e}")))?;
            let map: BTreeMap<String, Vec<String>> =
                serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{a}: {e}")))?;
            out.extend(map.into_iter().map(|(name, features)| Portfolio::Custom { name, features }));
        } else {
            out.push(Portfolio::parse(a)?);
        }
    }
    Ok(out)
}
