//! TOML run configuration. Every key is optional; command-line flags take
//! precedence over the file, which takes precedence over built-in defaults.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evaluate::{linear_grid, ExactConfig, GridCheck};
use crate::model::TruthParam;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `gaussian:<eta>` or `bernoulli:<p0>,<p1>`.
    pub model: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// One of `fsst`, `3st`, `gmt`, `st`, `modst`, `sprt`.
    pub family: Option<String>,
    /// Number of stages for ST and mod-ST.
    #[serde(rename = "K")]
    pub k: Option<usize>,
    /// Parameter grid as `lo:hi:n`.
    pub grid: Option<String>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    /// Output file (design, eval, sweep) or directory (reproduce).
    pub out: Option<PathBuf>,
    /// `exact` or `mc`.
    pub method: Option<String>,
    pub exact: Option<ExactSection>,
    pub highdim: Option<HighDimSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSection {
    pub points: Option<usize>,
    pub span_sd: Option<f64>,
    /// `off`, `half` or `double`.
    pub check: Option<String>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighDimSection {
    pub m: Option<u64>,
    pub l: Option<u64>,
    pub u: Option<u64>,
    pub kappa: Option<u64>,
    pub iota: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub k_max: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    /// Grid settings over `base`.
    pub fn exact_config(&self, base: ExactConfig) -> Result<ExactConfig> {
        let Some(s) = &self.exact else {
            return Ok(base);
        };
        Ok(ExactConfig {
            points: s.points.unwrap_or(base.points),
            span_sd: s.span_sd.unwrap_or(base.span_sd),
            check: match &s.check {
                Some(c) => parse_check(c)?,
                None => base.check,
            },
            tolerance: s.tolerance.unwrap_or(base.tolerance),
        })
    }
}

pub fn parse_check(s: &str) -> Result<GridCheck> {
    match s {
        "off" => Ok(GridCheck::Off),
        "half" => Ok(GridCheck::Half),
        "double" => Ok(GridCheck::Double),
        other => Err(Error::Config(format!("grid check must be off, half or double, got '{other}'"))),
    }
}

/// Parses `lo:hi:n` into `n` equally spaced values, both ends included.
pub fn parse_grid(s: &str) -> Result<Vec<TruthParam>> {
    let bad = || Error::Config(format!("grid must look like lo:hi:n, got '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(Error::Config("the parameter grid is empty".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Config(format!("grid bounds must be finite with lo <= hi, got '{s}'")));
    }
    Ok(linear_grid(lo, hi, n))
}
