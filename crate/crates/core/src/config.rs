//! `key = value` run configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataset::{FixedTargets, InflationMeasure, SeriesPaths};
use crate::error::{Error, Result};
use crate::mlp::{InputScaling, TrainConfig};
use crate::report::DEFAULT_DIVERGENCE_THRESHOLD;

pub const KEYS: [&str; 17] = [
    "r_star",
    "pi_star",
    "fedfunds_series_path",
    "inflation_series_path",
    "gdp_series_path",
    "potential_gdp_series_path",
    "panel_path",
    "inflation_measure",
    "mu",
    "epsilon",
    "max_epochs",
    "seed",
    "hidden_nodes",
    "input_scaling",
    "biases",
    "output_dir",
    "divergence_threshold",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub targets: FixedTargets,
    pub fedfunds_series_path: Option<PathBuf>,
    pub inflation_series_path: Option<PathBuf>,
    pub gdp_series_path: Option<PathBuf>,
    pub potential_gdp_series_path: Option<PathBuf>,
    /// A prepared panel CSV, used instead of the four raw series.
    pub panel_path: Option<PathBuf>,
    pub inflation_measure: InflationMeasure,
    pub train: TrainConfig,
    pub output_dir: PathBuf,
    pub divergence_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            targets: FixedTargets::default(),
            fedfunds_series_path: None,
            inflation_series_path: None,
            gdp_series_path: None,
            potential_gdp_series_path: None,
            panel_path: None,
            inflation_measure: InflationMeasure::default(),
            train: TrainConfig::default(),
            output_dir: PathBuf::from("out"),
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse().map_err(|_| Error::Config { line, message: format!("invalid value `{raw}` for `{key}`") })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| Error::Config {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set_at(key.trim(), val.trim(), idx + 1)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Applies one override, as a command-line flag would.
    pub fn set(&mut self, key: &str, val: &str) -> Result<()> {
        self.set_at(key, val, 0)
    }

    fn set_at(&mut self, key: &str, val: &str, line: usize) -> Result<()> {
        let path = || Some(PathBuf::from(val));
        match key {
            "r_star" => self.targets.r_star = value(key, val, line)?,
            "pi_star" => self.targets.pi_star = value(key, val, line)?,
            "fedfunds_series_path" => self.fedfunds_series_path = path(),
            "inflation_series_path" => self.inflation_series_path = path(),
            "gdp_series_path" => self.gdp_series_path = path(),
            "potential_gdp_series_path" => self.potential_gdp_series_path = path(),
            "panel_path" => self.panel_path = path(),
            "inflation_measure" => self.inflation_measure = value(key, val, line)?,
            "mu" => self.train.mu = value(key, val, line)?,
            "epsilon" => self.train.epsilon = value(key, val, line)?,
            "max_epochs" => self.train.max_epochs = value(key, val, line)?,
            "seed" => self.train.seed = value(key, val, line)?,
            "hidden_nodes" => self.train.hidden_nodes = value(key, val, line)?,
            "input_scaling" => self.train.input_scaling = value::<InputScaling>(key, val, line)?,
            "biases" => self.train.biases = value(key, val, line)?,
            "output_dir" => self.output_dir = PathBuf::from(val),
            "divergence_threshold" => self.divergence_threshold = value(key, val, line)?,
            other => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key `{other}` (known: {})", KEYS.join(", ")),
                })
            }
        }
        Ok(())
    }

    /// The four raw-series paths, if all are set.
    pub fn series_paths(&self) -> Option<SeriesPaths> {
        Some(SeriesPaths {
            fedfunds: self.fedfunds_series_path.clone()?,
            inflation: self.inflation_series_path.clone()?,
            real_gdp: self.gdp_series_path.clone()?,
            potential_gdp: self.potential_gdp_series_path.clone()?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in [("r_star", self.targets.r_star), ("pi_star", self.targets.pi_star)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{k} must be finite")));
            }
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::Domain("divergence_threshold must be positive".into()));
        }
        self.train.validate()
    }
}
