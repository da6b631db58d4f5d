//! Taylor-rule replication: data ingest, rule evaluation, reduced-form OLS,
//! a small feed-forward network trained by online backpropagation, and
//! comparison reports.

// NaN must fail validation, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod dataset;
pub mod error;
pub mod fmt;
pub mod mlp;
pub mod ols;
pub mod report;
pub mod synthetic;
pub mod taylor;

pub use config::RunConfig;
pub use dataset::{Dataset, FixedTargets, InflationMeasure, Observation, Quarter};
pub use error::{Error, Result};
pub use mlp::{train, Network, TrainConfig, TrainReport};
pub use ols::{fit_ols, RegressionResult};
pub use report::{build_series, find_divergences, EstimateSeries, Estimator};
pub use taylor::{rule_rate, Preset, RuleParams};
