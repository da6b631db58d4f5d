//! Parametric Taylor rules.
//!
//! The general form is
//! `i = r* + beta_1 * pi + beta_pi * (pi - pi*) + beta_y * gap`,
//! which with `beta_1 = 1` is the classic rule `i = pi + r* + ...`.

use std::fmt;
use std::str::FromStr;

use crate::dataset::FixedTargets;
use crate::error::{Error, Result};

/// Coefficients of a parametric Taylor rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleParams {
    pub r_star: f64,
    pub pi_star: f64,
    /// Weight on the inflation level.
    pub beta_1: f64,
    /// Weight on the inflation gap.
    pub beta_pi: f64,
    /// Weight on the output gap.
    pub beta_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Taylor (1993), also used for the 1999 variant: `beta_pi = beta_y = 0.5`.
    Taylor1993,
    /// Coefficients re-estimated by OLS on the implemented fed funds rate.
    OlsFitted,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Taylor1993, Preset::OlsFitted];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Taylor1993 => "taylor1993",
            Preset::OlsFitted => "ols_fitted",
        }
    }

    pub fn params(self) -> RuleParams {
        match self {
            Preset::Taylor1993 => RuleParams { r_star: 2.0, pi_star: 2.0, beta_1: 1.0, beta_pi: 0.5, beta_y: 0.5 },
            Preset::OlsFitted => RuleParams { r_star: 2.0, pi_star: 2.0, beta_1: 0.705, beta_pi: 0.525, beta_y: 0.13 },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "taylor1993" | "taylor1999" => Ok(Preset::Taylor1993),
            "ols_fitted" => Ok(Preset::OlsFitted),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<RuleParams> {
    name.parse::<Preset>().map(Preset::params)
}

impl RuleParams {
    pub fn new(r_star: f64, pi_star: f64, beta_1: f64, beta_pi: f64, beta_y: f64) -> Result<Self> {
        let p = Self { r_star, pi_star, beta_1, beta_pi, beta_y };
        if [r_star, pi_star, beta_1, beta_pi, beta_y].iter().all(|v| v.is_finite()) {
            Ok(p)
        } else {
            Err(Error::Domain(format!("rule coefficients must be finite: {p:?}")))
        }
    }

    pub fn targets(&self) -> FixedTargets {
        FixedTargets { r_star: self.r_star, pi_star: self.pi_star }
    }

    /// Intercept of the reduced form, `r* - beta_pi * pi*`.
    pub fn reduced_intercept(&self) -> f64 {
        self.r_star - self.beta_pi * self.pi_star
    }

    /// Coefficient on inflation in the reduced form, `beta_1 + beta_pi`.
    pub fn reduced_inflation_coef(&self) -> f64 {
        self.beta_1 + self.beta_pi
    }
}

/// Policy rate implied by `params` at inflation `pi` and output gap `output_gap`.
pub fn rule_rate(pi: f64, output_gap: f64, params: &RuleParams) -> f64 {
    params.r_star + params.beta_1 * pi + params.beta_pi * (pi - params.pi_star) + params.beta_y * output_gap
}
