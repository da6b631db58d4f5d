//! Reduced-form OLS for the Taylor rule.
//!
//! Regressing the policy rate on `[1, pi, gap]` sidesteps the exact
//! collinearity between inflation and the inflation gap: the intercept
//! absorbs `r* - beta_pi * pi*` and the inflation coefficient is
//! `beta_1 + beta_pi`. The structural weights are recovered afterwards from
//! the known targets.
//!
//! The fit uses Householder QR. A plain normal-equation solve is kept for
//! cross-checking.

use std::fmt;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::{Dataset, FixedTargets, Quarter};
use crate::error::{Error, Result};
use crate::fmt::sig6;

/// Regressor names, in design-matrix column order.
pub const COLUMNS: [&str; 3] = ["intercept", "inflation", "output_gap"];

/// Pivots below this fraction of the largest pivot mark a rank-deficient design.
pub const RANK_TOLERANCE: f64 = 1e-10;

const P: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub name: &'static str,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    /// Intercept, inflation, output gap, in that order.
    pub coefficients: [Coefficient; P],
    pub r_squared: f64,
    pub n_obs: usize,
    pub rss: f64,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl RegressionResult {
    /// Intercept, `r* - beta_pi * pi*`.
    pub fn alpha(&self) -> f64 {
        self.coefficients[0].estimate
    }

    /// Inflation coefficient, `beta_1 + beta_pi`.
    pub fn theta_pi(&self) -> f64 {
        self.coefficients[1].estimate
    }

    pub fn beta_y(&self) -> f64 {
        self.coefficients[2].estimate
    }

    pub fn df_resid(&self) -> usize {
        self.n_obs - P
    }

    pub fn mse(&self) -> f64 {
        self.rss / self.n_obs as f64
    }

    /// Coefficient table: `term,estimate,std_error,t_stat,p_value,stars`.
    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("term,estimate,std_error,t_stat,p_value,stars\n");
        for c in &self.coefficients {
            let stars = significance_stars(c.p_value).map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{},{}\n", c.name, c.estimate, c.std_error, c.t_stat, c.p_value, stars));
        }
        out.push_str(&format!("n_obs,{},,,,\n", self.n_obs));
        out.push_str(&format!("r_squared,{},,,,\n", self.r_squared));
        out
    }

    /// Per-quarter fit: `date,actual,fitted,residual`.
    pub fn residuals_csv(&self, dates: &[Quarter]) -> Result<String> {
        if dates.len() != self.n_obs {
            return Err(Error::Shape(format!("{} dates for {} residuals", dates.len(), self.n_obs)));
        }
        let mut out = String::from("date,actual,fitted,residual\n");
        for ((d, f), e) in dates.iter().zip(&self.fitted).zip(&self.residuals) {
            out.push_str(&format!("{d},{},{f},{e}\n", f + e));
        }
        Ok(out)
    }
}

/// Householder QR of a tall design, applied to one right-hand side.
struct Qr {
    /// Upper triangle, row-major `P x P`.
    r: [[f64; P]; P],
    /// First `P` entries of `Q^T y`.
    qty: [f64; P],
}

fn householder_qr(columns: &[Vec<f64>; P], y: &[f64]) -> Qr {
    let n = y.len();
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut b = y.to_vec();
    let mut r = [[0.0; P]; P];

    for k in 0..P {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            for (j, col) in a.iter().enumerate().skip(k) {
                r[k][j] = col[k];
            }
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, stored in place of column k
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();

        r[k][k] = alpha;
        for j in k + 1..P {
            let dot: f64 = v.iter().zip(&a[j][k..]).map(|(vi, aj)| vi * aj).sum();
            let scale = 2.0 * dot / vnorm2;
            for (aj, vi) in a[j][k..].iter_mut().zip(&v) {
                *aj -= scale * vi;
            }
            r[k][j] = a[j][k];
        }
        let dot: f64 = v.iter().zip(&b[k..]).map(|(vi, bi)| vi * bi).sum();
        let scale = 2.0 * dot / vnorm2;
        for (bi, vi) in b[k..].iter_mut().zip(&v) {
            *bi -= scale * vi;
        }
        debug_assert!(n > k);
    }

    let mut qty = [0.0; P];
    qty.copy_from_slice(&b[..P]);
    Qr { r, qty }
}

fn check_rank(r: &[[f64; P]; P]) -> Result<()> {
    let largest = (0..P).map(|k| r[k][k].abs()).fold(0.0, f64::max);
    for k in 0..P {
        if !(r[k][k].abs() > RANK_TOLERANCE * largest) {
            return Err(Error::Singular { column: COLUMNS[k] });
        }
    }
    Ok(())
}

fn back_substitute(r: &[[f64; P]; P], rhs: &[f64; P]) -> [f64; P] {
    let mut x = [0.0; P];
    for i in (0..P).rev() {
        let tail: f64 = (i + 1..P).map(|j| r[i][j] * x[j]).sum();
        x[i] = (rhs[i] - tail) / r[i][i];
    }
    x
}

/// Inverse of an upper-triangular matrix.
fn invert_upper(r: &[[f64; P]; P]) -> [[f64; P]; P] {
    let mut inv = [[0.0; P]; P];
    for col in 0..P {
        let mut e = [0.0; P];
        e[col] = 1.0;
        let x = back_substitute(r, &e);
        for row in 0..P {
            inv[row][col] = x[row];
        }
    }
    inv
}

fn design_columns(dataset: &Dataset) -> [Vec<f64>; P] {
    let rows = dataset.rows();
    [vec![1.0; rows.len()], rows.iter().map(|r| r.inflation).collect(), rows.iter().map(|r| r.output_gap).collect()]
}

fn check_inputs(dataset: &Dataset, target: &[f64]) -> Result<()> {
    if target.len() != dataset.len() {
        return Err(Error::Shape(format!("target has {} values for {} rows", target.len(), dataset.len())));
    }
    if dataset.len() < P + 1 {
        return Err(Error::Domain(format!("OLS needs at least {} observations, got {}", P + 1, dataset.len())));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("target contains non-finite values".into()));
    }
    Ok(())
}

/// Regresses `target` on `[1, inflation, output_gap]` with classical
/// (homoskedastic) inference.
pub fn fit_ols(dataset: &Dataset, target: &[f64]) -> Result<RegressionResult> {
    check_inputs(dataset, target)?;
    let columns = design_columns(dataset);
    let n = target.len();

    let qr = householder_qr(&columns, target);
    check_rank(&qr.r)?;
    let beta = back_substitute(&qr.r, &qr.qty);

    let fitted: Vec<f64> = (0..n).map(|i| (0..P).map(|k| columns[k][i] * beta[k]).sum()).collect();
    let residuals: Vec<f64> = target.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = target.iter().sum::<f64>() / n as f64;
    let tss: f64 = target.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 0.0 };

    let df = (n - P) as f64;
    let sigma2 = rss / df;
    // (X'X)^-1 = R^-1 R^-T
    let r_inv = invert_upper(&qr.r);
    let t_dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");

    let coefficients = std::array::from_fn(|k| {
        let var: f64 = (0..P).map(|j| r_inv[k][j] * r_inv[k][j]).sum::<f64>() * sigma2;
        let std_error = var.sqrt();
        let t_stat = beta[k] / std_error;
        let p_value = if t_stat.is_nan() { f64::NAN } else { (2.0 * t_dist.sf(t_stat.abs())).min(1.0) };
        Coefficient { name: COLUMNS[k], estimate: beta[k], std_error, t_stat, p_value }
    });

    Ok(RegressionResult { coefficients, r_squared, n_obs: n, rss, fitted, residuals })
}

/// Coefficients from the normal equations `X'X b = X'y` via Cholesky.
///
/// Less stable than [`fit_ols`]; kept as an independent route for checks.
pub fn normal_equation_coefficients(dataset: &Dataset, target: &[f64]) -> Result<[f64; P]> {
    check_inputs(dataset, target)?;
    let columns = design_columns(dataset);
    let mut xtx = [[0.0; P]; P];
    let mut xty = [0.0; P];
    for i in 0..P {
        for j in 0..P {
            xtx[i][j] = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
        }
        xty[i] = columns[i].iter().zip(target).map(|(a, b)| a * b).sum();
    }

    // lower-triangular L with L L^T = X'X
    let mut l = [[0.0; P]; P];
    for i in 0..P {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = xtx[i][i] - s;
                if !(d > RANK_TOLERANCE * xtx[i][i].abs().max(f64::MIN_POSITIVE)) {
                    return Err(Error::Singular { column: COLUMNS[i] });
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (xtx[i][j] - s) / l[j][j];
            }
        }
    }
    let mut z = [0.0; P];
    for i in 0..P {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (xty[i] - s) / l[i][i];
    }
    let mut b = [0.0; P];
    for i in (0..P).rev() {
        let s: f64 = (i + 1..P).map(|k| l[k][i] * b[k]).sum();
        b[i] = (z[i] - s) / l[i][i];
    }
    Ok(b)
}

/// Structural Taylor-rule weights implied by a reduced-form fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralCoefficients {
    pub beta_1: f64,
    pub beta_pi: f64,
    pub beta_y: f64,
}

/// Solves `alpha = r* - beta_pi * pi*` and `theta_pi = beta_1 + beta_pi`.
pub fn recover_structural(
    alpha: f64,
    theta_pi: f64,
    beta_y: f64,
    targets: FixedTargets,
) -> Result<StructuralCoefficients> {
    if targets.pi_star == 0.0 {
        return Err(Error::Domain("pi* must be nonzero to recover beta_pi".into()));
    }
    let beta_pi = (targets.r_star - alpha) / targets.pi_star;
    Ok(StructuralCoefficients { beta_1: theta_pi - beta_pi, beta_pi, beta_y })
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Same recovery after rounding the estimates to two decimals first, which
/// is how published tables usually report it (0.95 -> 0.525, 1.23 -> 0.705).
pub fn recover_structural_rounded(fit: &RegressionResult, targets: FixedTargets) -> Result<StructuralCoefficients> {
    recover_structural(round2(fit.alpha()), round2(fit.theta_pi()), round2(fit.beta_y()), targets)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub sum: f64,
    pub abs_sum: f64,
    pub mse: f64,
}

pub fn residual_stats(residuals: &[f64]) -> Result<ResidualStats> {
    if residuals.is_empty() {
        return Err(Error::Empty("residuals"));
    }
    Ok(ResidualStats {
        sum: residuals.iter().sum(),
        abs_sum: residuals.iter().map(|e| e.abs()).sum(),
        mse: residuals.iter().map(|e| e * e).sum::<f64>() / residuals.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stars {
    /// p < 0.001
    Three,
    /// p < 0.01
    Two,
    /// p < 0.05
    One,
    None,
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stars::Three => "***",
            Stars::Two => "**",
            Stars::One => "*",
            Stars::None => "",
        })
    }
}

pub fn significance_stars(p_value: f64) -> Result<Stars> {
    if !(0.0..=1.0).contains(&p_value) {
        return Err(Error::Domain(format!("p-value {p_value} outside [0, 1]")));
    }
    Ok(if p_value < 0.001 {
        Stars::Three
    } else if p_value < 0.01 {
        Stars::Two
    } else if p_value < 0.05 {
        Stars::One
    } else {
        Stars::None
    })
}

/// Side-by-side coefficient table: estimate with stars, standard error in
/// parentheses, then observation count and R².
pub fn format_table(columns: &[(&str, &RegressionResult)]) -> String {
    const LABELS: [&str; P] = ["Intercept (alpha)", "Inflation (pi_t)", "Output gap (y - y*)"];
    let width = 22;
    let mut out = format!("{:<22}", "");
    for (title, _) in columns {
        out.push_str(&format!("{title:>width$}"));
    }
    out.push('\n');
    for (k, label) in LABELS.iter().enumerate() {
        out.push_str(&format!("{label:<22}"));
        for (_, fit) in columns {
            let c = &fit.coefficients[k];
            let stars = significance_stars(c.p_value).map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!("{:>width$}", format!("{}{stars}", sig6(c.estimate))));
        }
        out.push('\n');
        out.push_str(&format!("{:<22}", ""));
        for (_, fit) in columns {
            let c = &fit.coefficients[k];
            out.push_str(&format!("{:>width$}", format!("({})", sig6(c.std_error))));
        }
        out.push('\n');
    }
    out.push_str(&format!("{:<22}", "Obs."));
    for (_, fit) in columns {
        out.push_str(&format!("{:>width$}", fit.n_obs));
    }
    out.push('\n');
    out.push_str(&format!("{:<22}", "R^2"));
    for (_, fit) in columns {
        out.push_str(&format!("{:>width$}", sig6(fit.r_squared)));
    }
    out.push('\n');
    out
}
