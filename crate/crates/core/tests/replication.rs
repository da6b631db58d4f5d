//! Regression results on the bundled quarterly panel, checked against values
//! computed independently with statsmodels OLS.

use std::path::Path;

use taylor_core::ols::{recover_structural, residual_stats, significance_stars, Stars};
use taylor_core::report::{build_series, Estimator};
use taylor_core::{fit_ols, Dataset, FixedTargets, Preset};

fn panel() -> Dataset {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/usmacro_panel.csv");
    Dataset::from_panel_csv(&std::fs::read_to_string(path).unwrap(), FixedTargets::default()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn panel_shape() {
    let ds = panel();
    assert_eq!(ds.len(), 222);
    assert_eq!(ds.first_date().unwrap().to_string(), "1955Q3");
    assert_eq!(ds.last_date().unwrap().to_string(), "2010Q4");
    for r in ds.rows() {
        assert!((r.inflation_gap + 2.0 - r.inflation).abs() <= 4.0 * f64::EPSILON * r.inflation.abs().max(2.0));
    }
}

#[test]
fn ols_matches_statsmodels() {
    let ds = panel();
    let fit = fit_ols(&ds, &ds.fedfunds()).unwrap();
    let est = [2.021557120382686, 0.9128936897086538, 0.10808552685228827];
    let se = [0.24613023977346637, 0.05112620672930813, 0.0532475156770023];
    let t = [8.213363470670199, 17.855689833240394, 2.0298698536084117];
    for k in 0..3 {
        let c = &fit.coefficients[k];
        assert!(close(c.estimate, est[k], 1e-10), "{k}: {}", c.estimate);
        assert!(close(c.std_error, se[k], 1e-10), "{k}: {}", c.std_error);
        assert!(close(c.t_stat, t[k], 1e-10), "{k}: {}", c.t_stat);
    }
    assert!(close(fit.coefficients[2].p_value, 4.357910875513629e-02, 1e-8));
    assert!(fit.coefficients[1].p_value < 1e-40);
    assert!(close(fit.r_squared, 0.5928633338580568, 1e-10));
    assert_eq!(fit.n_obs, 222);
    let stars: Vec<Stars> = fit.coefficients.iter().map(|c| significance_stars(c.p_value).unwrap()).collect();
    assert_eq!(stars, [Stars::Three, Stars::Three, Stars::One]);
}

#[test]
fn residual_sums_match_oracle() {
    let ds = panel();
    let fit = fit_ols(&ds, &ds.fedfunds()).unwrap();
    let ols = residual_stats(&fit.residuals).unwrap();
    assert!(close(ols.abs_sum, 361.34659461077297, 1e-10));
    assert!(close(ols.mse, 4.650202562254683, 1e-10));

    let taylor = build_series(&ds, Estimator::Rule(Preset::Taylor1993.params()), "taylor1993").unwrap();
    let stats = residual_stats(&taylor.errors()).unwrap();
    assert!(close(stats.abs_sum, 516.99835484, 1e-10));
    assert!(close(stats.sum, -225.44671762, 1e-10));
    assert!(close(stats.mse, 9.31448090939058, 1e-10));
    assert!(ols.abs_sum < stats.abs_sum);
}

#[test]
fn structural_weights_from_panel_fit() {
    let ds = panel();
    let fit = fit_ols(&ds, &ds.fedfunds()).unwrap();
    let s = recover_structural(fit.alpha(), fit.theta_pi(), fit.beta_y(), ds.targets()).unwrap();
    assert!(close(s.beta_pi, (2.0 - 2.021557120382686) / 2.0, 1e-9));
    assert!(close(s.beta_1 + s.beta_pi, 0.9128936897086538, 1e-10));
}
