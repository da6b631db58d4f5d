//! Seeded synthetic panels for tests, demos, and the model-check command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, FixedTargets, Observation, Quarter};

/// A full-rank quarterly panel starting in 1960Q1.
///
/// Inflation and the output gap follow smooth cycles plus noise; the fed funds
/// rate is a saturating function of both with noise, so it is neither exactly
/// linear nor exactly fittable.
pub fn synthetic_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = FixedTargets::default();
    let mut date = Quarter::new(1960, 1).expect("valid quarter");
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64;
        let inflation = 3.5 + 2.5 * (t / 17.0).sin() + 0.8 * (t / 5.3).cos() + rng.random_range(-0.5..0.5);
        let output_gap = 2.0 * (t / 11.0).sin() - 0.6 * (t / 3.1).cos() + rng.random_range(-0.4..0.4);
        let fedfunds = 1.0
            + 8.0 / (1.0 + (-(inflation - 4.0) / 1.5).exp())
            + 0.4 * output_gap
            + 0.3 * (output_gap * inflation / 6.0).tanh()
            + rng.random_range(-0.3..0.3);
        rows.push(Observation { date, fedfunds, inflation, inflation_gap: inflation - targets.pi_star, output_gap });
        date = date.succ();
    }
    Dataset::from_rows(targets, rows).expect("dates increase")
}
