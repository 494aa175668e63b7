#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgd_floor::problem::{
    generate_linreg_dataset, LinearRegressionData, LogisticRegressionData, SyntheticLinRegConfig,
};
use sgd_floor::Problem;

pub fn two_point() -> Problem {
    Problem::LinearRegression(LinearRegressionData::scalar(&[1.0, 1.0], &[1.0, -1.0]).unwrap())
}

pub fn three_point() -> Problem {
    Problem::LinearRegression(LinearRegressionData::scalar(&[1.0, 1.0, 1.0], &[0.0, 0.0, 3.0]).unwrap())
}

pub fn synthetic(samples: usize, d: usize, seed: u64) -> Problem {
    let cfg = SyntheticLinRegConfig {
        samples,
        d,
        theta_star: (0..d).map(|i| 0.5 - i as f64).collect(),
        noise_std: 0.3,
        seed,
    };
    Problem::LinearRegression(generate_linreg_dataset(&cfg).unwrap())
}

pub fn logistic(samples: usize, d: usize, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = (0..samples)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect())
        .collect();
    let labels = (0..samples).map(|j| (j % 2) as f64).collect();
    Problem::LogisticRegression(LogisticRegressionData::new(features, labels).unwrap())
}

/// Every built-in family, with a label.
pub fn all_problems() -> Vec<(&'static str, Problem)> {
    vec![
        ("two_point", two_point()),
        ("three_point", three_point()),
        ("synthetic", synthetic(12, 3, 4)),
        ("logistic", logistic(10, 2, 9)),
        ("quartic", Problem::quartic()),
    ]
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-scale..scale)).collect()
}
