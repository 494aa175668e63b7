//! Analytic gradients against central differences, and sampled certificates
//! for the smoothness and strong convexity constants.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sgd_floor::linalg::{self, extreme_eigs};
use sgd_floor::problem::FiniteSum;
use sgd_floor::{Problem, ProblemConstants};

const FD_STEP: f64 = 1e-5;

fn fd_component(p: &Problem, j: usize, theta: &[f64]) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let (mut a, mut b) = (theta.to_vec(), theta.to_vec());
            a[i] += FD_STEP;
            b[i] -= FD_STEP;
            (p.value_component(j, &a).unwrap() - p.value_component(j, &b).unwrap()) / (2.0 * FD_STEP)
        })
        .collect()
}

#[test]
fn component_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, p) in common::all_problems() {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let theta = common::random_point(&mut rng, p.dim(), 2.5);
            for j in 0..p.components() {
                let g = p.grad_component(j, &theta).unwrap();
                let fd = fd_component(&p, j, &theta);
                for (a, b) in g.iter().zip(&fd) {
                    worst = worst.max((a - b).abs() / a.abs().max(1.0));
                }
            }
        }
        assert!(worst <= 1e-6, "{name}: relative gradient error {worst:e}");
    }
}

#[test]
fn full_gradient_is_mean_of_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (name, p) in common::all_problems() {
        let theta = common::random_point(&mut rng, p.dim(), 2.0);
        let fd: Vec<f64> = (0..p.dim())
            .map(|i| {
                let (mut a, mut b) = (theta.clone(), theta.clone());
                a[i] += FD_STEP;
                b[i] -= FD_STEP;
                (p.value_full(&a).unwrap() - p.value_full(&b).unwrap()) / (2.0 * FD_STEP)
            })
            .collect();
        let g = p.grad_full(&theta);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn smoothness_and_convexity_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (name, p) in common::all_problems() {
        let c = ProblemConstants::derive(&p).unwrap();
        for _ in 0..1000 {
            let a = common::random_point(&mut rng, p.dim(), 3.0);
            let b = common::random_point(&mut rng, p.dim(), 3.0);
            let dist = linalg::dist_sq(&a, &b).sqrt();
            for j in 0..p.components() {
                let ga = p.grad_component(j, &a).unwrap();
                let gb = p.grad_component(j, &b).unwrap();
                let lip = linalg::dist_sq(&ga, &gb).sqrt();
                assert!(lip <= c.lambda_max_j[j] * dist * (1.0 + 1e-9) + 1e-12, "{name}: component {j}");
            }
            let (ga, gb) = (p.grad_full(&a), p.grad_full(&b));
            assert!(linalg::dist_sq(&ga, &gb).sqrt() <= c.lambda_max_0 * dist * (1.0 + 1e-9) + 1e-12, "{name}");
            if let Some(m) = c.lambda_min {
                let diff: Vec<f64> = ga.iter().zip(&gb).map(|(x, y)| x - y).collect();
                let step: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                let mono = linalg::dot(&diff, &step);
                assert!(mono >= m * dist * dist * (1.0 - 1e-9) - 1e-12, "{name}: monotonicity");
            }
        }
    }
}

#[test]
fn quartic_is_not_convex() {
    let p = Problem::quartic();
    let (a, b) = ([-0.3], [0.0]);
    let diff = p.grad_full(&a)[0] - p.grad_full(&b)[0];
    assert!(diff * (a[0] - b[0]) < 0.0);
}

#[test]
fn rayleigh_quotients_lie_in_the_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for p in [common::synthetic(20, 4, 1), common::synthetic(7, 3, 2), common::three_point()] {
        let Problem::LinearRegression(data) = &p else { unreachable!() };
        let c = ProblemConstants::derive(&p).unwrap();
        let mut h = data.gram();
        h.scale(1.0 / p.components() as f64);
        let (lo, hi) = extreme_eigs(&h).unwrap();
        assert!((hi - c.lambda_max_0).abs() < 1e-12 && (lo - c.lambda_min.unwrap()).abs() < 1e-12);
        for _ in 0..500 {
            let v = common::random_point(&mut rng, p.dim(), 1.0);
            let q = linalg::dot(&v, &h.mul_vec(&v)) / linalg::norm_sq(&v);
            assert!(q >= lo * (1.0 - 1e-12) && q <= hi * (1.0 + 1e-12));
        }
    }
}
