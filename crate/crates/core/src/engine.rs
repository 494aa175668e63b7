//! Constant step-size SGD, `θ_{k+1} = θ_k − η ∇f_{γ_k}(θ_k)` with `γ_k`
//! uniform on the components, and estimators of `R_k = E|θ_k − θ†|²`.
//!
//! [`monte_carlo_error`] averages independent seeded trials. Trials are
//! grouped into fixed blocks; each block accumulates per-iteration moments
//! sequentially and blocks are merged in a fixed pairwise tree, so results
//! are bit-identical for any rayon pool size.
//!
//! Two exact oracles compute `R_k` without sampling: [`exact_error`]
//! enumerates every index path, and [`exact_error_quadratic`] propagates the
//! first and second moments of the error, which is exact for least squares.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DivergedTrial, Error, Result};
use crate::linalg::{self, SquareMatrix};
use crate::problem::{FiniteSum, LinearRegressionData, Problem};
use crate::rng;

/// Trials per aggregation block. Fixed so the reduction tree never depends on
/// the thread count.
const BLOCK_TRIALS: usize = 32;
/// Upper limit on `J^k` for path enumeration.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub eta: f64,
    /// Number of SGD steps `K`; series have `K + 1` entries.
    pub iterations: usize,
    pub trials: usize,
    pub theta0: Vec<f64>,
    pub seed: u64,
    /// Iterations at which every trial's parameter is recorded.
    #[serde(default)]
    pub snapshot_iters: Vec<usize>,
}

impl RunConfig {
    pub fn new(eta: f64, iterations: usize, trials: usize, theta0: Vec<f64>, seed: u64) -> Self {
        Self {
            eta,
            iterations,
            trials,
            theta0,
            seed,
            snapshot_iters: Vec::new(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Usage(format!("step size must be positive, got {}", self.eta)));
        }
        if self.iterations == 0 {
            return Err(Error::Usage("iteration count must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Usage("trial count must be at least 1".into()));
        }
        if self.theta0.len() != dim {
            return Err(Error::Usage(format!(
                "theta0 has {} entries, problem dimension is {dim}",
                self.theta0.len()
            )));
        }
        if self.theta0.iter().any(|t| !t.is_finite()) {
            return Err(Error::Usage("theta0 must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub problem: String,
    pub eta: f64,
    /// Number of Monte-Carlo trials; 0 for exact series.
    pub trials: usize,
    pub seed: Option<u64>,
    pub exact: bool,
    /// Set when a single trial makes the standard errors meaningless.
    #[serde(default)]
    pub single_trial_warning: bool,
}

/// Per-iteration estimate of `R_k`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub r_hat: Vec<f64>,
    pub std_err: Vec<f64>,
    pub meta: SeriesMeta,
}

impl ErrorSeries {
    pub fn exact(r: Vec<f64>, problem: impl Into<String>, eta: f64) -> Self {
        let n = r.len();
        Self {
            r_hat: r,
            std_err: vec![0.0; n],
            meta: SeriesMeta {
                problem: problem.into(),
                eta,
                trials: 0,
                seed: None,
                exact: true,
                single_trial_warning: false,
            },
        }
    }

    pub fn is_exact(&self) -> bool {
        self.meta.exact
    }

    pub fn len(&self) -> usize {
        self.r_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_hat.is_empty()
    }
}

/// Parameter of one trial at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSnapshot {
    pub trial: usize,
    pub k: usize,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRun {
    pub series: ErrorSeries,
    pub snapshots: Vec<ThetaSnapshot>,
}

/// One SGD step with component `j`.
pub fn sgd_step<P: FiniteSum + ?Sized>(problem: &P, theta: &[f64], eta: f64, j: usize) -> Result<Vec<f64>> {
    let g = problem.grad_component(j, theta)?;
    let next: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - eta * gi).collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { iteration: 1 });
    }
    Ok(next)
}

/// Variation `V = ∇f(θ) − ∇f_j(θ)` for component `j`.
pub fn variation<P: FiniteSum + ?Sized>(problem: &P, theta: &[f64], j: usize) -> Result<Vec<f64>> {
    let gj = problem.grad_component(j, theta)?;
    Ok(problem.grad_full(theta).iter().zip(&gj).map(|(a, b)| a - b).collect())
}

/// Runs one trial, calling `visit(k, θ_k)` for `k = 0..=K`. Returns the
/// iteration at which the iterate stopped being finite, if it did.
fn drive_trial<P, F>(problem: &P, config: &RunConfig, trial: usize, mut visit: F) -> std::result::Result<(), usize>
where
    P: FiniteSum + ?Sized,
    F: FnMut(usize, &[f64]),
{
    let mut rng = rng::trial_stream(config.seed, trial as u64);
    let n = problem.components();
    let mut theta = config.theta0.clone();
    let mut grad = vec![0.0; theta.len()];
    visit(0, &theta);
    for k in 1..=config.iterations {
        let j = rng::uniform_index(&mut rng, n);
        problem.grad_component_into(j, &theta, &mut grad);
        let mut finite = true;
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= config.eta * g;
            finite &= t.is_finite();
        }
        if !finite {
            return Err(k);
        }
        visit(k, &theta);
    }
    Ok(())
}

/// Squared distances `|θ_k − θ†|²`, `k = 0..=K`, for one seeded trial.
pub fn run_trial<P: FiniteSum + ?Sized>(
    problem: &P,
    optimum: &[f64],
    config: &RunConfig,
    trial: usize,
) -> Result<Vec<f64>> {
    config.validate(problem.dim())?;
    problem.check_dim(optimum)?;
    let mut out = Vec::with_capacity(config.iterations + 1);
    drive_trial(problem, config, trial, |_, theta| out.push(linalg::dist_sq(theta, optimum)))
        .map_err(|iteration| Error::Divergence(vec![DivergedTrial { trial, iteration }]))?;
    Ok(out)
}

/// Running per-iteration mean and sum of squared deviations.
#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(xs) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let (na, nb) = (a.count as f64, b.count as f64);
        let n = na + nb;
        let mut out = a;
        for i in 0..out.mean.len() {
            let delta = b.mean[i] - out.mean[i];
            out.mean[i] += delta * nb / n;
            out.m2[i] += b.m2[i] + delta * delta * na * nb / n;
        }
        out.count += b.count;
        out
    }
}

fn merge_tree(mut parts: Vec<Moments>) -> Moments {
    match parts.len() {
        0 => unreachable!("at least one block"),
        1 => parts.pop().unwrap(),
        n => {
            let right = parts.split_off(n / 2);
            Moments::merge(merge_tree(parts), merge_tree(right))
        }
    }
}

struct BlockResult {
    moments: Moments,
    snapshots: Vec<ThetaSnapshot>,
    diverged: Vec<DivergedTrial>,
}

/// Monte-Carlo estimate of `R_k` with standard errors `sd/√M`.
///
/// Runs on the current rayon pool; results do not depend on its size.
pub fn monte_carlo_error<P: FiniteSum + ?Sized>(
    problem: &P,
    optimum: &[f64],
    config: &RunConfig,
    label: &str,
) -> Result<MonteCarloRun> {
    config.validate(problem.dim())?;
    problem.check_dim(optimum)?;
    let len = config.iterations + 1;
    let mut snap_iters = config.snapshot_iters.clone();
    snap_iters.sort_unstable();
    snap_iters.dedup();
    if let Some(&k) = snap_iters.last() {
        if k > config.iterations {
            return Err(Error::Usage(format!("snapshot iteration {k} exceeds K = {}", config.iterations)));
        }
    }

    let blocks = config.trials.div_ceil(BLOCK_TRIALS);
    let results: Vec<BlockResult> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_TRIALS;
            let end = (start + BLOCK_TRIALS).min(config.trials);
            let mut moments = Moments::new(len);
            let mut snapshots = Vec::new();
            let mut diverged = Vec::new();
            let mut dist = vec![0.0; len];
            for trial in start..end {
                let mut next_snap = 0;
                let outcome = drive_trial(problem, config, trial, |k, theta| {
                    dist[k] = linalg::dist_sq(theta, optimum);
                    if next_snap < snap_iters.len() && snap_iters[next_snap] == k {
                        snapshots.push(ThetaSnapshot {
                            trial,
                            k,
                            theta: theta.to_vec(),
                        });
                        next_snap += 1;
                    }
                });
                match outcome {
                    Ok(()) => moments.push(&dist),
                    Err(iteration) => diverged.push(DivergedTrial { trial, iteration }),
                }
            }
            BlockResult {
                moments,
                snapshots,
                diverged,
            }
        })
        .collect();

    let diverged: Vec<DivergedTrial> = results.iter().flat_map(|r| r.diverged.iter().copied()).collect();
    if !diverged.is_empty() {
        return Err(Error::Divergence(diverged));
    }
    let mut snapshots = Vec::new();
    let mut parts = Vec::with_capacity(results.len());
    for r in results {
        snapshots.extend(r.snapshots);
        parts.push(r.moments);
    }
    let total = merge_tree(parts);
    let m = config.trials as f64;
    let std_err = if config.trials >= 2 {
        total.m2.iter().map(|s| (s / (m - 1.0)).max(0.0).sqrt() / m.sqrt()).collect()
    } else {
        vec![0.0; len]
    };
    Ok(MonteCarloRun {
        series: ErrorSeries {
            r_hat: total.mean,
            std_err,
            meta: SeriesMeta {
                problem: label.to_string(),
                eta: config.eta,
                trials: config.trials,
                seed: Some(config.seed),
                exact: false,
                single_trial_warning: config.trials < 2,
            },
        },
        snapshots,
    })
}

/// Exact `R_k`, `k = 0..=k_max`, by enumerating all `J^k` equally likely
/// index paths. Limited to `J^k_max ≤ 10⁷`.
pub fn exact_error<P: FiniteSum + ?Sized>(
    problem: &P,
    optimum: &[f64],
    eta: f64,
    theta0: &[f64],
    k_max: usize,
) -> Result<Vec<f64>> {
    problem.check_dim(theta0)?;
    problem.check_dim(optimum)?;
    if !(eta > 0.0) {
        return Err(Error::Usage("step size must be positive".into()));
    }
    let j = problem.components();
    let paths = (j as f64).powi(k_max as i32);
    if paths > ENUMERATION_LIMIT as f64 {
        return Err(Error::Usage(format!(
            "enumerating {j}^{k_max} paths exceeds the limit of {ENUMERATION_LIMIT}; \
             use the quadratic (second-moment) oracle instead"
        )));
    }
    let mut sums = vec![0.0; k_max + 1];
    let weight = 1.0 / j as f64;
    let mut scratch = vec![0.0; theta0.len()];
    walk_paths(problem, optimum, eta, theta0, 0, 1.0, weight, &mut sums, &mut scratch)?;
    Ok(sums)
}

#[allow(clippy::too_many_arguments)]
fn walk_paths<P: FiniteSum + ?Sized>(
    problem: &P,
    optimum: &[f64],
    eta: f64,
    theta: &[f64],
    depth: usize,
    prob: f64,
    weight: f64,
    sums: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    sums[depth] += prob * linalg::dist_sq(theta, optimum);
    if depth + 1 == sums.len() {
        return Ok(());
    }
    for j in 0..problem.components() {
        problem.grad_component_into(j, theta, scratch);
        let next: Vec<f64> = theta.iter().zip(scratch.iter()).map(|(t, g)| t - eta * g).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { iteration: depth + 1 });
        }
        walk_paths(problem, optimum, eta, &next, depth + 1, prob * weight, weight, sums, scratch)?;
    }
    Ok(())
}

/// Exact `R_k` for least squares by propagating the error mean `m_k` and
/// second moment `M_k`: with `A_j = x_j x_jᵀ`, `b_j = ∇f_j(θ†)` and
/// `P_j = I − ηA_j`, the error obeys `e' = P_j e − η b_j`, so
///
/// `m' = (1/J) Σ_j (P_j m − η b_j)` and
/// `M' = (1/J) Σ_j [P_j M P_j − η(P_j m b_jᵀ + b_j mᵀ P_j) + η² b_j b_jᵀ]`,
///
/// and `R_k = tr M_k`.
pub fn exact_error_quadratic(
    data: &LinearRegressionData,
    optimum: &[f64],
    eta: f64,
    theta0: &[f64],
    k_max: usize,
) -> Result<Vec<f64>> {
    data.check_dim(theta0)?;
    data.check_dim(optimum)?;
    if !(eta > 0.0) {
        return Err(Error::Usage("step size must be positive".into()));
    }
    let d = data.dim();
    let n = data.components();
    let inv_n = 1.0 / n as f64;
    let props: Vec<SquareMatrix> = data
        .features()
        .iter()
        .map(|x| {
            let mut p = SquareMatrix::identity(d);
            p.add_assign_scaled(&SquareMatrix::outer(x, x), -eta);
            p
        })
        .collect();
    let b: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut g = vec![0.0; d];
            data.grad_component_into(j, optimum, &mut g);
            g
        })
        .collect();
    let noise: Vec<SquareMatrix> = b.iter().map(|bj| SquareMatrix::outer(bj, bj)).collect();

    let mut m: Vec<f64> = theta0.iter().zip(optimum).map(|(t, o)| t - o).collect();
    let mut second = SquareMatrix::outer(&m, &m);
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(second.trace());
    for _ in 0..k_max {
        let mut next_m = vec![0.0; d];
        let mut next_second = SquareMatrix::zeros(d);
        for j in 0..n {
            let pm = props[j].mul_vec(&m);
            for (nm, (p, bj)) in next_m.iter_mut().zip(pm.iter().zip(&b[j])) {
                *nm += inv_n * (p - eta * bj);
            }
            let psp = props[j].mul(&second).mul(&props[j]);
            next_second.add_assign_scaled(&psp, inv_n);
            let cross = SquareMatrix::outer(&pm, &b[j]);
            let cross_t = SquareMatrix::outer(&b[j], &pm);
            next_second.add_assign_scaled(&cross, -eta * inv_n);
            next_second.add_assign_scaled(&cross_t, -eta * inv_n);
            next_second.add_assign_scaled(&noise[j], eta * eta * inv_n);
        }
        m = next_m;
        second = next_second;
        let r = second.trace();
        if !r.is_finite() {
            return Err(Error::NonFinite { iteration: out.len() });
        }
        out.push(r);
    }
    Ok(out)
}

/// [`exact_error_quadratic`] for a [`Problem`], rejecting non-quadratic families.
pub fn exact_error_quadratic_for(
    problem: &Problem,
    optimum: &[f64],
    eta: f64,
    theta0: &[f64],
    k_max: usize,
) -> Result<Vec<f64>> {
    match problem {
        Problem::LinearRegression(data) => exact_error_quadratic(data, optimum, eta, theta0, k_max),
        other => Err(Error::Usage(format!(
            "the second-moment oracle needs a linear regression problem, got {}",
            other.kind()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> LinearRegressionData {
        LinearRegressionData::scalar(&[1.0, 1.0], &[1.0, -1.0]).unwrap()
    }

    #[test]
    fn step_examples() {
        assert_eq!(sgd_step(&toy(), &[0.0], 0.1, 0).unwrap(), vec![0.1]);
        let single = LinearRegressionData::scalar(&[1.0], &[0.0]).unwrap();
        assert!((sgd_step(&single, &[1.0], 0.1, 0).unwrap()[0] - 0.9).abs() < 1e-15);
        // stationary component leaves θ unchanged
        assert_eq!(sgd_step(&toy(), &[1.0], 0.37, 0).unwrap(), vec![1.0]);
    }

    #[test]
    fn step_overflow_reports_non_finite() {
        let p = LinearRegressionData::scalar(&[1.0], &[0.0]).unwrap();
        assert!(matches!(sgd_step(&p, &[1e308], 1e10, 0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn single_component_trial_is_gradient_descent() {
        let p = LinearRegressionData::scalar(&[1.0], &[0.0]).unwrap();
        let cfg = RunConfig::new(0.1, 30, 1, vec![1.0], 3);
        let d = run_trial(&p, &[0.0], &cfg, 0).unwrap();
        for (k, v) in d.iter().enumerate() {
            assert!((v - 0.81f64.powi(k as i32)).abs() <= 1e-15);
        }
    }

    #[test]
    fn toy_first_step_distance_is_deterministic() {
        let cfg = RunConfig::new(0.1, 1, 1, vec![0.0], 0);
        for trial in 0..20 {
            let d = run_trial(&toy(), &[0.0], &cfg, trial).unwrap();
            assert!((d[1] - 0.01).abs() < 1e-17);
        }
    }

    #[test]
    fn enumeration_small_cases() {
        let r = exact_error(&toy(), &[0.0], 0.1, &[0.0], 2).unwrap();
        assert_eq!(r[0], 0.0);
        assert!((r[1] - 0.01).abs() < 1e-16);
        assert!((r[2] - 0.0181).abs() < 1e-16);
    }

    #[test]
    fn enumeration_guard() {
        let p = LinearRegressionData::scalar(&[1.0; 5], &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(exact_error(&p, &[2.0], 0.1, &[0.0], 12), Err(Error::Usage(_))));
    }

    #[test]
    fn quadratic_oracle_fixed_points() {
        let r = exact_error_quadratic(&toy(), &[0.0], 0.1, &[0.0], 2000).unwrap();
        assert!((r[2000] - 0.1 / 1.9).abs() < 1e-14);
        let three = LinearRegressionData::scalar(&[1.0, 1.0, 1.0], &[0.0, 0.0, 3.0]).unwrap();
        let r = exact_error_quadratic(&three, &[1.0], 0.1, &[0.0], 2000).unwrap();
        assert!((r[2000] - 0.2 / 1.9).abs() < 1e-14);
    }

    #[test]
    fn quadratic_oracle_rejects_other_families() {
        assert!(matches!(
            exact_error_quadratic_for(&Problem::quartic(), &[-1.0], 0.01, &[0.0], 3),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn single_trial_has_zero_std_err_and_warning() {
        let cfg = RunConfig::new(0.1, 10, 1, vec![0.0], 9);
        let run = monte_carlo_error(&toy(), &[0.0], &cfg, "toy").unwrap();
        assert!(run.series.std_err.iter().all(|&s| s == 0.0));
        assert!(run.series.meta.single_trial_warning);
    }

    #[test]
    fn divergence_lists_trials() {
        let cfg = RunConfig::new(5.0, 2000, 3, vec![1.0], 1);
        match monte_carlo_error(&toy(), &[0.0], &cfg, "toy") {
            Err(Error::Divergence(t)) => {
                assert_eq!(t.len(), 3);
                assert_eq!(t[0].trial, 0);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn snapshots_are_recorded_in_trial_order() {
        let mut cfg = RunConfig::new(0.1, 20, 40, vec![0.0], 4);
        cfg.snapshot_iters = vec![20, 5];
        let run = monte_carlo_error(&toy(), &[0.0], &cfg, "toy").unwrap();
        assert_eq!(run.snapshots.len(), 80);
        assert_eq!((run.snapshots[0].trial, run.snapshots[0].k), (0, 5));
        assert_eq!((run.snapshots[1].trial, run.snapshots[1].k), (0, 20));
        let d = run_trial(&toy(), &[0.0], &cfg, 7).unwrap();
        let s = run.snapshots.iter().find(|s| s.trial == 7 && s.k == 20).unwrap();
        assert_eq!(s.theta[0] * s.theta[0], d[20]);
    }

    #[test]
    fn mean_zero_variation() {
        let p = Problem::quartic();
        for i in 0..20 {
            let t = -2.5 + 0.25 * i as f64;
            let sum: f64 = (0..2).map(|j| variation(&p, &[t], j).unwrap()[0]).sum();
            assert!(sum.abs() <= 1e-12);
        }
    }
}
