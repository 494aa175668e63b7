//! Finite-sum objectives `f(θ) = (1/J) Σ_j f_j(θ)` and the three built-in
//! families: least squares, L2-regularized logistic regression and a
//! piecewise quartic on the real line.
//!
//! Component indices are zero-based throughout (`0..J`).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SquareMatrix};
use crate::rng;

/// Gradient tolerance for a point to count as the optimum.
pub const OPTIMUM_TOL: f64 = 1e-8;
const LOGISTIC_TOL: f64 = 1e-10;
const LOGISTIC_MAX_ITERS: usize = 200_000;
const RANK_TOL: f64 = 1e-12;

pub trait FiniteSum: Sync {
    /// Number of components `J`.
    fn components(&self) -> usize;

    /// Parameter dimension `d`.
    fn dim(&self) -> usize;

    /// Writes `∇f_j(θ)` into `out`. `j < J` and matching lengths are the
    /// caller's responsibility; use [`FiniteSum::grad_component`] for a checked call.
    fn grad_component_into(&self, j: usize, theta: &[f64], out: &mut [f64]);

    /// `f_j(θ)`, when the family has a closed-form value.
    fn value_component(&self, _j: usize, _theta: &[f64]) -> Option<f64> {
        None
    }

    fn grad_component(&self, j: usize, theta: &[f64]) -> Result<Vec<f64>> {
        if j >= self.components() {
            return Err(Error::Usage(format!(
                "component index {j} out of range 0..{}",
                self.components()
            )));
        }
        self.check_dim(theta)?;
        let mut out = vec![0.0; self.dim()];
        self.grad_component_into(j, theta, &mut out);
        Ok(out)
    }

    /// `∇f(θ)`, the mean of the component gradients.
    fn grad_full(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut acc = vec![0.0; d];
        let mut g = vec![0.0; d];
        for j in 0..self.components() {
            self.grad_component_into(j, theta, &mut g);
            acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        let inv = 1.0 / self.components() as f64;
        acc.iter_mut().for_each(|a| *a *= inv);
        acc
    }

    fn value_full(&self, theta: &[f64]) -> Option<f64> {
        let mut s = 0.0;
        for j in 0..self.components() {
            s += self.value_component(j, theta)?;
        }
        Some(s / self.components() as f64)
    }

    fn check_dim(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::Usage(format!(
                "parameter has dimension {}, problem expects {}",
                theta.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

fn validate_features(features: &[Vec<f64>], targets: usize) -> Result<usize> {
    let j = features.len();
    if j == 0 {
        return Err(Error::Usage("at least one sample is required".into()));
    }
    if targets != j {
        return Err(Error::Usage(format!("{j} feature columns but {targets} targets")));
    }
    let d = features[0].len();
    if d == 0 {
        return Err(Error::Usage("feature dimension must be positive".into()));
    }
    if features.iter().any(|x| x.len() != d) {
        return Err(Error::Usage("feature columns have unequal lengths".into()));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Usage("features must be finite".into()));
    }
    Ok(d)
}

/// Transposes a row-major `d × J` design (one row per coordinate) into one
/// feature vector per sample.
pub fn columns_from_rows(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::Usage("design matrix has no rows".into()));
    }
    let j = rows[0].len();
    if rows.iter().any(|r| r.len() != j) {
        return Err(Error::Usage("design matrix rows have unequal lengths".into()));
    }
    Ok((0..j).map(|c| rows.iter().map(|r| r[c]).collect()).collect())
}

/// Least squares with `f_j(θ) = ½(x_jᵀθ − y_j)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRegressionData {
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl LinearRegressionData {
    /// `features[j]` is the column `x_j` of the `d × J` design.
    pub fn new(features: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        validate_features(&features, targets.len())?;
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::Usage("targets must be finite".into()));
        }
        Ok(Self { features, targets })
    }

    /// One-dimensional problem with scalar features.
    pub fn scalar(x: &[f64], y: &[f64]) -> Result<Self> {
        Self::new(x.iter().map(|&v| vec![v]).collect(), y.to_vec())
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// `X Xᵀ = Σ_j x_j x_jᵀ`.
    pub fn gram(&self) -> SquareMatrix {
        let d = self.features[0].len();
        let mut g = SquareMatrix::zeros(d);
        for x in &self.features {
            for a in 0..d {
                for b in 0..d {
                    g[(a, b)] += x[a] * x[b];
                }
            }
        }
        g
    }

    /// Ordinary least squares solution `(XXᵀ)⁻¹ X y`.
    pub fn least_squares(&self) -> Result<Vec<f64>> {
        let gram = self.gram();
        let (lo, hi) = linalg::extreme_eigs(&gram)?;
        if !(lo > RANK_TOL * hi) {
            return Err(Error::Invariant(format!(
                "design is rank deficient: eigenvalues of XXᵀ span [{lo:e}, {hi:e}]"
            )));
        }
        let d = gram.dim();
        let mut rhs = vec![0.0; d];
        for (x, y) in self.features.iter().zip(&self.targets) {
            rhs.iter_mut().zip(x).for_each(|(r, xi)| *r += xi * y);
        }
        let mut theta = gram.solve(&rhs)?;
        // one step of iterative refinement
        let applied = gram.mul_vec(&theta);
        let resid: Vec<f64> = rhs.iter().zip(&applied).map(|(a, b)| a - b).collect();
        let corr = gram.solve(&resid)?;
        theta.iter_mut().zip(&corr).for_each(|(t, c)| *t += c);
        Ok(theta)
    }
}

impl FiniteSum for LinearRegressionData {
    fn components(&self) -> usize {
        self.features.len()
    }

    fn dim(&self) -> usize {
        self.features[0].len()
    }

    fn grad_component_into(&self, j: usize, theta: &[f64], out: &mut [f64]) {
        let x = &self.features[j];
        let r = linalg::dot(x, theta) - self.targets[j];
        out.iter_mut().zip(x).for_each(|(o, xi)| *o = xi * r);
    }

    fn value_component(&self, j: usize, theta: &[f64]) -> Option<f64> {
        let r = linalg::dot(&self.features[j], theta) - self.targets[j];
        Some(0.5 * r * r)
    }
}

/// Logistic regression with unit L2 weight:
/// `f_j(θ) = −y_j log S(θᵀx_j) − (1−y_j) log(1 − S(θᵀx_j)) + |θ|²/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegressionData {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticRegressionData {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        validate_features(&features, labels.len())?;
        if let Some(bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::Usage(format!("labels must be 0 or 1, found {bad}")));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Full-gradient descent with step `1/λ_max,0` down to `|∇f| ≤ 1e-10`.
    pub fn minimize(&self) -> Result<Vec<f64>> {
        let smooth = 1.0
            + self.features.iter().map(|x| linalg::norm_sq(x)).sum::<f64>()
                / self.features.len() as f64;
        let step = 1.0 / smooth;
        let mut theta = vec![0.0; self.dim()];
        let mut residual = f64::INFINITY;
        for _ in 0..LOGISTIC_MAX_ITERS {
            let g = self.grad_full(&theta);
            residual = linalg::norm(&g);
            if residual <= LOGISTIC_TOL {
                return Ok(theta);
            }
            theta.iter_mut().zip(&g).for_each(|(t, gi)| *t -= step * gi);
        }
        Err(Error::Convergence {
            solver: "logistic gradient descent",
            iterations: LOGISTIC_MAX_ITERS,
            residual,
        })
    }
}

impl FiniteSum for LogisticRegressionData {
    fn components(&self) -> usize {
        self.features.len()
    }

    fn dim(&self) -> usize {
        self.features[0].len()
    }

    fn grad_component_into(&self, j: usize, theta: &[f64], out: &mut [f64]) {
        let x = &self.features[j];
        let s = sigmoid(linalg::dot(theta, x)) - self.labels[j];
        for ((o, xi), t) in out.iter_mut().zip(x).zip(theta) {
            *o = s * xi + t;
        }
    }

    fn value_component(&self, j: usize, theta: &[f64]) -> Option<f64> {
        let z = linalg::dot(theta, &self.features[j]);
        Some(softplus(z) - self.labels[j] * z + 0.5 * linalg::norm_sq(theta))
    }
}

/// A quartic polynomial on `[lo, hi]`, continued linearly outside so that the
/// value and first derivative are continuous everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseQuartic {
    /// Coefficients of `1, θ, θ², θ³, θ⁴`.
    pub coeffs: [f64; 5],
    pub lo: f64,
    pub hi: f64,
    /// Value and slope at `lo`.
    pub left: (f64, f64),
    /// Value and slope at `hi`.
    pub right: (f64, f64),
}

impl PiecewiseQuartic {
    pub fn new(coeffs: [f64; 5], lo: f64, hi: f64) -> Self {
        let left = (poly_value(&coeffs, lo), poly_slope(&coeffs, lo));
        let right = (poly_value(&coeffs, hi), poly_slope(&coeffs, hi));
        Self {
            coeffs,
            lo,
            hi,
            left,
            right,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t < self.lo {
            self.left.0 + self.left.1 * (t - self.lo)
        } else if t > self.hi {
            self.right.0 + self.right.1 * (t - self.hi)
        } else {
            poly_value(&self.coeffs, t)
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t < self.lo {
            self.left.1
        } else if t > self.hi {
            self.right.1
        } else {
            poly_slope(&self.coeffs, t)
        }
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        if t < self.lo || t > self.hi {
            0.0
        } else {
            poly_curvature(&self.coeffs, t)
        }
    }

    /// `sup_θ |f″(θ)|`: the second derivative is a quadratic on the core
    /// interval and zero outside, so the extremes sit at the endpoints or the
    /// vertex.
    pub fn max_abs_curvature(&self) -> f64 {
        let c = &self.coeffs;
        let mut candidates = vec![self.lo, self.hi];
        // f″ = 2c2 + 6c3 θ + 12c4 θ²
        if c[4] != 0.0 {
            let vertex = -6.0 * c[3] / (24.0 * c[4]);
            if vertex > self.lo && vertex < self.hi {
                candidates.push(vertex);
            }
        }
        candidates
            .into_iter()
            .map(|t| poly_curvature(c, t).abs())
            .fold(0.0, f64::max)
    }

    /// Largest value/slope mismatch between the polynomial and its linear
    /// extensions at the junctions.
    pub fn junction_residual(&self) -> f64 {
        let c = &self.coeffs;
        [
            (poly_value(c, self.lo) - self.left.0).abs(),
            (poly_slope(c, self.lo) - self.left.1).abs(),
            (poly_value(c, self.hi) - self.right.0).abs(),
            (poly_slope(c, self.hi) - self.right.1).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn poly_value(c: &[f64; 5], t: f64) -> f64 {
    (((c[4] * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0]
}

fn poly_slope(c: &[f64; 5], t: f64) -> f64 {
    ((4.0 * c[4] * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1]
}

fn poly_curvature(c: &[f64; 5], t: f64) -> f64 {
    (12.0 * c[4] * t + 6.0 * c[3]) * t + 2.0 * c[2]
}

/// Two-component non-convex objective: `f(θ) = θ⁴ + ⅔θ³ − θ²` on `[−2, 2]`,
/// `f_1 = f + θ`, `f_2 = f − θ`, all continued linearly outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQuarticSpec {
    pub objective: PiecewiseQuartic,
    pub components: [PiecewiseQuartic; 2],
}

/// Global minimizer of the quartic objective.
pub const QUARTIC_GLOBAL_MIN: f64 = -1.0;
/// The other local minimizer, where SGD started on the right gets trapped.
pub const QUARTIC_LOCAL_MIN: f64 = 0.5;

pub fn build_quartic() -> PiecewiseQuarticSpec {
    let base = [0.0, 0.0, -1.0, 2.0 / 3.0, 1.0];
    let shifted = |s: f64| {
        let mut c = base;
        c[1] += s;
        PiecewiseQuartic::new(c, -2.0, 2.0)
    };
    PiecewiseQuarticSpec {
        objective: PiecewiseQuartic::new(base, -2.0, 2.0),
        components: [shifted(1.0), shifted(-1.0)],
    }
}

impl FiniteSum for PiecewiseQuarticSpec {
    fn components(&self) -> usize {
        2
    }

    fn dim(&self) -> usize {
        1
    }

    fn grad_component_into(&self, j: usize, theta: &[f64], out: &mut [f64]) {
        out[0] = self.components[j].derivative(theta[0]);
    }

    fn value_component(&self, j: usize, theta: &[f64]) -> Option<f64> {
        Some(self.components[j].value(theta[0]))
    }
}

/// One of the built-in families.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    LinearRegression(LinearRegressionData),
    LogisticRegression(LogisticRegressionData),
    Quartic(Box<PiecewiseQuarticSpec>),
}

impl Problem {
    pub fn quartic() -> Self {
        Problem::Quartic(Box::new(build_quartic()))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Problem::LinearRegression(_) => "linear_regression",
            Problem::LogisticRegression(_) => "logistic_regression",
            Problem::Quartic(_) => "quartic",
        }
    }

    fn inner(&self) -> &dyn FiniteSum {
        match self {
            Problem::LinearRegression(p) => p,
            Problem::LogisticRegression(p) => p,
            Problem::Quartic(p) => p.as_ref(),
        }
    }

    /// Closed-form optimum, when the family has one without solving.
    pub fn analytic_optimum(&self) -> Option<Vec<f64>> {
        match self {
            Problem::Quartic(_) => Some(vec![QUARTIC_GLOBAL_MIN]),
            _ => None,
        }
    }

    /// `θ†`: least squares by a direct solve, logistic by full-gradient
    /// descent, quartic from the stored global minimizer.
    pub fn solve_optimum(&self) -> Result<Vec<f64>> {
        match self {
            Problem::LinearRegression(p) => p.least_squares(),
            Problem::LogisticRegression(p) => p.minimize(),
            Problem::Quartic(_) => Ok(vec![QUARTIC_GLOBAL_MIN]),
        }
    }
}

impl FiniteSum for Problem {
    fn components(&self) -> usize {
        self.inner().components()
    }

    fn dim(&self) -> usize {
        self.inner().dim()
    }

    #[inline]
    fn grad_component_into(&self, j: usize, theta: &[f64], out: &mut [f64]) {
        match self {
            Problem::LinearRegression(p) => p.grad_component_into(j, theta, out),
            Problem::LogisticRegression(p) => p.grad_component_into(j, theta, out),
            Problem::Quartic(p) => p.grad_component_into(j, theta, out),
        }
    }

    fn value_component(&self, j: usize, theta: &[f64]) -> Option<f64> {
        self.inner().value_component(j, theta)
    }
}

/// Recipe for a synthetic regression set: unit-norm Gaussian directions,
/// targets `θ*ᵀx_j + ε_j` with Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLinRegConfig {
    #[serde(rename = "J")]
    pub samples: usize,
    pub d: usize,
    /// Generating parameter θ* (not the least-squares solution θ†).
    pub theta_star: Vec<f64>,
    pub noise_std: f64,
    pub seed: u64,
}

pub fn generate_linreg_dataset(config: &SyntheticLinRegConfig) -> Result<LinearRegressionData> {
    if config.d == 0 || config.samples == 0 {
        return Err(Error::Usage("J and d must be positive".into()));
    }
    if config.theta_star.len() != config.d {
        return Err(Error::Usage(format!(
            "theta_star has {} entries, d = {}",
            config.theta_star.len(),
            config.d
        )));
    }
    if !(config.noise_std >= 0.0) || !config.noise_std.is_finite() {
        return Err(Error::Usage("noise_std must be finite and >= 0".into()));
    }
    let mut rng = rng::data_stream(config.seed);
    let mut features = Vec::with_capacity(config.samples);
    let mut targets = Vec::with_capacity(config.samples);
    for _ in 0..config.samples {
        let x = loop {
            let v: Vec<f64> = (0..config.d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let n = linalg::norm(&v);
            if n > 0.0 {
                break v.into_iter().map(|c| c / n).collect::<Vec<f64>>();
            }
        };
        let eps = config.noise_std * rng.sample::<f64, _>(StandardNormal);
        targets.push(linalg::dot(&config.theta_star, &x) + eps);
        features.push(x);
    }
    LinearRegressionData::new(features, targets)
}

/// On-disk problem description. Design matrices are written row-major as
/// `d` rows of `J` entries (one column per sample).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    LinearRegression {
        #[serde(rename = "X")]
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
    },
    LogisticRegression {
        #[serde(rename = "X")]
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
    },
    Quartic {},
    SyntheticLinreg(SyntheticLinRegConfig),
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<Problem> {
        Ok(match self {
            ProblemSpec::LinearRegression { x, y } => {
                Problem::LinearRegression(LinearRegressionData::new(columns_from_rows(x)?, y.clone())?)
            }
            ProblemSpec::LogisticRegression { x, y } => Problem::LogisticRegression(
                LogisticRegressionData::new(columns_from_rows(x)?, y.clone())?,
            ),
            ProblemSpec::Quartic {} => Problem::quartic(),
            ProblemSpec::SyntheticLinreg(cfg) => {
                Problem::LinearRegression(generate_linreg_dataset(cfg)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> LinearRegressionData {
        LinearRegressionData::scalar(&[1.0, 1.0], &[1.0, -1.0]).unwrap()
    }

    fn three_point() -> LinearRegressionData {
        LinearRegressionData::scalar(&[1.0, 1.0, 1.0], &[0.0, 0.0, 3.0]).unwrap()
    }

    fn central_diff(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    #[test]
    fn linreg_component_gradient() {
        let p = three_point();
        let g = p.grad_component(2, &[1.0]).unwrap();
        assert_eq!(g, vec![-2.0]);
        let fd = central_diff(|t| p.value_component(2, &[t]).unwrap(), 1.0, 1e-5);
        assert!((fd + 2.0).abs() < 1e-8);
    }

    #[test]
    fn quartic_component_gradient_at_global_min() {
        let q = build_quartic();
        assert_eq!(q.grad_component(0, &[-1.0]).unwrap(), vec![1.0]);
        assert_eq!(q.grad_component(1, &[-1.0]).unwrap(), vec![-1.0]);
        assert_eq!(q.grad_full(&[-1.0]), vec![0.0]);
    }

    #[test]
    fn logistic_zero_feature_gradient_is_theta() {
        let p = LogisticRegressionData::new(vec![vec![0.0, 0.0]], vec![0.0]).unwrap();
        assert_eq!(p.grad_component(0, &[0.3, -2.0]).unwrap(), vec![0.3, -2.0]);
    }

    #[test]
    fn index_out_of_range_is_usage_error() {
        assert!(matches!(toy().grad_component(2, &[0.0]), Err(Error::Usage(_))));
        assert!(matches!(toy().grad_component(0, &[0.0, 1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn full_gradient_of_symmetric_toy_vanishes_at_zero() {
        assert_eq!(toy().grad_full(&[0.0]), vec![0.0]);
        let single = LinearRegressionData::scalar(&[2.0], &[1.0]).unwrap();
        assert_eq!(single.grad_full(&[0.7]), single.grad_component(0, &[0.7]).unwrap());
    }

    #[test]
    fn least_squares_three_point() {
        let theta = three_point().least_squares().unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-15);
        // brute-force grid cross-check
        let p = three_point();
        let best = (0..=4000)
            .map(|i| -1.0 + i as f64 * 1e-3)
            .min_by(|a, b| {
                p.value_full(&[*a]).unwrap().total_cmp(&p.value_full(&[*b]).unwrap())
            })
            .unwrap();
        assert!((best - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_design_rejected() {
        let p = LinearRegressionData::new(vec![vec![1.0, 1.0], vec![2.0, 2.0]], vec![0.0, 1.0])
            .unwrap();
        assert!(matches!(p.least_squares(), Err(Error::Invariant(_))));
    }

    #[test]
    fn logistic_optimum_is_stationary() {
        let p = LogisticRegressionData::new(
            vec![vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.8, -1.1]],
            vec![1.0, 0.0, 1.0],
        )
        .unwrap();
        let theta = p.minimize().unwrap();
        assert!(linalg::norm(&p.grad_full(&theta)) <= 1e-10);
    }

    #[test]
    fn logistic_rejects_non_binary_labels() {
        assert!(LogisticRegressionData::new(vec![vec![1.0]], vec![0.5]).is_err());
    }

    #[test]
    fn quartic_junctions() {
        let q = build_quartic();
        let f = &q.objective;
        assert!((f.value(2.0) - 52.0 / 3.0).abs() < 1e-12);
        assert!((f.derivative(2.0) - 36.0).abs() < 1e-12);
        assert!((f.value(-2.0) - 20.0 / 3.0).abs() < 1e-12);
        assert!((f.derivative(-2.0) + 20.0).abs() < 1e-12);
        // slopes from each side by one-sided differences
        let h = 1e-6;
        assert!(((f.value(2.0 + h) - f.value(2.0)) / h - 36.0).abs() < 1e-6);
        assert!(((f.value(2.0) - f.value(2.0 - h)) / h - 36.0).abs() < 1e-3);
        assert!(((f.value(-2.0) - f.value(-2.0 - h)) / h + 20.0).abs() < 1e-6);
        for piece in std::iter::once(f).chain(q.components.iter()) {
            assert!(piece.junction_residual() <= 1e-12);
            for t in [-2.0, 2.0] {
                let below = piece.value(t - 1e-9);
                let above = piece.value(t + 1e-9);
                assert!((below - above).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn quartic_components_average_to_objective() {
        let q = build_quartic();
        for i in 0..=600 {
            let t = -3.0 + i as f64 * 0.01;
            let mean = 0.5 * (q.components[0].value(t) + q.components[1].value(t));
            assert!((mean - q.objective.value(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn quartic_curvature_sup() {
        assert_eq!(build_quartic().objective.max_abs_curvature(), 54.0);
    }

    #[test]
    fn synthetic_dataset_is_unit_norm_and_seeded() {
        let cfg = SyntheticLinRegConfig {
            samples: 30,
            d: 2,
            theta_star: vec![-1.27, -0.49],
            noise_std: 0.1,
            seed: 5,
        };
        let a = generate_linreg_dataset(&cfg).unwrap();
        let b = generate_linreg_dataset(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.features().len(), 30);
        for x in a.features() {
            assert!((linalg::norm(x) - 1.0).abs() < 1e-12);
        }
        let other = generate_linreg_dataset(&SyntheticLinRegConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn spec_parsing() {
        let spec = ProblemSpec::from_json(r#"{"type":"linear_regression","X":[[1,1]],"y":[1,-1]}"#)
            .unwrap();
        assert_eq!(spec.build().unwrap(), Problem::LinearRegression(toy()));
        let q = ProblemSpec::from_json(r#"{"type":"quartic"}"#).unwrap();
        assert_eq!(q.build().unwrap(), Problem::quartic());
        let s = ProblemSpec::from_json(
            r#"{"type":"synthetic_linreg","J":4,"d":2,"theta_star":[1,0],"noise_std":0,"seed":1}"#,
        )
        .unwrap();
        assert_eq!(s.build().unwrap().components(), 4);
        assert!(ProblemSpec::from_json(r#"{"type":"cubic"}"#).is_err());
        assert!(ProblemSpec::from_json("{not json").is_err());
    }
}
