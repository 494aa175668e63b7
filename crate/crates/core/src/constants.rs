//! Problem-level constants: component and global smoothness, strong
//! convexity, the gradient noise level `D0` at the optimum, and `Λ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, extreme_eigs};
use crate::problem::{FiniteSum, Problem, OPTIMUM_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Lipschitz constant of `∇f`.
    #[serde(rename = "lambda_max_0")]
    pub lambda_max_0: f64,
    /// Lipschitz constants of each `∇f_j`.
    #[serde(rename = "lambda_max_j")]
    pub lambda_max_j: Vec<f64>,
    /// Root-mean-square of `lambda_max_j`.
    #[serde(rename = "Lambda")]
    pub lambda_rms: f64,
    /// Strong convexity modulus; `None` for non-convex objectives.
    pub lambda_min: Option<f64>,
    /// Root-mean-square norm of the component gradients at the optimum.
    #[serde(rename = "D0")]
    pub d0: f64,
    pub theta_dagger: Vec<f64>,
}

impl ProblemConstants {
    /// Derives every constant of a built-in problem, solving for `θ†` first.
    pub fn derive(problem: &Problem) -> Result<Self> {
        let theta_dagger = problem.solve_optimum()?;
        Self::derive_at(problem, theta_dagger)
    }

    pub fn derive_at(problem: &Problem, theta_dagger: Vec<f64>) -> Result<Self> {
        let lambda_max_j = component_smoothness(problem)?;
        let lambda_max_0 = global_smoothness(problem)?;
        let lambda_min = strong_convexity(problem)?;
        let d0 = compute_d0(problem, &theta_dagger)?;
        Ok(Self {
            lambda_max_0,
            lambda_rms: rms(&lambda_max_j),
            lambda_max_j,
            lambda_min,
            d0,
            theta_dagger,
        })
    }

    /// Constants supplied directly (for objectives outside the built-in
    /// families). `Λ` is computed from `lambda_max_j`.
    pub fn from_parts(
        lambda_max_0: f64,
        lambda_max_j: Vec<f64>,
        lambda_min: Option<f64>,
        d0: f64,
        theta_dagger: Vec<f64>,
    ) -> Result<Self> {
        let c = Self {
            lambda_max_0,
            lambda_rms: rms(&lambda_max_j),
            lambda_max_j,
            lambda_min,
            d0,
            theta_dagger,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_max_0 > 0.0 && self.lambda_max_0.is_finite()) {
            return Err(Error::Invariant("lambda_max_0 must be positive and finite".into()));
        }
        if self.lambda_max_j.is_empty() || self.lambda_max_j.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Invariant("lambda_max_j must be nonempty and positive".into()));
        }
        if !(self.d0 >= 0.0 && self.d0.is_finite()) {
            return Err(Error::Invariant("D0 must be finite and >= 0".into()));
        }
        if let Some(m) = self.lambda_min {
            if !(m > 0.0) || m > self.lambda_max_0 {
                return Err(Error::Invariant(format!(
                    "lambda_min = {m} must lie in (0, lambda_max_0 = {}]",
                    self.lambda_max_0
                )));
            }
        }
        Ok(())
    }
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// `λ_max,j` for every component.
pub fn component_smoothness(problem: &Problem) -> Result<Vec<f64>> {
    Ok(match problem {
        Problem::LinearRegression(p) => p.features().iter().map(|x| linalg::norm_sq(x)).collect(),
        Problem::LogisticRegression(p) => {
            p.features().iter().map(|x| linalg::norm_sq(x) + 1.0).collect()
        }
        Problem::Quartic(q) => q.components.iter().map(|c| c.max_abs_curvature()).collect(),
    })
}

/// `λ_max,0`, the Lipschitz constant of the full gradient.
pub fn global_smoothness(problem: &Problem) -> Result<f64> {
    Ok(match problem {
        Problem::LinearRegression(p) => {
            extreme_eigs(&p.gram())?.1 / p.components() as f64
        }
        Problem::LogisticRegression(p) => {
            1.0 + p.features().iter().map(|x| linalg::norm_sq(x)).sum::<f64>()
                / p.components() as f64
        }
        Problem::Quartic(q) => q.objective.max_abs_curvature(),
    })
}

/// `λ_min`, or `None` when the objective is not strongly convex.
pub fn strong_convexity(problem: &Problem) -> Result<Option<f64>> {
    Ok(match problem {
        Problem::LinearRegression(p) => Some(extreme_eigs(&p.gram())?.0 / p.components() as f64),
        Problem::LogisticRegression(_) => Some(1.0),
        Problem::Quartic(_) => None,
    })
}

/// `D0 = ((1/J) Σ_j |∇f_j(θ†)|²)^{1/2}`. Refuses a `θ†` whose full gradient
/// exceeds 1e-8.
pub fn compute_d0<P: FiniteSum + ?Sized>(problem: &P, theta_dagger: &[f64]) -> Result<f64> {
    problem.check_dim(theta_dagger)?;
    let full = linalg::norm(&problem.grad_full(theta_dagger));
    if !(full <= OPTIMUM_TOL) {
        return Err(Error::StaleOptimum { norm: full });
    }
    let mut g = vec![0.0; problem.dim()];
    let mut total = 0.0;
    for j in 0..problem.components() {
        problem.grad_component_into(j, theta_dagger, &mut g);
        total += linalg::norm_sq(&g);
    }
    Ok((total / problem.components() as f64).sqrt())
}
