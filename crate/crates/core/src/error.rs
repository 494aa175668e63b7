use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A trial that produced a non-finite iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivergedTrial {
    pub trial: usize,
    pub iteration: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{solver} did not converge within {iterations} iterations (residual {residual:e})")]
    Convergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("iterate became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("SGD diverged in {} trial(s): {}", .0.len(), format_trials(.0))]
    Divergence(Vec<DivergedTrial>),

    #[error("|grad f(theta_dagger)| = {norm:e} exceeds 1e-8; optimum is stale")]
    StaleOptimum { norm: f64 },

    #[error("step size inadmissible: requires {condition}")]
    Inadmissible { condition: &'static str },

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_trials(trials: &[DivergedTrial]) -> String {
    let shown: Vec<String> = trials
        .iter()
        .take(16)
        .map(|t| format!("trial {} at k={}", t.trial, t.iteration))
        .collect();
    let mut s = shown.join(", ");
    if trials.len() > 16 {
        s.push_str(", ...");
    }
    s
}

impl Error {
    /// Process exit code: 1 for numerical failure (divergence), 2 for everything
    /// the caller could have avoided.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence(_) | Error::NonFinite { .. } => 1,
            _ => 2,
        }
    }
}
