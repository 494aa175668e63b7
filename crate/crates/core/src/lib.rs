//! Error floors of constant step-size SGD on finite-sum objectives.
//!
//! The crate computes the smoothness and convexity constants of a problem,
//! the one-step lower/upper inequalities for `R_k = E|θ_k − θ†|²`, their
//! closed-form and propagated envelopes and the asymptotic floor `z0²`, and
//! checks them against Monte-Carlo and exact-expectation SGD runs.
//!
//! See `examples/` for one runnable program per capability.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod constants;
pub mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod problem;
pub mod recipe;
pub mod rng;
pub mod svg;
pub mod verify;

pub use constants::ProblemConstants;
pub use engine::{ErrorSeries, RunConfig};
pub use error::{Error, Result};
pub use problem::{FiniteSum, Problem, ProblemSpec};
