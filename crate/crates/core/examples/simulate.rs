//! Monte-Carlo error curve for a small regression problem, with standard
//! errors and a thread-count invariance check.
//!
//! cargo run --release --example simulate

use sgd_floor::engine::monte_carlo_error;
use sgd_floor::problem::LinearRegressionData;
use sgd_floor::recipe::with_threads;
use sgd_floor::{Problem, ProblemConstants, RunConfig};

fn main() -> sgd_floor::Result<()> {
    let problem = Problem::LinearRegression(LinearRegressionData::scalar(&[1.0, 1.0, 1.0], &[0.0, 0.0, 3.0])?);
    let c = ProblemConstants::derive(&problem)?;
    let eta = 0.1;
    let mut cfg = RunConfig::new(eta, 200, 4000, vec![5.0], 7);
    cfg.snapshot_iters = vec![200];

    let run = with_threads(Some(4), || monte_carlo_error(&problem, &c.theta_dagger, &cfg, "three_point"))??;
    let again = with_threads(Some(1), || monte_carlo_error(&problem, &c.theta_dagger, &cfg, "three_point"))??;
    assert_eq!(run.series, again.series, "results depend on the thread count");

    for k in [0, 1, 2, 5, 10, 20, 50, 100, 200] {
        println!("k={k:>3}  r_hat={:.6}  se={:.2e}", run.series.r_hat[k], run.series.std_err[k]);
    }
    let tail = &run.series.r_hat[100..];
    println!("tail mean {:.6}, stationary value 2*eta/(2-eta) = {:.6}", tail.iter().sum::<f64>() / tail.len() as f64, 2.0 * eta / (2.0 - eta));
    println!("{} parameter snapshots recorded", run.snapshots.len());
    Ok(())
}
