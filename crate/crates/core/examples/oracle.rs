//! Exact expected error without sampling: path enumeration against the
//! second-moment recursion, and the threshold behaviour around z0^2.
//!
//! cargo run --example oracle

use sgd_floor::bounds::{theorem34_classify, TheoremConstants};
use sgd_floor::engine::{exact_error, exact_error_quadratic_for, ErrorSeries};
use sgd_floor::problem::LinearRegressionData;
use sgd_floor::Problem;

fn main() -> sgd_floor::Result<()> {
    let problem = Problem::LinearRegression(LinearRegressionData::scalar(&[1.0, 1.0], &[1.0, -1.0])?);
    let eta = 0.1;
    let paths = exact_error(&problem, &[0.0], eta, &[0.0], 16)?;
    let moments = exact_error_quadratic_for(&problem, &[0.0], eta, &[0.0], 500)?;
    let gap = paths.iter().zip(&moments).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |enumeration - recursion| over k <= 16: {gap:.2e}");
    println!("R_500 = {:.6}, fixed point eta/(2-eta) = {:.6}", moments[500], eta / (2.0 - eta));

    let c = TheoremConstants::from_parts(eta, 1.0, 1.0, 1.0, Some(1.0))?;
    let report = theorem34_classify(&ErrorSeries::exact(moments.clone(), "two_point", eta), c.z0_sq(), 1e-12)?;
    println!("z0^2 = {:.6}, first crossing at k = {:?}", c.z0_sq(), report.first_crossing);
    for (k, r) in moments.iter().take(7).enumerate() {
        println!("  R_{k} = {r:.6}");
    }
    println!("threshold properties hold: {}", report.passed());
    Ok(())
}
