//! Writes an exact series and its bounds to disk, reads them back and runs
//! every check, then shows a failing report for a series held below z0^2.
//!
//! cargo run --example verify

use sgd_floor::bounds::{one_step_bounds, TheoremConstants};
use sgd_floor::engine::{exact_error_quadratic_for, ErrorSeries};
use sgd_floor::io::{self, BoundsTable};
use sgd_floor::problem::LinearRegressionData;
use sgd_floor::verify::{check_asymptotics, check_bracketing, check_recursion, report};
use sgd_floor::Problem;

fn main() -> sgd_floor::Result<()> {
    let problem = Problem::LinearRegression(LinearRegressionData::scalar(&[1.0, 1.0], &[1.0, -1.0])?);
    let eta = 0.1;
    let k_max = 400;
    let series = ErrorSeries::exact(exact_error_quadratic_for(&problem, &[0.0], eta, &[2.0], k_max)?, "two_point", eta);
    let c = TheoremConstants::from_parts(eta, 1.0, 1.0, 1.0, Some(1.0))?.theorem32_ledger(4.0)?;

    let dir = std::env::temp_dir().join("sgd_floor_verify_example");
    std::fs::create_dir_all(&dir)?;
    let table = BoundsTable {
        propagated: Some(c.propagated_envelopes(4.0, k_max)?),
        closed_form: Some(c.closed_form_envelopes(k_max)?),
        anchored: Some(one_step_bounds(&series, &c)?),
    };
    io::save_series(&dir.join("series.csv"), &series)?;
    io::save_bounds(&dir.join("bounds.csv"), &table)?;

    let series = io::load_series(&dir.join("series.csv"))?;
    let table = io::load_bounds(&dir.join("bounds.csv"))?;
    let mut checks = Vec::new();
    for env in table.envelopes() {
        checks.push(check_bracketing(&series, env, 4.0)?);
    }
    checks.push(check_asymptotics(&series, &c, 0.2, 4.0)?);
    checks.push(check_recursion(&series, &c));
    let ok = report(checks)?;
    println!("{}\nexit code {}", ok.to_json(), ok.exit_code());

    let low = ErrorSeries::exact(vec![c.z0_sq() / 2.0; k_max + 1], "below_floor", eta);
    let bad = report(vec![check_asymptotics(&low, &c, 0.2, 4.0)?])?;
    println!("series at z0^2/2: status {:?}, slack {:?}", bad.status, bad.checks[0].slack);
    Ok(())
}
