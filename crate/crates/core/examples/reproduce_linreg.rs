//! Synthetic least-squares experiment: 1000 SGD trials of 50000 steps,
//! checked against the one-step, closed-form and asymptotic bounds.
//!
//! cargo run --release --example reproduce_linreg [out_dir]

use std::time::Instant;

use sgd_floor::recipe::{reproduce, ExperimentRecipe, DEFAULT_SEED};

fn main() -> sgd_floor::Result<()> {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "target/reproduce/linreg".into());
    let recipe = ExperimentRecipe::linreg(DEFAULT_SEED);
    let start = Instant::now();
    let (out, files) = reproduce(&recipe, out_dir.as_ref(), true)?;
    println!("theta_dagger = {:?}", out.problem.theta_dagger);
    println!(
        "lambda_max_0 = {:.6}, lambda_min = {:?}, Lambda = {:.6}, D0 = {:.6}",
        out.problem.lambda_max_0, out.problem.lambda_min, out.problem.lambda_rms, out.problem.d0
    );
    for run in &out.runs {
        let s = &run.summary;
        println!(
            "{}: tail mean {:.6e} (se {:.1e}), z0^2 {:.6e}, refined limsup {:?}, closed-form limsup {:?}",
            s.label, s.tail_mean, s.tail_std_err, s.z0_sq, s.refined_limsup, s.limsup_bound
        );
    }
    for check in &out.report.checks {
        println!(
            "  {:<40} {:?} slack={:?} violations={}/{}",
            check.name, check.status, check.slack, check.violations, check.checked
        );
    }
    println!("{} files in {out_dir}, {:.2?}", files.len(), start.elapsed());
    Ok(())
}
