//! Non-convex quartic with a spurious local minimum at 0.5: runs from both
//! sides at an admissible step size and at the legacy step 0.069.
//!
//! cargo run --release --example reproduce_quartic [out_dir]

use sgd_floor::recipe::{reproduce, ExperimentRecipe, DEFAULT_SEED};

fn main() -> sgd_floor::Result<()> {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "target/reproduce/quartic".into());
    let (out, _) = reproduce(&ExperimentRecipe::quartic(DEFAULT_SEED), out_dir.as_ref(), true)?;
    for run in &out.runs {
        let s = &run.summary;
        println!(
            "{:<32} eta={:.6} tail={:.4e} z0^2={:.4e} one_step={} small_step={}",
            s.label, s.eta, s.tail_mean, s.z0_sq, s.admissible.one_step, s.admissible.small_step
        );
        if let Some(t) = &s.trap {
            println!(
                "{:<32} {:.1}% of trials end within {} of {}, median final {:.4}",
                "", 100.0 * t.fraction_near, t.radius, t.target, t.median_final
            );
        }
    }
    println!("{}", out.report.to_json());
    std::process::exit(out.report.exit_code());
}
