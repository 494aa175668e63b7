//! Bound envelopes for the two-point regression problem: the propagated
//! one-step envelope, the closed-form envelope with its regime switch, and
//! the asymptotic floor and ceilings.
//!
//! cargo run --example bounds

use sgd_floor::bounds::TheoremConstants;

fn main() -> sgd_floor::Result<()> {
    // D0 = Lambda = lambda_min = lambda_max_0 = 1
    let c = TheoremConstants::from_parts(0.1, 1.0, 1.0, 1.0, Some(1.0))?.theorem32_ledger(4.0)?;
    let l = c.ledger.unwrap();
    println!("z0 = {:.6}  (bisection {:.6}),  z0^2 = {:.6}", c.z0, c.z0_bisect(), c.z0_sq());
    println!(
        "C0 = {:.6}  C2 = {:.6}  C3 = {:.6}  C4 = {:.6}  K0 = {}",
        l.c0, l.c2, l.c3, l.c4, l.k0
    );
    let (lo_cf, hi_cf) = c.closed_form_limits()?;
    let (lo_ref, hi_ref) = c.refined_asymptotics()?;
    println!("closed-form limits [{lo_cf:.6}, {hi_cf:.6}], refined [{lo_ref:.6}, {hi_ref:.6}]");

    let prop = c.propagated_envelopes(4.0, 60)?;
    let cf = c.closed_form_envelopes(60)?;
    if let Some(s) = cf.switch {
        println!("closed-form regime switch at k = {}", s.k);
    }
    println!("{:>3} {:>10} {:>10} {:>10} {:>10}", "k", "prop_lo", "prop_hi", "cf_lo", "cf_hi");
    for k in (0..=60).step_by(6) {
        println!(
            "{k:>3} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            prop.lower[k], prop.upper[k], cf.lower[k], cf.upper[k]
        );
    }
    Ok(())
}
