//! Bounds on `R_k = E|θ_k − θ†|²` for constant step-size SGD.
//!
//! The two one-step inequalities are
//!
//! ```text
//! R_{k+1} ≥ (1 − 2ηλ_max,0) R_k − 2η²ΛD0 √R_k + η²D0²                 (smooth)
//! R_{k+1} ≤ (1 − 2ηλ_min + η²Φ²) R_k + 2η²ΛD0 √R_k + η²D0²           (+ strongly convex)
//! ```
//!
//! with `Φ² = Λ² + λ_max,0² − λ_min²`. Everything else here follows from them:
//! the closed-form constants `C0..C4`, `K0`, the asymptotic floor `z0²`, and
//! envelopes that bracket the whole trajectory.

use serde::{Deserialize, Serialize};

use crate::constants::ProblemConstants;
use crate::engine::ErrorSeries;
use crate::error::{Error, Result};

const BISECTION_TOL: f64 = 1e-12;

/// Which step-size conditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    /// `η < 1/λ_max,0`: the one-step inequalities hold.
    pub one_step: bool,
    /// `η < λ_min/(Λ² + λ_max,0²)`: the closed-form rates hold. `None` without
    /// strong convexity.
    pub closed_form: Option<bool>,
    /// `η < 1/(2λ_max,0)`: the asymptotic floor `z0²` exists.
    pub floor: bool,
    /// `η²ΛD0/(1 − 2ηλ_max,0) ≤ z0`: the floor also bounds `liminf` and every
    /// iterate after the first crossing.
    pub small_step: bool,
}

pub const ONE_STEP_CONDITION: &str = "eta < 1/lambda_max_0";
pub const CLOSED_FORM_CONDITION: &str = "eta < lambda_min/(Lambda^2 + lambda_max_0^2)";
pub const FLOOR_CONDITION: &str = "eta < 1/(2 lambda_max_0)";
pub const SMALL_STEP_CONDITION: &str = "eta^2 Lambda D0/(1 - 2 eta lambda_max_0) <= z0";

/// Closed-form constants for one initial error `R_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub r0: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub beta: f64,
    /// `⌈log η / log(1 − ηλ_min)⌉`, clamped at 0.
    pub k0: usize,
}

/// Step-size dependent quantities derived from [`ProblemConstants`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub eta: f64,
    #[serde(rename = "D0")]
    pub d0: f64,
    #[serde(rename = "Lambda")]
    pub lambda_rms: f64,
    pub lambda_max_0: f64,
    pub lambda_min: Option<f64>,
    /// `√(Λ² + λ_max,0² − λ_min²)`
    pub phi: Option<f64>,
    /// `1 − 2ηλ_min + η²Φ²`
    pub alpha: Option<f64>,
    /// Positive root of `h1(z) = 2λ_max,0 z² + 2ηΛD0 z − ηD0²`.
    pub z0: f64,
    /// Minimizer `η²ΛD0/(1 − 2ηλ_max,0)` of the lower-step map in `√R`;
    /// `None` when `1 − 2ηλ_max,0 ≤ 0`.
    pub z_star: Option<f64>,
    pub admissible: Admissibility,
    pub ledger: Option<Ledger>,
}

impl TheoremConstants {
    pub fn new(eta: f64, problem: &ProblemConstants) -> Result<Self> {
        Self::from_parts(
            eta,
            problem.d0,
            problem.lambda_rms,
            problem.lambda_max_0,
            problem.lambda_min,
        )
    }

    pub fn from_parts(
        eta: f64,
        d0: f64,
        lambda_rms: f64,
        lambda_max_0: f64,
        lambda_min: Option<f64>,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Usage(format!("step size must be positive, got {eta}")));
        }
        if !(lambda_max_0 > 0.0) || !(d0 >= 0.0) || !(lambda_rms >= 0.0) {
            return Err(Error::Usage("constants must be finite and non-negative".into()));
        }
        let phi = lambda_min.map(|m| (lambda_rms.powi(2) + lambda_max_0.powi(2) - m * m).max(0.0).sqrt());
        let alpha = lambda_min.zip(phi).map(|(m, p)| 1.0 - 2.0 * eta * m + eta * eta * p * p);
        let contraction = 1.0 - 2.0 * eta * lambda_max_0;
        let z_star = (contraction > 0.0).then(|| eta * eta * lambda_rms * d0 / contraction);
        let z0 = z0_closed_form(eta, d0, lambda_rms, lambda_max_0);

        let admissible = Admissibility {
            one_step: eta < 1.0 / lambda_max_0,
            closed_form: lambda_min
                .map(|m| eta < m / (lambda_rms.powi(2) + lambda_max_0.powi(2))),
            floor: eta < 0.5 / lambda_max_0,
            small_step: eta < 0.5 / lambda_max_0 && z_star.is_some_and(|z| z <= z0),
        };
        Ok(Self {
            eta,
            d0,
            lambda_rms,
            lambda_max_0,
            lambda_min,
            phi,
            alpha,
            z0,
            z_star,
            admissible,
            ledger: None,
        })
    }

    pub fn z0_sq(&self) -> f64 {
        self.z0 * self.z0
    }

    /// Lower-step map: the right side of `R_{k+1} ≥ ·`.
    pub fn lower_step(&self, r: f64) -> Result<f64> {
        check_error_value(r)?;
        Ok(self.lower_map(r.sqrt()))
    }

    /// Upper-step map: the right side of `R_{k+1} ≤ ·`. Needs strong convexity.
    pub fn upper_step(&self, r: f64) -> Result<f64> {
        check_error_value(r)?;
        let (a2, a1, a0) = self.upper_coeffs()?;
        let s = r.sqrt();
        Ok(a2 * s * s + a1 * s + a0)
    }

    /// Coefficients of the lower-step map as a quadratic in `s = √R`.
    fn lower_coeffs(&self) -> (f64, f64, f64) {
        let eta = self.eta;
        (
            1.0 - 2.0 * eta * self.lambda_max_0,
            -2.0 * eta * eta * self.lambda_rms * self.d0,
            eta * eta * self.d0 * self.d0,
        )
    }

    fn upper_coeffs(&self) -> Result<(f64, f64, f64)> {
        let alpha = self.alpha.ok_or_else(no_strong_convexity)?;
        let eta = self.eta;
        Ok((
            alpha,
            2.0 * eta * eta * self.lambda_rms * self.d0,
            eta * eta * self.d0 * self.d0,
        ))
    }

    fn lower_map(&self, s: f64) -> f64 {
        let (a2, a1, a0) = self.lower_coeffs();
        a2 * s * s + a1 * s + a0
    }

    /// `h1(z) = 2λ_max,0 z² + 2ηΛD0 z − ηD0²`; its positive root is `z0`.
    pub fn h1(&self, z: f64) -> f64 {
        2.0 * self.lambda_max_0 * z * z + 2.0 * self.eta * self.lambda_rms * self.d0 * z
            - self.eta * self.d0 * self.d0
    }

    /// `h2(z) = z² − η h1(z)`, the lower-step map evaluated at `R = z²`.
    pub fn h2(&self, z: f64) -> f64 {
        z * z - self.eta * self.h1(z)
    }

    /// `z0` from the closed form. Requires `η < 1/(2λ_max,0)`.
    pub fn z0_root(&self) -> Result<f64> {
        if !self.admissible.floor {
            return Err(Error::Inadmissible { condition: FLOOR_CONDITION });
        }
        Ok(self.z0)
    }

    /// `z0` as the positive root of `h1` found by bisection.
    pub fn z0_bisect(&self) -> f64 {
        if self.d0 == 0.0 {
            return 0.0;
        }
        // h1(0) = −ηD0² < 0 and h1 is increasing on [0, ∞)
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.h1(hi) < 0.0 {
            hi *= 2.0;
        }
        while hi - lo > BISECTION_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if self.h1(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Fills in `C0..C4`, `β` and `K0` for initial error `R_0`.
    pub fn theorem32_ledger(&self, r0: f64) -> Result<TheoremConstants> {
        check_error_value(r0)?;
        let m = self.lambda_min.ok_or_else(no_strong_convexity)?;
        if self.admissible.closed_form != Some(true) {
            return Err(Error::Inadmissible { condition: CLOSED_FORM_CONDITION });
        }
        let eta = self.eta;
        let phi_sq = self.phi.unwrap().powi(2);
        let (ld, d0) = (self.lambda_rms * self.d0, self.d0);
        let gap = 2.0 * m - eta * phi_sq;
        let c0 = (eta * ld + (eta * eta * ld * ld + eta * d0 * d0 * gap).sqrt()) / gap;
        let c1 = r0.max(c0 * c0);
        let bounded = (c1 + (d0 * d0 + 0.5) * eta * eta).sqrt();
        let c2 = (2.0 * ld * bounded + d0 * d0) / gap;
        let c3 = (-2.0 * ld * bounded + d0 * d0) / (2.0 * self.lambda_max_0);
        let c4 = r0 + c2;
        let beta = 2.0 * eta * eta * ld * bounded + eta * eta * d0 * d0;
        let k0 = (eta.ln() / (1.0 - eta * m).ln()).ceil().max(0.0) as usize;
        let mut out = self.clone();
        out.ledger = Some(Ledger {
            r0,
            c0,
            c1,
            c2,
            c3,
            c4,
            beta,
            k0,
        });
        Ok(out)
    }

    fn require_ledger(&self) -> Result<&Ledger> {
        self.ledger
            .as_ref()
            .ok_or_else(|| Error::Usage("closed-form bounds need theorem32_ledger(R_0) first".into()))
    }

    /// Tail constants of the large-`k` regime: `(upper, lower)` limits
    /// `(ηD0² ± 2√C4 η^{3/2} ΛD0) / (2λ_min − ηΦ²)` and `/ (2λ_max,0)`. The
    /// lower one is not clamped.
    fn tail_limits(&self) -> Result<(f64, f64)> {
        let l = self.require_ledger()?;
        let eta = self.eta;
        let noise = eta * self.d0 * self.d0;
        let cross = 2.0 * l.c4.sqrt() * eta.powf(1.5) * self.lambda_rms * self.d0;
        let gap = 2.0 * self.lambda_min.unwrap() - eta * self.phi.unwrap().powi(2);
        Ok(((noise + cross) / gap, (noise - cross) / (2.0 * self.lambda_max_0)))
    }

    /// Asymptotic `(liminf, limsup)` bounds from the closed-form rates; the
    /// lower one is clamped at 0.
    pub fn closed_form_limits(&self) -> Result<(f64, f64)> {
        let (upper, lower) = self.tail_limits()?;
        Ok((lower.max(0.0), upper))
    }

    /// Sharper asymptotic `(liminf, limsup)` bounds, the squared fixed points of
    /// the one-step maps in `√R`. Valid when the small-step condition holds.
    pub fn refined_asymptotics(&self) -> Result<(f64, f64)> {
        if !self.admissible.small_step {
            return Err(Error::Inapplicable(format!(
                "refined asymptotics require {SMALL_STEP_CONDITION}"
            )));
        }
        let m = self.lambda_min.ok_or_else(no_strong_convexity)?;
        let eta = self.eta;
        let phi_sq = self.phi.unwrap().powi(2);
        let (ld, d0) = (self.lambda_rms * self.d0, self.d0);
        let disc = 4.0 * eta * eta * (ld * ld - phi_sq * d0 * d0) + 8.0 * eta * d0 * d0 * m;
        let denom = 4.0 * m - 2.0 * eta * phi_sq;
        if disc < 0.0 || denom <= 0.0 {
            return Err(Error::Inapplicable("refined limsup bound is undefined at this step size".into()));
        }
        let s = (2.0 * eta * ld + disc.sqrt()) / denom;
        Ok((self.z0_sq(), s * s))
    }

    /// Closed-form envelopes for `k = 0..=k_max`. The large-`k` regime takes
    /// over at `k = K0`; the first regime's values at `K0` are kept in
    /// [`EnvelopeSeries::switch`].
    pub fn closed_form_envelopes(&self, k_max: usize) -> Result<EnvelopeSeries> {
        let l = *self.require_ledger()?;
        let alpha = self.alpha.unwrap();
        let eta = self.eta;
        let contraction = 1.0 - 2.0 * eta * self.lambda_max_0;
        let (tail_up, tail_low) = self.tail_limits()?;

        // Geometric lower bound a^n·start + c·(1 − a^n) when the constant is
        // positive, a^n·start + c otherwise.
        let geometric_lower = |start: f64, c: f64, n: usize| -> f64 {
            if contraction <= 0.0 {
                return 0.0;
            }
            let p = contraction.powi(n as i32);
            let v = if c > 0.0 { p * start + c * (1.0 - p) } else { p * start + c };
            v.max(0.0)
        };
        let early_upper = |k: usize| alpha.powi(k as i32) * l.r0 + l.c2 * eta;
        let early_lower = |k: usize| geometric_lower(l.r0, l.c3 * eta, k);

        let anchor_lower = early_lower(l.k0);
        let mut lower = Vec::with_capacity(k_max + 1);
        let mut upper = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            if k < l.k0 {
                lower.push(early_lower(k));
                upper.push(early_upper(k));
            } else {
                let n = k - l.k0;
                upper.push(alpha.powi(n as i32) * l.c4 * eta + tail_up);
                lower.push(geometric_lower(anchor_lower, tail_low, n));
            }
        }
        let switch = (l.k0 <= k_max).then(|| RegimeSwitch {
            k: l.k0,
            lower_before: anchor_lower,
            upper_before: early_upper(l.k0),
        });
        Ok(EnvelopeSeries {
            lower,
            upper,
            mode: EnvelopeMode::ClosedForm,
            switch,
        })
    }

    /// Certified interval `[L_k, U_k] ∋ R_k` obtained by pushing the whole
    /// interval through the one-step maps. The lower map is not monotone in
    /// `R` (its minimum in `√R` is at `z*`), so each step takes its minimum
    /// over the interval rather than its value at `L_k`. Without strong
    /// convexity `U_k = +∞`.
    pub fn propagated_envelopes(&self, r0: f64, k_max: usize) -> Result<EnvelopeSeries> {
        check_error_value(r0)?;
        if !self.admissible.one_step {
            return Err(Error::Inadmissible { condition: ONE_STEP_CONDITION });
        }
        let lower_q = self.lower_coeffs();
        let upper_q = self.upper_coeffs().ok();
        let mut lower = Vec::with_capacity(k_max + 1);
        let mut upper = Vec::with_capacity(k_max + 1);
        let (mut lo, mut hi) = (r0, if upper_q.is_some() { r0 } else { f64::INFINITY });
        lower.push(lo);
        upper.push(hi);
        for _ in 0..k_max {
            let (s_lo, s_hi) = (lo.sqrt(), hi.sqrt());
            let next_lo = quadratic_range(lower_q, s_lo, s_hi).0.max(0.0);
            let next_hi = match upper_q {
                Some(q) => quadratic_range(q, s_lo, s_hi).1,
                None => f64::INFINITY,
            };
            lo = next_lo;
            hi = next_hi.max(next_lo);
            lower.push(lo);
            upper.push(hi);
        }
        Ok(EnvelopeSeries {
            lower,
            upper,
            mode: EnvelopeMode::Propagated,
            switch: None,
        })
    }
}

fn check_error_value(r: f64) -> Result<()> {
    if !(r >= 0.0) {
        return Err(Error::Usage(format!("error value must be >= 0, got {r}")));
    }
    Ok(())
}

fn no_strong_convexity() -> Error {
    Error::Inapplicable("upper bounds need a strong convexity constant lambda_min".into())
}

/// `z0 = (−2ηΛD0 + √(4η²Λ²D0² + 8ηλ_max,0 D0²)) / (4λ_max,0)`.
pub fn z0_closed_form(eta: f64, d0: f64, lambda_rms: f64, lambda_max_0: f64) -> f64 {
    let ld = lambda_rms * d0;
    let disc = 4.0 * eta * eta * ld * ld + 8.0 * eta * lambda_max_0 * d0 * d0;
    // rationalized form of (−b + √disc)/(4λ): stable when b dominates
    let b = 2.0 * eta * ld;
    if d0 == 0.0 {
        return 0.0;
    }
    let root = disc.sqrt();
    (8.0 * eta * lambda_max_0 * d0 * d0) / (4.0 * lambda_max_0 * (b + root))
}

/// Minimum and maximum of `a2 s² + a1 s + a0` over `s ∈ [lo, hi]`; `hi` may
/// be infinite.
fn quadratic_range((a2, a1, a0): (f64, f64, f64), lo: f64, hi: f64) -> (f64, f64) {
    let q = |s: f64| a2 * s * s + a1 * s + a0;
    let mut min = q(lo);
    let mut max = min;
    if hi.is_finite() {
        let v = q(hi);
        min = min.min(v);
        max = max.max(v);
    } else {
        let leading = if a2 != 0.0 { a2 } else { a1 };
        if leading > 0.0 {
            max = f64::INFINITY;
        } else if leading < 0.0 {
            min = f64::NEG_INFINITY;
        }
    }
    if a2 != 0.0 {
        let vertex = -a1 / (2.0 * a2);
        if vertex > lo && vertex < hi {
            let v = q(vertex);
            min = min.min(v);
            max = max.max(v);
        }
    }
    (min, max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMode {
    Propagated,
    ClosedForm,
    Anchored,
}

/// Left-hand values at the switch between the two closed-form regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSwitch {
    pub k: usize,
    pub lower_before: f64,
    pub upper_before: f64,
}

/// Per-iteration bracket `[lower_k, upper_k]` for `R_k`; `upper` may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSeries {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub mode: EnvelopeMode,
    pub switch: Option<RegimeSwitch>,
}

impl EnvelopeSeries {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

/// One-step brackets anchored at an observed series: entry `k + 1` is
/// `[lower_step(r_k), upper_step(r_k)]`, the prediction for `R_{k+1}` from
/// `r_k`. Entry 0 predicts nothing and is `[0, +∞)`. The upper side is `+∞`
/// without strong convexity.
pub fn one_step_bounds(series: &ErrorSeries, c: &TheoremConstants) -> Result<EnvelopeSeries> {
    if series.is_empty() {
        return Err(Error::Usage("series is empty".into()));
    }
    let n = series.len();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    lower.push(0.0);
    upper.push(f64::INFINITY);
    for &r in &series.r_hat[..n - 1] {
        lower.push(c.lower_step(r)?);
        upper.push(c.upper_step(r).unwrap_or(f64::INFINITY));
    }
    Ok(EnvelopeSeries {
        lower,
        upper,
        mode: EnvelopeMode::Anchored,
        switch: None,
    })
}

/// Outcome of one threshold property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub passed: bool,
    pub first_counterexample: Option<usize>,
}

impl PropertyOutcome {
    fn from_first(first: Option<usize>) -> Self {
        Self {
            passed: first.is_none(),
            first_counterexample: first,
        }
    }
}

/// Threshold behaviour of an exact series relative to `z0²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// `R_k > min{R_0, z0²}` for `k ≥ 1`.
    pub above_initial_floor: PropertyOutcome,
    /// `R_k < z0²` implies `R_{k+1} > R_k`.
    pub grows_below_floor: PropertyOutcome,
    /// Once `R_k ≥ z0²`, it stays there.
    pub stays_above_floor: PropertyOutcome,
    /// First `k` with `R_k ≥ z0²`.
    pub first_crossing: Option<usize>,
}

impl ThresholdReport {
    pub fn passed(&self) -> bool {
        self.above_initial_floor.passed && self.grows_below_floor.passed && self.stays_above_floor.passed
    }
}

/// Checks the three threshold properties of an exact series against `z0²`
/// with absolute tolerance `tol`.
pub fn theorem34_classify(series: &ErrorSeries, z0_sq: f64, tol: f64) -> Result<ThresholdReport> {
    if !series.is_exact() {
        return Err(Error::Usage(
            "threshold properties need an exact series; sampling noise breaks strict monotonicity".into(),
        ));
    }
    let r = &series.r_hat;
    if r.is_empty() {
        return Err(Error::Usage("series is empty".into()));
    }
    let floor = r[0].min(z0_sq);
    let above = (1..r.len()).find(|&k| !(r[k] > floor - tol));
    let grows = (0..r.len().saturating_sub(1)).find(|&k| r[k] < z0_sq - tol && !(r[k + 1] - r[k] > -tol));
    let first_crossing = r.iter().position(|&v| v >= z0_sq - tol);
    let stays = first_crossing.and_then(|k| (k + 1..r.len()).find(|&i| r[i] < z0_sq - tol));
    Ok(ThresholdReport {
        above_initial_floor: PropertyOutcome::from_first(above),
        grows_below_floor: PropertyOutcome::from_first(grows),
        stays_above_floor: PropertyOutcome::from_first(stays),
        first_crossing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(eta: f64) -> TheoremConstants {
        TheoremConstants::from_parts(eta, 1.0, 1.0, 1.0, Some(1.0)).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn admissibility_flags() {
        let a = toy(0.1).admissible;
        assert!(a.one_step && a.closed_form == Some(true) && a.floor && a.small_step);
        assert!(close(toy(0.1).z_star.unwrap(), 0.0125, 1e-15));
        let b = toy(0.6).admissible;
        assert!(b.one_step && !b.floor && !b.small_step);
        assert_eq!(b.closed_form, Some(false));
        let noiseless = TheoremConstants::from_parts(0.1, 0.0, 1.0, 1.0, Some(1.0)).unwrap();
        assert!(noiseless.admissible.small_step);
        assert_eq!((noiseless.z0, noiseless.z_star), (0.0, Some(0.0)));
    }

    #[test]
    fn one_step_maps() {
        let c = toy(0.1);
        assert!(close(c.lower_step(0.0).unwrap(), 0.01, 1e-15));
        assert!(close(c.lower_step(0.04).unwrap(), 0.038, 1e-15));
        assert!(close(c.upper_step(0.04).unwrap(), 0.0464, 1e-15));
        assert!(close(c.upper_step(0.0).unwrap(), 0.01, 1e-15));
        assert!(matches!(c.lower_step(-1.0), Err(Error::Usage(_))));
        let noiseless = TheoremConstants::from_parts(0.1, 0.0, 1.0, 1.0, Some(1.0)).unwrap();
        assert!(close(noiseless.lower_step(0.5).unwrap(), 0.8 * 0.5, 1e-15));
        let nonconvex = TheoremConstants::from_parts(0.1, 1.0, 1.0, 1.0, None).unwrap();
        assert!(matches!(nonconvex.upper_step(0.1), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn gradient_descent_limit() {
        // J = 1: no gradient noise at the optimum and Λ = λ_max,1 = λ_max,0,
        // so the upper map is the exact contraction (1 − η)² R
        let c = TheoremConstants::from_parts(0.1, 0.0, 1.0, 1.0, Some(1.0)).unwrap();
        assert!(close(c.upper_step(2.0).unwrap(), c.alpha.unwrap() * 2.0, 1e-15));
        assert!(close(c.alpha.unwrap(), 0.81, 1e-15));
    }

    #[test]
    fn h2_is_lower_map() {
        let c = toy(0.1);
        for s in [0.0, 0.1, 0.3, 1.7] {
            assert!(close(c.h2(s), c.lower_step(s * s).unwrap(), 1e-15));
        }
    }

    #[test]
    fn ledger_toy() {
        let c = toy(0.1).theorem32_ledger(4.0).unwrap();
        let l = c.ledger.unwrap();
        assert!(close(l.c0, 0.288007, 1e-6));
        assert_eq!(l.c1, 4.0);
        assert!(close(l.c2, 2.635523, 1e-6));
        assert!(close(l.c3, -1.503747, 1e-6));
        assert!(close(l.c4, 6.635523, 1e-6));
        assert_eq!(l.k0, 22);
        let zero = toy(0.1).theorem32_ledger(0.0).unwrap().ledger.unwrap();
        assert_eq!(zero.c1, zero.c0 * zero.c0);
    }

    #[test]
    fn ledger_noiseless() {
        let c = TheoremConstants::from_parts(0.1, 0.0, 1.0, 1.0, Some(1.0))
            .unwrap()
            .theorem32_ledger(3.0)
            .unwrap();
        let l = c.ledger.unwrap();
        assert_eq!((l.c0, l.c2, l.c3, l.c4), (0.0, 0.0, 0.0, 3.0));
    }

    #[test]
    fn ledger_rejects_large_step() {
        assert!(matches!(
            toy(0.5).theorem32_ledger(1.0),
            Err(Error::Inadmissible { .. })
        ));
    }

    #[test]
    fn closed_form_limits_toy() {
        let c = toy(0.1).theorem32_ledger(4.0).unwrap();
        let (lo, hi) = c.closed_form_limits().unwrap();
        assert!(close(hi, 0.138378, 1e-6));
        assert_eq!(lo, 0.0);
        let env = c.closed_form_envelopes(2000).unwrap();
        assert!(close(env.upper[2000], 0.138378, 1e-6));
        assert_eq!(env.lower[2000], 0.0);
        let sw = env.switch.unwrap();
        assert_eq!(sw.k, 22);
    }

    #[test]
    fn closed_form_noiseless_is_geometric() {
        let c = TheoremConstants::from_parts(0.1, 0.0, 1.0, 1.0, Some(1.0))
            .unwrap()
            .theorem32_ledger(1.0)
            .unwrap();
        let env = c.closed_form_envelopes(40).unwrap();
        let k0 = c.ledger.unwrap().k0;
        for k in 0..k0 {
            assert!(close(env.lower[k], 0.8f64.powi(k as i32), 1e-15));
            assert!(close(env.upper[k], 0.81f64.powi(k as i32), 1e-15));
        }
    }

    #[test]
    fn z0_toy_and_quartic() {
        let c = toy(0.1);
        assert!(close(c.z0_root().unwrap(), 0.179129, 1e-6));
        assert!(close(c.z0_sq(), 0.032087, 1e-6));
        assert!((c.z0 - c.z0_bisect()).abs() <= 1e-12 * c.z0);
        assert!(c.h1(c.z0).abs() <= 1e-12);
        let q = TheoremConstants::from_parts(1.0 / 216.0, 1.0, 54.0, 54.0, None).unwrap();
        assert!(close(q.z0, 1.0 / 216.0, 1e-15));
        assert!((q.z0 - q.z0_bisect()).abs() <= 1e-12 * q.z0);
        assert!(toy(0.6).z0_root().is_err());
    }

    #[test]
    fn refined_toy() {
        let (lo, hi) = toy(0.1).refined_asymptotics().unwrap();
        assert!(close(lo, 0.032087, 1e-6));
        assert!(close(hi, 0.082948, 1e-6));
        let noiseless = TheoremConstants::from_parts(0.1, 0.0, 1.0, 1.0, Some(1.0)).unwrap();
        assert_eq!(noiseless.refined_asymptotics().unwrap(), (0.0, 0.0));
    }

    #[test]
    fn propagated_from_optimum() {
        let env = toy(0.1).propagated_envelopes(0.0, 16).unwrap();
        assert!(close(env.lower[1], 0.01, 1e-15));
        assert!(close(env.upper[1], 0.01, 1e-15));
        assert!(matches!(
            toy(2.0).propagated_envelopes(0.0, 3),
            Err(Error::Inadmissible { condition: ONE_STEP_CONDITION })
        ));
    }

    #[test]
    fn propagated_without_upper_uses_vertex() {
        let c = TheoremConstants::from_parts(0.1, 1.0, 1.0, 1.0, None).unwrap();
        let env = c.propagated_envelopes(0.0, 1).unwrap();
        let zs = c.z_star.unwrap();
        assert!(close(env.lower[1], c.lower_step(zs * zs).unwrap(), 1e-15));
        assert!(env.upper.iter().all(|u| u.is_infinite()));
    }

    #[test]
    fn quadratic_range_cases() {
        assert_eq!(quadratic_range((1.0, -2.0, 0.0), 0.0, 3.0), (-1.0, 3.0));
        assert_eq!(quadratic_range((-1.0, 0.0, 0.0), 1.0, f64::INFINITY).0, f64::NEG_INFINITY);
        assert_eq!(quadratic_range((1.0, 0.0, 0.0), 2.0, f64::INFINITY), (4.0, f64::INFINITY));
    }

    #[test]
    fn threshold_report_on_fabricated_series() {
        let s = ErrorSeries::exact(vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.041], "t", 0.1);
        let rep = theorem34_classify(&s, 0.035, 1e-12).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.first_crossing, Some(4));
        let bad = ErrorSeries::exact(vec![0.05, 0.04, 0.02, 0.01], "t", 0.1);
        let rep = theorem34_classify(&bad, 0.035, 1e-12).unwrap();
        assert_eq!(rep.stays_above_floor.first_counterexample, Some(2));
        let mut mc = s.clone();
        mc.meta.exact = false;
        assert!(theorem34_classify(&mc, 0.035, 1e-12).is_err());
    }
}
