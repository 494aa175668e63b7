//! Checks of error series against bound envelopes and asymptotic floors,
//! collected into a JSON report with a process exit code.

use serde::{Deserialize, Serialize};

use crate::bounds::{EnvelopeSeries, TheoremConstants};
use crate::engine::ErrorSeries;
use crate::error::{Error, Result};

/// Absolute tolerance for comparisons against exact series.
pub const EXACT_TOL: f64 = 1e-10;
pub const DEFAULT_SE_MULT: f64 = 4.0;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;
/// Fraction of iterations a Monte-Carlo bracket check may miss.
pub const MC_VIOLATION_BUDGET: f64 = 0.01;
pub const MIN_TAIL_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    /// Smallest margin by which the check held (negative when violated).
    pub slack: Option<f64>,
    pub first_violation_k: Option<usize>,
    pub tolerance: f64,
    #[serde(default)]
    pub violations: usize,
    #[serde(default)]
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CheckRecord {
    pub fn inapplicable(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Inapplicable,
            slack: None,
            first_violation_k: None,
            tolerance: 0.0,
            violations: 0,
            checked: 0,
            reason: Some(reason.into()),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// `lower_k − a_k ≤ r_k ≤ upper_k + a_k` at every `k`, where `a_k` is
/// `se_mult · std_err_k` for Monte-Carlo series and 1e-10 for exact ones.
/// The reported slack is the raw margin, before the allowance.
pub fn check_bracketing(series: &ErrorSeries, env: &EnvelopeSeries, se_mult: f64) -> Result<CheckRecord> {
    check_bracketing_with_budget(series, env, se_mult, 0.0)
}

/// [`check_bracketing`] that passes while the fraction of violating
/// iterations stays within `budget`. Exact series ignore the budget.
pub fn check_bracketing_with_budget(
    series: &ErrorSeries,
    env: &EnvelopeSeries,
    se_mult: f64,
    budget: f64,
) -> Result<CheckRecord> {
    if series.len() != env.len() {
        return Err(Error::Usage(format!(
            "series has {} entries, envelope has {}",
            series.len(),
            env.len()
        )));
    }
    if !(se_mult >= 0.0) {
        return Err(Error::Usage("se_mult must be >= 0".into()));
    }
    let exact = series.is_exact();
    let budget = if exact { 0.0 } else { budget };
    let mut slack = f64::INFINITY;
    let mut first = None;
    let mut violations = 0;
    for k in 0..series.len() {
        let r = series.r_hat[k];
        let allow = if exact { EXACT_TOL } else { se_mult * series.std_err[k] };
        let s = (r - env.lower[k]).min(env.upper[k] - r);
        slack = slack.min(s);
        if s + allow < 0.0 {
            violations += 1;
            first.get_or_insert(k);
        }
    }
    let allowed = (budget * series.len() as f64).floor() as usize;
    Ok(CheckRecord {
        name: format!("bracketing_{}", mode_name(env)),
        status: if violations <= allowed { Status::Pass } else { Status::Fail },
        slack: finite(slack),
        first_violation_k: first,
        tolerance: if exact { EXACT_TOL } else { se_mult },
        violations,
        checked: series.len(),
        reason: None,
    })
}

fn mode_name(env: &EnvelopeSeries) -> &'static str {
    match env.mode {
        crate::bounds::EnvelopeMode::Propagated => "propagated",
        crate::bounds::EnvelopeMode::ClosedForm => "closed_form",
        crate::bounds::EnvelopeMode::Anchored => "anchored",
    }
}

/// Tail average over the last `tail_fraction` of the series against the
/// floor `z0²` and, with strong convexity and a ledger, the closed-form
/// `limsup` bound. The allowance is `se_mult` times the mean standard error
/// over the window, which bounds the standard error of the tail average.
/// The reported slack is the raw margin, before the allowance.
pub fn check_asymptotics(
    series: &ErrorSeries,
    c: &TheoremConstants,
    tail_fraction: f64,
    se_mult: f64,
) -> Result<CheckRecord> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Usage(format!("tail fraction must be in (0, 1], got {tail_fraction}")));
    }
    let n = series.len();
    let window = ((n as f64) * tail_fraction).ceil() as usize;
    if window < MIN_TAIL_POINTS {
        return Err(Error::Usage(format!(
            "tail window has {window} points, at least {MIN_TAIL_POINTS} are needed"
        )));
    }
    let tail = n - window..n;
    let avg = series.r_hat[tail.clone()].iter().sum::<f64>() / window as f64;
    let allow = if series.is_exact() {
        EXACT_TOL
    } else {
        se_mult * series.std_err[tail].iter().sum::<f64>() / window as f64
    };

    let mut slack = f64::INFINITY;
    let mut skipped = Vec::new();
    if c.admissible.floor && c.admissible.small_step {
        slack = slack.min(avg - c.z0_sq());
    } else {
        skipped.push("lower floor: step size violates the small-step condition");
    }
    match c.closed_form_limits() {
        Ok((_, limsup)) => slack = slack.min(limsup - avg),
        Err(_) => skipped.push("upper limit: no closed-form ledger (needs strong convexity and admissible step)"),
    }
    if skipped.len() == 2 {
        return Ok(CheckRecord::inapplicable("asymptotics", skipped.join("; ")));
    }
    let failed = slack + allow < 0.0;
    Ok(CheckRecord {
        name: "asymptotics".into(),
        status: if failed { Status::Fail } else { Status::Pass },
        slack: finite(slack),
        first_violation_k: failed.then_some(n - window),
        tolerance: if series.is_exact() { EXACT_TOL } else { se_mult },
        violations: usize::from(failed),
        checked: window,
        reason: (!skipped.is_empty()).then(|| skipped.join("; ")),
    })
}

/// Both one-step inequalities on consecutive entries of an exact series.
pub fn check_recursion(series: &ErrorSeries, c: &TheoremConstants) -> CheckRecord {
    const NAME: &str = "recursion";
    if !series.is_exact() {
        return CheckRecord::inapplicable(NAME, "series is a Monte-Carlo estimate; the inequalities hold in expectation only");
    }
    if !c.admissible.one_step {
        return CheckRecord::inapplicable(NAME, format!("requires {}", crate::bounds::ONE_STEP_CONDITION));
    }
    let r = &series.r_hat;
    let mut slack = f64::INFINITY;
    let mut first = None;
    let mut violations = 0;
    for k in 0..r.len().saturating_sub(1) {
        let Ok(lower) = c.lower_step(r[k]) else {
            return CheckRecord::inapplicable(NAME, format!("negative entry at k={k}"));
        };
        let upper = c.upper_step(r[k]).unwrap_or(f64::INFINITY);
        let s = (r[k + 1] - lower).min(upper - r[k + 1]);
        slack = slack.min(s);
        if s < -EXACT_TOL {
            violations += 1;
            first.get_or_insert(k + 1);
        }
    }
    CheckRecord {
        name: NAME.into(),
        status: if violations == 0 { Status::Pass } else { Status::Fail },
        slack: finite(slack),
        first_violation_k: first,
        tolerance: EXACT_TOL,
        violations,
        checked: r.len().saturating_sub(1),
        reason: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
    pub status: Verdict,
}

impl VerificationReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Aggregates check records, failing ones first. An empty list is a usage
/// error: nothing was verified.
pub fn report(mut checks: Vec<CheckRecord>) -> Result<VerificationReport> {
    if checks.is_empty() {
        return Err(Error::Usage("no checks to report".into()));
    }
    checks.sort_by_key(|c| c.status != Status::Fail);
    let status = if checks.iter().any(|c| c.status == Status::Fail) {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(VerificationReport { checks, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::EnvelopeMode;

    fn toy() -> TheoremConstants {
        TheoremConstants::from_parts(0.1, 1.0, 1.0, 1.0, Some(1.0)).unwrap()
    }

    fn recursion(r0: f64, n: usize) -> Vec<f64> {
        let mut r = vec![r0];
        for _ in 0..n {
            let last = *r.last().unwrap();
            r.push(0.81 * last + 0.01);
        }
        r
    }

    #[test]
    fn zero_series_fails_at_first_step() {
        let s = ErrorSeries::exact(vec![0.0; 10], "toy", 0.1);
        let env = toy().propagated_envelopes(0.0, 9).unwrap();
        let rec = check_bracketing(&s, &env, 4.0).unwrap();
        assert_eq!(rec.status, Status::Fail);
        assert_eq!(rec.first_violation_k, Some(1));
    }

    #[test]
    fn exact_series_inside_propagated_envelope() {
        let s = ErrorSeries::exact(recursion(0.0, 200), "toy", 0.1);
        let env = toy().propagated_envelopes(0.0, 200).unwrap();
        let rec = check_bracketing(&s, &env, 4.0).unwrap();
        assert_eq!(rec.status, Status::Pass);
        assert!(rec.slack.unwrap() >= -EXACT_TOL);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let s = ErrorSeries::exact(vec![0.0; 5], "toy", 0.1);
        let env = toy().propagated_envelopes(0.0, 9).unwrap();
        assert!(matches!(check_bracketing(&s, &env, 4.0), Err(Error::Usage(_))));
    }

    #[test]
    fn noiseless_zero_series_passes() {
        let c = TheoremConstants::from_parts(0.1, 0.0, 1.0, 1.0, Some(1.0)).unwrap();
        let s = ErrorSeries::exact(vec![0.0; 60], "toy", 0.1);
        let env = c.propagated_envelopes(0.0, 59).unwrap();
        assert_eq!(check_bracketing(&s, &env, 4.0).unwrap().status, Status::Pass);
    }

    #[test]
    fn asymptotics_toy_and_deficit() {
        let c = toy().theorem32_ledger(0.0).unwrap();
        let s = ErrorSeries::exact(recursion(0.0, 1000), "toy", 0.1);
        assert_eq!(check_asymptotics(&s, &c, 0.2, 4.0).unwrap().status, Status::Pass);
        let low = ErrorSeries::exact(vec![c.z0_sq() / 2.0; 300], "toy", 0.1);
        let rec = check_asymptotics(&low, &c, 0.2, 4.0).unwrap();
        assert_eq!(rec.status, Status::Fail);
        assert!((rec.slack.unwrap() + c.z0_sq() / 2.0).abs() < 1e-15);
        let short = ErrorSeries::exact(vec![0.05; 100], "toy", 0.1);
        assert!(check_asymptotics(&short, &c, 0.2, 4.0).is_err());
    }

    #[test]
    fn recursion_gating() {
        let s = ErrorSeries::exact(recursion(1.0, 50), "toy", 0.1);
        assert_eq!(check_recursion(&s, &toy()).status, Status::Pass);
        let mut mc = s.clone();
        mc.meta.exact = false;
        assert_eq!(check_recursion(&mc, &toy()).status, Status::Inapplicable);
        let big = TheoremConstants::from_parts(1.5, 1.0, 1.0, 1.0, Some(1.0)).unwrap();
        assert_eq!(check_recursion(&s, &big).status, Status::Inapplicable);
    }

    #[test]
    fn report_contract() {
        assert!(report(vec![]).is_err());
        let pass = CheckRecord {
            name: "a".into(),
            status: Status::Pass,
            slack: Some(1.0),
            first_violation_k: None,
            tolerance: 0.0,
            violations: 0,
            checked: 1,
            reason: None,
        };
        let fail = CheckRecord {
            name: "b".into(),
            status: Status::Fail,
            ..pass.clone()
        };
        let ok = report(vec![pass.clone(), CheckRecord::inapplicable("c", "gated")]).unwrap();
        assert_eq!(ok.exit_code(), 0);
        let bad = report(vec![pass, fail]).unwrap();
        assert_eq!(bad.exit_code(), 1);
        assert_eq!(bad.checks[0].name, "b");
        assert_eq!(bad.to_json(), bad.clone().to_json());
    }

    #[test]
    fn monte_carlo_budget() {
        let mut s = ErrorSeries::exact(vec![1.0; 200], "x", 0.1);
        s.meta.exact = false;
        s.std_err = vec![0.01; 200];
        s.r_hat[7] = 2.0;
        let env = EnvelopeSeries {
            lower: vec![0.9; 200],
            upper: vec![1.1; 200],
            mode: EnvelopeMode::Anchored,
            switch: None,
        };
        assert_eq!(check_bracketing(&s, &env, 4.0).unwrap().status, Status::Fail);
        let rec = check_bracketing_with_budget(&s, &env, 4.0, 0.01).unwrap();
        assert_eq!((rec.status, rec.violations), (Status::Pass, 1));
    }
}
