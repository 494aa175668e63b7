//! Canned experiments: a synthetic least-squares run and the non-convex
//! quartic, each simulated, bounded, verified and written to disk.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    one_step_bounds, Admissibility, TheoremConstants, CLOSED_FORM_CONDITION, ONE_STEP_CONDITION,
};
use crate::constants::ProblemConstants;
use crate::engine::{monte_carlo_error, MonteCarloRun, RunConfig, ThetaSnapshot};
use crate::error::{Error, Result};
use crate::io::{self, BoundsTable};
use crate::linalg;
use crate::problem::{FiniteSum, ProblemSpec, SyntheticLinRegConfig, QUARTIC_LOCAL_MIN};
use crate::svg::{Chart, Curve};
use crate::verify::{self, CheckRecord, VerificationReport};

pub const DEFAULT_SEED: u64 = 20_240_917;
/// Step size used for the quartic in published experiments. It exceeds the
/// admissible range under the derived smoothness constant and is run for
/// comparison only.
pub const QUARTIC_LEGACY_ETA: f64 = 0.069;
pub const TRAP_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeName {
    Linreg,
    Quartic,
}

impl FromStr for RecipeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linreg" => Ok(RecipeName::Linreg),
            "quartic" => Ok(RecipeName::Quartic),
            other => Err(Error::Usage(format!("unknown recipe {other:?}; expected linreg or quartic"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Anchored,
    Propagated,
    ClosedForm,
    Asymptotics,
    Trap,
}

/// One simulated configuration inside a recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeRun {
    pub label: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecipe {
    pub name: RecipeName,
    pub problem: ProblemSpec,
    pub runs: Vec<RecipeRun>,
    pub checks: Vec<CheckKind>,
    pub se_mult: f64,
    pub tail_fraction: f64,
    /// Fraction of iterations a Monte-Carlo bracket may miss.
    pub violation_budget: f64,
}

impl ExperimentRecipe {
    pub fn new(name: RecipeName, seed: u64) -> Self {
        match name {
            RecipeName::Linreg => Self::linreg(seed),
            RecipeName::Quartic => Self::quartic(seed),
        }
    }

    /// `J = 30` unit-norm samples in `d = 2`, `θ* = (−1.27, −0.49)`, noise
    /// 0.1; `η = 0.01`, 50000 steps, 1000 trials from the origin.
    pub fn linreg(seed: u64) -> Self {
        let problem = ProblemSpec::SyntheticLinreg(SyntheticLinRegConfig {
            samples: 30,
            d: 2,
            theta_star: vec![-1.27, -0.49],
            noise_std: 0.1,
            seed,
        });
        Self {
            name: RecipeName::Linreg,
            problem,
            runs: vec![RecipeRun {
                label: "linreg".into(),
                config: RunConfig::new(0.01, 50_000, 1000, vec![0.0, 0.0], seed),
            }],
            checks: vec![CheckKind::Anchored, CheckKind::ClosedForm, CheckKind::Asymptotics],
            se_mult: verify::DEFAULT_SE_MULT,
            tail_fraction: verify::DEFAULT_TAIL_FRACTION,
            violation_budget: verify::MC_VIOLATION_BUDGET,
        }
    }

    /// Quartic from `θ0 = ±2`, 500 steps and 500 trials, at `η = 1/216` and
    /// at the legacy `η = 0.069`.
    pub fn quartic(seed: u64) -> Self {
        let mut runs = Vec::new();
        for (tag, eta) in [("admissible", 1.0 / 216.0), ("legacy", QUARTIC_LEGACY_ETA)] {
            for theta0 in [-2.0, 2.0] {
                let mut config = RunConfig::new(eta, 500, 500, vec![theta0], seed);
                config.snapshot_iters = (0..=500).step_by(10).collect();
                runs.push(RecipeRun {
                    label: format!("quartic_{tag}_theta0_{}", if theta0 < 0.0 { "neg2" } else { "pos2" }),
                    config,
                });
            }
        }
        Self {
            name: RecipeName::Quartic,
            problem: ProblemSpec::Quartic {},
            runs,
            checks: vec![CheckKind::Anchored, CheckKind::Propagated, CheckKind::Asymptotics, CheckKind::Trap],
            se_mult: verify::DEFAULT_SE_MULT,
            tail_fraction: verify::DEFAULT_TAIL_FRACTION,
            violation_budget: verify::MC_VIOLATION_BUDGET,
        }
    }
}

/// Final-iterate statistics around the spurious local minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapStats {
    pub target: f64,
    pub radius: f64,
    pub fraction_near: f64,
    pub median_final: f64,
}

impl TrapStats {
    pub fn from_snapshots(snapshots: &[ThetaSnapshot], k: usize, target: f64, radius: f64) -> Option<Self> {
        let mut finals: Vec<f64> = snapshots.iter().filter(|s| s.k == k).map(|s| s.theta[0]).collect();
        if finals.is_empty() {
            return None;
        }
        finals.sort_by(f64::total_cmp);
        let n = finals.len();
        let median = if n % 2 == 1 { finals[n / 2] } else { 0.5 * (finals[n / 2 - 1] + finals[n / 2]) };
        let near = finals.iter().filter(|t| (*t - target).abs() <= radius).count();
        Some(Self {
            target,
            radius,
            fraction_near: near as f64 / n as f64,
            median_final: median,
        })
    }

    pub fn trapped(&self) -> bool {
        self.fraction_near > 0.5 && (self.median_final - self.target).abs() <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub eta: f64,
    pub theta0: Vec<f64>,
    pub r0: f64,
    pub tail_mean: f64,
    pub tail_std_err: f64,
    pub z0_sq: f64,
    pub limsup_bound: Option<f64>,
    pub refined_limsup: Option<f64>,
    pub admissible: Admissibility,
    pub trap: Option<TrapStats>,
}

/// Everything one recipe run produced in memory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub label: String,
    pub run: MonteCarloRun,
    pub constants: TheoremConstants,
    pub bounds: BoundsTable,
    pub checks: Vec<CheckRecord>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone)]
pub struct RecipeOutput {
    pub problem: ProblemConstants,
    pub runs: Vec<RunOutput>,
    pub report: VerificationReport,
}

fn prefixed(label: &str, rec: CheckRecord) -> CheckRecord {
    let name = format!("{label}/{}", rec.name);
    rec.with_name(name)
}

fn inapplicable(label: &str, name: &str, condition: &str) -> CheckRecord {
    prefixed(label, CheckRecord::inapplicable(name, format!("requires {condition}")))
}

fn execute_run<P: FiniteSum + ?Sized>(
    recipe: &ExperimentRecipe,
    problem: &P,
    constants: &ProblemConstants,
    spec: &RecipeRun,
) -> Result<RunOutput> {
    let label = spec.label.as_str();
    let cfg = &spec.config;
    let optimum = &constants.theta_dagger;
    let run = monte_carlo_error(problem, optimum, cfg, label)?;
    let series = &run.series;
    let r0 = linalg::dist_sq(&cfg.theta0, optimum);
    let base = TheoremConstants::new(cfg.eta, constants)?;
    let c = base.theorem32_ledger(r0).unwrap_or(base);
    let (budget, se_mult) = (recipe.violation_budget, recipe.se_mult);
    let k_max = cfg.iterations;

    let mut bounds = BoundsTable::default();
    let mut checks = Vec::new();
    for kind in &recipe.checks {
        let rec = match kind {
            CheckKind::Anchored | CheckKind::Propagated if !c.admissible.one_step => {
                let name = if *kind == CheckKind::Anchored { "bracketing_anchored" } else { "bracketing_propagated" };
                inapplicable(label, name, ONE_STEP_CONDITION)
            }
            CheckKind::Anchored => {
                let env = one_step_bounds(series, &c)?;
                let rec = verify::check_bracketing_with_budget(series, &env, se_mult, budget)?;
                bounds.anchored = Some(env);
                prefixed(label, rec)
            }
            CheckKind::Propagated => {
                let env = c.propagated_envelopes(r0, k_max)?;
                let rec = verify::check_bracketing_with_budget(series, &env, se_mult, budget)?;
                bounds.propagated = Some(env);
                prefixed(label, rec)
            }
            CheckKind::ClosedForm => match c.closed_form_envelopes(k_max) {
                Ok(env) => {
                    let rec = verify::check_bracketing_with_budget(series, &env, se_mult, budget)?;
                    bounds.closed_form = Some(env);
                    prefixed(label, rec)
                }
                Err(_) => inapplicable(label, "bracketing_closed_form", CLOSED_FORM_CONDITION),
            },
            CheckKind::Asymptotics => {
                prefixed(label, verify::check_asymptotics(series, &c, recipe.tail_fraction, se_mult)?)
            }
            CheckKind::Trap => continue,
        };
        checks.push(rec);
    }

    let trap = if recipe.checks.contains(&CheckKind::Trap) && cfg.theta0[0] > 0.0 {
        TrapStats::from_snapshots(&run.snapshots, k_max, QUARTIC_LOCAL_MIN, TRAP_RADIUS)
    } else {
        None
    };
    if let Some(t) = &trap {
        checks.push(CheckRecord {
            name: format!("{label}/trap"),
            // trapping is only predicted inside the admissible step range
            status: match (c.admissible.one_step, t.trapped()) {
                (false, _) => verify::Status::Inapplicable,
                (true, true) => verify::Status::Pass,
                (true, false) => verify::Status::Fail,
            },
            slack: Some(t.fraction_near - 0.5),
            first_violation_k: None,
            tolerance: t.radius,
            violations: 0,
            checked: 1,
            reason: Some(format!(
                "{:.1}% of final iterates within {} of {}; median {}",
                100.0 * t.fraction_near,
                t.radius,
                t.target,
                t.median_final
            )),
        });
    }

    let window = ((series.len() as f64) * recipe.tail_fraction).ceil() as usize;
    let tail = series.len() - window..series.len();
    let summary = RunSummary {
        label: label.to_string(),
        eta: cfg.eta,
        theta0: cfg.theta0.clone(),
        r0,
        tail_mean: series.r_hat[tail.clone()].iter().sum::<f64>() / window as f64,
        tail_std_err: series.std_err[tail].iter().sum::<f64>() / window as f64,
        z0_sq: c.z0_sq(),
        limsup_bound: c.closed_form_limits().ok().map(|l| l.1),
        refined_limsup: c.refined_asymptotics().ok().map(|l| l.1),
        admissible: c.admissible,
        trap,
    };
    Ok(RunOutput {
        label: label.to_string(),
        run,
        constants: c,
        bounds,
        checks,
        summary,
    })
}

/// Builds the problem, runs every configuration and verifies it. Uses the
/// current rayon pool; see [`with_threads`].
pub fn run_recipe(recipe: &ExperimentRecipe) -> Result<RecipeOutput> {
    let problem = recipe.problem.build()?;
    let constants = ProblemConstants::derive(&problem)?;
    let runs = recipe
        .runs
        .iter()
        .map(|r| execute_run(recipe, &problem, &constants, r))
        .collect::<Result<Vec<_>>>()?;
    let report = verify::report(runs.iter().flat_map(|r| r.checks.iter().cloned()).collect())?;
    Ok(RecipeOutput {
        problem: constants,
        runs,
        report,
    })
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Usage("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn error_chart(run: &RunOutput) -> Chart {
    let mut chart = Chart::new(format!("{} (eta = {})", run.label, run.summary.eta), "k", "R_k estimate");
    chart.log_y = true;
    chart.curves.push(Curve::new("r_hat", &run.run.series.r_hat));
    if let Some(env) = &run.bounds.closed_form {
        chart.curves.push(Curve::new("closed-form upper", &env.upper).dashed());
        chart.curves.push(Curve::new("closed-form lower", &env.lower).dashed());
    }
    if let Some(env) = &run.bounds.propagated {
        chart.curves.push(Curve::new("propagated lower", &env.lower).dashed());
    }
    chart.rules.push(("z0^2".into(), run.summary.z0_sq));
    chart
}

fn theta_chart(run: &RunOutput) -> Option<Chart> {
    if run.run.snapshots.is_empty() || run.run.snapshots[0].theta.len() != 1 {
        return None;
    }
    let mut chart = Chart::new(format!("{} iterates", run.label), "k", "theta_k");
    let points = run.run.snapshots.iter().map(|s| (s.k as f64, s.theta[0])).collect();
    chart.scatter.push(("theta_k".into(), points));
    Some(chart)
}

/// Runs a recipe and writes its artifacts into `out_dir`: per run a series
/// CSV with metadata sidecar, a bounds CSV with constants sidecar and any
/// parameter snapshots; then `report.json` and `summary.json`. With `svg`
/// also error curves and iterate scatters.
pub fn reproduce(recipe: &ExperimentRecipe, out_dir: &Path, svg: bool) -> Result<(RecipeOutput, Vec<PathBuf>)> {
    let out = run_recipe(recipe)?;
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut push = |p: PathBuf| {
        files.push(p.clone());
        p
    };
    io::write_json(&push(out_dir.join("problem_constants.json")), &out.problem)?;
    for run in &out.runs {
        let series_path = push(out_dir.join(format!("{}.csv", run.label)));
        io::save_series(&series_path, &run.run.series)?;
        push(io::sidecar_path(&series_path));
        let bounds_path = push(out_dir.join(format!("{}_bounds.csv", run.label)));
        io::save_bounds(&bounds_path, &run.bounds)?;
        io::write_json(&push(io::sidecar_path(&bounds_path)), &run.constants)?;
        if !run.run.snapshots.is_empty() {
            io::save_theta(&push(out_dir.join(format!("{}_theta.csv", run.label))), &run.run.snapshots)?;
        }
        if svg {
            std::fs::write(push(out_dir.join(format!("{}.svg", run.label))), error_chart(run).render())?;
            if let Some(chart) = theta_chart(run) {
                std::fs::write(push(out_dir.join(format!("{}_theta.svg", run.label))), chart.render())?;
            }
        }
    }
    std::fs::write(push(out_dir.join("report.json")), out.report.to_json() + "\n")?;
    let summaries: Vec<&RunSummary> = out.runs.iter().map(|r| &r.summary).collect();
    io::write_json(&push(out_dir.join("summary.json")), &summaries)?;
    Ok((out, files))
}
