//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 when a
//! check fails or SGD diverges, 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bounds::{one_step_bounds, TheoremConstants, CLOSED_FORM_CONDITION, ONE_STEP_CONDITION};
use crate::constants::ProblemConstants;
use crate::engine::{exact_error, exact_error_quadratic_for, monte_carlo_error, ErrorSeries, RunConfig};
use crate::error::{Error, Result};
use crate::io::{self, BoundsTable};
use crate::linalg;
use crate::problem::{FiniteSum, Problem, ProblemSpec};
use crate::recipe::{self, ExperimentRecipe, RecipeName, DEFAULT_SEED};
use crate::verify::{self, CheckRecord};

#[derive(Debug, Parser)]
#[command(name = "sgd-floor", version, about = "Error floors of constant step-size SGD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundsMode {
    Prop,
    Cf,
    Anchored,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMethod {
    Enumerate,
    Quadratic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the smoothness, convexity and noise constants of a problem as JSON.
    Constants {
        /// Problem description (JSON).
        spec: PathBuf,
    },
    /// Monte-Carlo estimate of the expected squared error per iteration.
    Simulate {
        spec: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        iters: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Initial parameter, comma separated; zeros by default.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        theta0: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
        /// Iterations at which to record every trial's parameter.
        #[arg(long, value_delimiter = ',')]
        dump_theta: Option<Vec<usize>>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Bound envelopes for the error series.
    Bounds {
        spec: PathBuf,
        #[arg(long)]
        eta: f64,
        /// Initial squared error; overrides the one implied by --theta0.
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        theta0: Option<Vec<f64>>,
        /// Number of steps; defaults to the length of --series.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, value_enum, default_value_t = BoundsMode::All)]
        mode: BoundsMode,
        /// Observed series for anchored one-step brackets.
        #[arg(long, alias = "anchored")]
        series: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a series against bounds and asymptotic limits; prints a JSON report.
    Verify {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        bounds: PathBuf,
        /// Constants JSON written next to the bounds file; that sidecar by default.
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long, default_value_t = verify::DEFAULT_SE_MULT)]
        se_mult: f64,
        /// Fraction of the series used for tail averages.
        #[arg(long, default_value_t = verify::DEFAULT_TAIL_FRACTION)]
        tail: f64,
        /// Fraction of iterations a Monte-Carlo series may fall outside a bracket.
        #[arg(long, default_value_t = verify::MC_VIOLATION_BUDGET)]
        budget: f64,
    },
    /// Rerun a canned experiment end to end.
    Reproduce {
        /// linreg or quartic.
        name: String,
        #[arg(long, default_value = "reproduce")]
        out_dir: PathBuf,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Exact error series without sampling.
    Oracle {
        spec: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        theta0: Option<Vec<f64>>,
        #[arg(long)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = OracleMethod::Quadratic)]
        method: OracleMethod,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_problem(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    ProblemSpec::from_json(&text)
        .map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?
        .build()
}

fn initial_point(theta0: Option<Vec<f64>>, problem: &Problem) -> Result<Vec<f64>> {
    let theta0 = theta0.unwrap_or_else(|| vec![0.0; problem.dim()]);
    problem.check_dim(&theta0)?;
    Ok(theta0)
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Constants { spec } => {
            let c = ProblemConstants::derive(&load_problem(&spec)?)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&c)?)?;
            Ok(0)
        }
        Command::Simulate { spec, eta, iters, trials, seed, theta0, out: path, dump_theta, threads } => {
            let problem = load_problem(&spec)?;
            let constants = ProblemConstants::derive(&problem)?;
            let mut cfg = RunConfig::new(eta, iters, trials, initial_point(theta0, &problem)?, seed);
            cfg.snapshot_iters = dump_theta.clone().unwrap_or_default();
            let run = recipe::with_threads(threads, || {
                monte_carlo_error(&problem, &constants.theta_dagger, &cfg, problem.kind())
            })??;
            if run.series.meta.single_trial_warning {
                writeln!(err, "warning: a single trial gives no standard error; std_err is 0")?;
            }
            io::save_series(&path, &run.series)?;
            if dump_theta.is_some() {
                io::save_theta(&path.with_extension("theta.csv"), &run.snapshots)?;
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&run.series.meta)?)?;
            Ok(0)
        }
        Command::Bounds { spec, eta, r0, theta0, iters, mode, series, out: path } => {
            let problem = load_problem(&spec)?;
            let constants = ProblemConstants::derive(&problem)?;
            let observed = series.as_deref().map(io::load_series).transpose()?;
            let r0 = match (r0, theta0, &observed) {
                (Some(r0), _, _) => r0,
                (None, Some(t), _) => linalg::dist_sq(&initial_point(Some(t), &problem)?, &constants.theta_dagger),
                (None, None, Some(s)) => s.r_hat[0],
                (None, None, None) => {
                    linalg::dist_sq(&initial_point(None, &problem)?, &constants.theta_dagger)
                }
            };
            let k_max = match (iters, &observed) {
                (Some(k), _) => k,
                (None, Some(s)) => s.len() - 1,
                (None, None) => return Err(Error::Usage("--iters is required without --series".into())),
            };
            let base = TheoremConstants::new(eta, &constants)?;
            if !base.admissible.one_step {
                return Err(Error::Inadmissible { condition: ONE_STEP_CONDITION });
            }
            let c = match base.theorem32_ledger(r0) {
                Ok(c) => c,
                Err(_) if matches!(mode, BoundsMode::Prop | BoundsMode::Anchored | BoundsMode::All) => base,
                Err(e) => return Err(e),
            };
            let mut table = BoundsTable::default();
            if matches!(mode, BoundsMode::Prop | BoundsMode::All) {
                table.propagated = Some(c.propagated_envelopes(r0, k_max)?);
            }
            if matches!(mode, BoundsMode::Cf | BoundsMode::All) && c.ledger.is_some() {
                table.closed_form = Some(c.closed_form_envelopes(k_max)?);
            } else if mode == BoundsMode::Cf {
                return Err(Error::Inadmissible { condition: CLOSED_FORM_CONDITION });
            }
            match (&observed, mode) {
                (Some(s), BoundsMode::Anchored | BoundsMode::All) => {
                    if s.len() != k_max + 1 {
                        return Err(Error::Usage(format!(
                            "series has {} entries but --iters gives {}",
                            s.len(),
                            k_max + 1
                        )));
                    }
                    table.anchored = Some(one_step_bounds(s, &c)?);
                }
                (None, BoundsMode::Anchored) => {
                    return Err(Error::Usage("anchored mode requires --series".into()))
                }
                _ => {}
            }
            io::save_bounds(&path, &table)?;
            io::write_json(&io::sidecar_path(&path), &c)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&c)?)?;
            Ok(0)
        }
        Command::Verify { series, bounds, constants, se_mult, tail, budget } => {
            let s = io::load_series(&series)?;
            let table = io::load_bounds(&bounds)?;
            let constants_path = constants.unwrap_or_else(|| io::sidecar_path(&bounds));
            let c: TheoremConstants = io::read_json(&constants_path)
                .map_err(|e| Error::Usage(format!("{}: {e}", constants_path.display())))?;
            if table.len() != s.len() {
                return Err(Error::Usage(format!(
                    "series has {} entries, bounds have {}",
                    s.len(),
                    table.len()
                )));
            }
            let mut checks = Vec::new();
            for env in table.envelopes() {
                checks.push(verify::check_bracketing_with_budget(&s, env, se_mult, budget)?);
            }
            checks.push(match verify::check_asymptotics(&s, &c, tail, se_mult) {
                Ok(rec) => rec,
                Err(Error::Usage(msg)) => CheckRecord::inapplicable("asymptotics", msg),
                Err(e) => return Err(e),
            });
            if s.is_exact() {
                checks.push(verify::check_recursion(&s, &c));
            }
            let report = verify::report(checks)?;
            writeln!(out, "{}", report.to_json())?;
            Ok(report.exit_code())
        }
        Command::Reproduce { name, out_dir, svg, threads, seed } => {
            let name: RecipeName = name.parse()?;
            let recipe = ExperimentRecipe::new(name, seed);
            let (output, files) = recipe::with_threads(threads, || recipe::reproduce(&recipe, &out_dir, svg))??;
            for run in &output.runs {
                let s = &run.summary;
                writeln!(
                    out,
                    "{}: eta={} tail_mean={} z0_sq={} limsup_bound={:?}",
                    s.label, s.eta, s.tail_mean, s.z0_sq, s.limsup_bound
                )?;
            }
            writeln!(out, "wrote {} files to {}", files.len(), out_dir.display())?;
            writeln!(out, "{}", output.report.to_json())?;
            Ok(output.report.exit_code())
        }
        Command::Oracle { spec, eta, theta0, kmax, method, out: path } => {
            let problem = load_problem(&spec)?;
            let optimum = ProblemConstants::derive(&problem)?.theta_dagger;
            let theta0 = initial_point(theta0, &problem)?;
            let r = match method {
                OracleMethod::Enumerate => exact_error(&problem, &optimum, eta, &theta0, kmax)?,
                OracleMethod::Quadratic => exact_error_quadratic_for(&problem, &optimum, eta, &theta0, kmax)?,
            };
            let series = ErrorSeries::exact(r, problem.kind(), eta);
            io::save_series(&path, &series)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&series.meta)?)?;
            Ok(0)
        }
    }
}
