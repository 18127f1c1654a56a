//! `ruinkit`: ruin and shortfall minimization for a retiree who consumes at a
//! fixed rate, with Monte Carlo verification.
//!
//! Wealth follows `dW = (r W + (mu - r) pi - c) dt + sigma pi dB` until an
//! exponential death time. Each subcommand either evaluates a closed-form or
//! numerically solved quantity, or simulates paths to check one.
//!
//! All numbers are printed with ten significant digits, ties to even, `.` as
//! the decimal point. Identical invocations produce byte-identical output.
//! Exit codes: 2 for a command line the parser rejects, 3 for an invalid
//! problem specification or evaluation point, 4 for a solver or simulation
//! failure, 1 for anything environmental.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ruinkit::config::{self, FileConfig};
use ruinkit::error::CliError;
use ruinkit::output::fmt10;
use ruinkit::sim::{simulate_objective, Objective, SimConfig};
use ruinkit_core::{
    derive_constants, lifetime_ruin, phi, pi_psi, pi_V, psi, psi_nb, ruin_at_death, solve_psi_nb,
    solve_U, value_shortfall, value_shortfall_nb, MarketParams, ProblemSpec, Strategy, U_value,
};

/// Default market: the worked example used throughout the documentation.
const DEFAULT_MU: f64 = 0.06;
const DEFAULT_R: f64 = 0.02;
const DEFAULT_SIGMA: f64 = 0.20;
const DEFAULT_LAMBDA: f64 = 0.04;
const DEFAULT_C: f64 = 1.0;
const DEFAULT_X: f64 = 0.0;
const DEFAULT_BARRIER: f64 = -200.0;

/// Tabulation length for the strategies that have no closed form.
const STRATEGY_SAMPLES: usize = 8193;

#[derive(Parser)]
#[command(
    name = "ruinkit",
    version,
    about = "Ruin-minimizing investment: closed forms, solved boundaries, and Monte Carlo checks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

/// Market and problem parameters, shared by every subcommand. Values come
/// from built-in defaults, then the config file, then these flags, later
/// sources winning.
#[derive(Args, Debug)]
struct SpecArgs {
    /// Flat `key = value` file with any of: mu, r, sigma, lambda, c, x, M, mode.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Drift of the risky asset.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Riskless rate.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Volatility of the risky asset.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Hazard rate of the exponential death time.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Consumption rate.
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Ruin level.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Lower wealth barrier for the at-death problems.
    #[arg(long = "M", allow_negative_numbers = true)]
    barrier: Option<f64>,
    /// Treatment of negative wealth under the borrowing constraint:
    /// `welfare` (consumption stops at zero) or `borrow` (consume on credit).
    #[arg(long)]
    mode: Option<String>,
}

impl SpecArgs {
    fn resolve(&self) -> Result<ProblemSpec, CliError> {
        let file = match &self.config {
            Some(path) => config::load(path)?,
            None => FileConfig::default(),
        };
        let params = MarketParams::new(
            self.mu.or(file.mu).unwrap_or(DEFAULT_MU),
            self.r.or(file.r).unwrap_or(DEFAULT_R),
            self.sigma.or(file.sigma).unwrap_or(DEFAULT_SIGMA),
            self.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA),
            self.c.or(file.c).unwrap_or(DEFAULT_C),
        )?;
        let x = self.x.or(file.x).unwrap_or(DEFAULT_X);
        let barrier = self.barrier.or(file.barrier).unwrap_or(DEFAULT_BARRIER);
        let mut spec = ProblemSpec::new(params, x)?.with_barrier(barrier)?;
        let mode = match &self.mode {
            Some(name) => Some(config::parse_mode(name)?),
            None => file.mode,
        };
        if let Some(mode) = mode {
            spec = spec.with_mode(mode);
        }
        Ok(spec)
    }
}

/// Which quantity is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Criterion {
    /// Probability of ruin (wealth reaching x) during life.
    LifetimeRuin,
    /// Probability that wealth at death is at or below x.
    RuinAtDeath,
    /// Expected shortfall below x of the lifetime minimum wealth.
    Shortfall,
    /// Expected shortfall below x of wealth at death.
    ShortfallAtDeath,
}

impl Criterion {
    fn objective(self, spec: &ProblemSpec) -> Objective {
        let barrier = spec.barrier.unwrap_or(DEFAULT_BARRIER);
        match self {
            Criterion::LifetimeRuin => Objective::LifetimeRuin { x: spec.x },
            Criterion::RuinAtDeath => Objective::RuinAtDeath { x: spec.x, barrier },
            Criterion::Shortfall => Objective::LifetimeShortfall { x: spec.x },
            Criterion::ShortfallAtDeath => Objective::ShortfallAtDeath { x: spec.x, barrier },
        }
    }
}

/// Which feedback rule to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyKind {
    /// Minimizes lifetime ruin (also optimal for lifetime shortfall).
    Psi,
    /// Minimizes ruin at death.
    Phi,
    /// Minimizes shortfall at death.
    #[value(name = "U", alias = "u")]
    U,
    /// Lifetime-ruin minimizer under the no-borrowing constraint.
    Nb,
    /// Piecewise-linear rule read from --strategy-file.
    File,
}

#[derive(Subcommand)]
enum Command {
    /// Print the constants derived from the market parameters.
    Params {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Evaluate a value function at one point (w, m).
    Value {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// Current wealth.
        #[arg(long, allow_negative_numbers = true)]
        w: f64,
        /// Running minimum wealth so far; defaults to w.
        #[arg(long, allow_negative_numbers = true)]
        m: Option<f64>,
        /// Use the no-borrowing variant (lifetime-ruin and shortfall only).
        #[arg(long)]
        no_borrow: bool,
    },
    /// Tabulate an optimal allocation over a wealth grid (CSV).
    Strategy {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// Grid start; defaults to the barrier M for the at-death criteria
        /// and to x otherwise.
        #[arg(long, allow_negative_numbers = true)]
        w_min: Option<f64>,
        /// Grid end; defaults to c/r - step.
        #[arg(long, allow_negative_numbers = true)]
        w_max: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        /// Tabulate the constrained rule instead (lifetime-ruin/shortfall).
        #[arg(long)]
        no_borrow: bool,
        /// Output file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// CSV comparing the two ruin-minimizing allocations, columns
    /// `w,pi_phi,pi_psi`, over [M, c/r - step] plus two extra rows at
    /// x - 1e-6 and x + 1e-6 that bracket the jump of pi_phi at x.
    Figure1 {
        #[command(flatten)]
        spec: SpecArgs,
        /// Grid start; defaults to the barrier M.
        #[arg(long, allow_negative_numbers = true)]
        w_min: Option<f64>,
        /// Grid end; defaults to c/r - step.
        #[arg(long, allow_negative_numbers = true)]
        w_max: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        /// Output file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of a criterion under a chosen strategy (JSON).
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// Starting wealth.
        #[arg(long, allow_negative_numbers = true)]
        w: f64,
        /// Running minimum at the start; defaults to w.
        #[arg(long, allow_negative_numbers = true)]
        m: Option<f64>,
        #[arg(long, default_value_t = 200_000)]
        paths: usize,
        /// Step size in years.
        #[arg(long, default_value_t = 1.0 / 250.0)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Feedback rule to follow; defaults to the optimizer of the
        /// requested criterion.
        #[arg(long, value_enum)]
        strategy: Option<StrategyKind>,
        /// Two-column CSV `w,pi` for --strategy file, interpolated linearly.
        #[arg(long, value_name = "PATH")]
        strategy_file: Option<PathBuf>,
        /// Pair each path with a Gaussian-negated twin.
        #[arg(long)]
        antithetic: bool,
        /// Step the gap c/r - W by its exact lognormal law (gap-proportional
        /// strategies only).
        #[arg(long)]
        exact_gbm: bool,
        /// Treat paths alive at this time as dying then; defaults to
        /// 10 / lambda.
        #[arg(long)]
        horizon_cap: Option<f64>,
        /// Output file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Tabulate a value function over a wealth grid (CSV).
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// Grid start; defaults to x (x + step with --no-borrow).
        #[arg(long, allow_negative_numbers = true)]
        w_min: Option<f64>,
        /// Grid end; defaults to c/r - step.
        #[arg(long, allow_negative_numbers = true)]
        w_max: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        /// Fixed running minimum for every row; defaults to m = w.
        #[arg(long, allow_negative_numbers = true)]
        m: Option<f64>,
        /// Emit the constrained values `w,m,psi_nb,V_nb,pi_nb` instead.
        #[arg(long)]
        no_borrow: bool,
        /// Output file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Params { spec } => {
            let spec = spec.resolve()?;
            let k = derive_constants(&spec.params)?;
            let mut text = String::new();
            for (name, value) in [
                ("delta", k.delta),
                ("p", k.p),
                ("b1", k.b1),
                ("b2", k.b2),
                ("xi", k.xi),
                ("w_l", k.w_l),
                ("safe", k.safe),
            ] {
                text.push_str(&format!("{name} = {}\n", fmt10(value)));
            }
            emit(None, &text)
        }
        Command::Value {
            spec,
            criterion,
            w,
            m,
            no_borrow,
        } => {
            let spec = spec.resolve()?;
            let m = m.unwrap_or(w);
            let value = evaluate(&spec, criterion, w, m, no_borrow)?;
            emit(None, &format!("{}\n", fmt10(value)))
        }
        Command::Strategy {
            spec,
            criterion,
            w_min,
            w_max,
            step,
            no_borrow,
            out,
        } => {
            let spec = spec.resolve()?;
            let text = strategy_table(&spec, criterion, w_min, w_max, step, no_borrow)?;
            emit(out.as_deref(), &text)
        }
        Command::Figure1 {
            spec,
            w_min,
            w_max,
            step,
            out,
        } => {
            let spec = spec.resolve()?;
            let text = figure1_table(&spec, w_min, w_max, step)?;
            emit(out.as_deref(), &text)
        }
        Command::Simulate {
            spec,
            criterion,
            w,
            m,
            paths,
            dt,
            seed,
            strategy,
            strategy_file,
            antithetic,
            exact_gbm,
            horizon_cap,
            out,
        } => {
            let spec = spec.resolve()?;
            let m = m.unwrap_or(w);
            let kind = strategy.unwrap_or(match criterion {
                Criterion::LifetimeRuin | Criterion::Shortfall => StrategyKind::Psi,
                Criterion::RuinAtDeath => StrategyKind::Phi,
                Criterion::ShortfallAtDeath => StrategyKind::U,
            });
            let rule = build_strategy(&spec, kind, strategy_file.as_deref())?;
            let mut cfg = SimConfig::new(paths, dt, seed);
            cfg.antithetic = antithetic;
            cfg.exact_gbm = exact_gbm;
            cfg.horizon_cap = horizon_cap;
            let objective = criterion.objective(&spec);
            let mut result = simulate_objective(&spec, &rule, objective, w, m, &cfg)?;
            result.analytic_benchmark = benchmark(&spec, kind, criterion, w, m);
            let bench = result
                .analytic_benchmark
                .map(fmt10)
                .unwrap_or_else(|| "null".to_owned());
            let z = result
                .z_score()
                .map(fmt10)
                .unwrap_or_else(|| "null".to_owned());
            let text = format!(
                "{{\"criterion\":\"{}\",\"strategy\":\"{}\",\"estimate\":{},\"se\":{},\"paths\":{},\"benchmark\":{},\"z_score\":{}}}\n",
                objective.label(),
                rule.label,
                fmt10(result.estimate),
                fmt10(result.standard_error),
                result.paths_used,
                bench,
                z,
            );
            emit(out.as_deref(), &text)
        }
        Command::Sweep {
            spec,
            criterion,
            w_min,
            w_max,
            step,
            m,
            no_borrow,
            out,
        } => {
            let spec = spec.resolve()?;
            let text = sweep_table(&spec, criterion, w_min, w_max, step, m, no_borrow)?;
            emit(out.as_deref(), &text)
        }
    }
}

/// One value-function evaluation.
fn evaluate(
    spec: &ProblemSpec,
    criterion: Criterion,
    w: f64,
    m: f64,
    no_borrow: bool,
) -> Result<f64, CliError> {
    if no_borrow {
        return match criterion {
            Criterion::LifetimeRuin => Ok(psi_nb(spec, w, m)?),
            Criterion::Shortfall => Ok(value_shortfall_nb(spec, w, m, spec.x)?),
            _ => Err(CliError::Spec(
                "the no-borrow variant exists only for lifetime-ruin and shortfall".to_owned(),
            )),
        };
    }
    let value = match criterion {
        Criterion::LifetimeRuin => psi(spec, w, m)?,
        Criterion::RuinAtDeath => phi(spec, w, m)?,
        Criterion::Shortfall => value_shortfall(spec, w, m)?,
        Criterion::ShortfallAtDeath => U_value(spec, w, m)?,
    };
    Ok(value)
}

/// Inclusive float grid `w_min, w_min + step, ...` up to `w_max`.
fn grid(w_min: f64, w_max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Spec("step must be positive".to_owned()));
    }
    if !(w_min.is_finite() && w_max.is_finite()) || w_max < w_min {
        return Err(CliError::Spec(
            "need finite w-min <= w-max for the grid".to_owned(),
        ));
    }
    let mut points = Vec::new();
    let mut i = 0u64;
    loop {
        let w = w_min + i as f64 * step;
        if w > w_max + 1e-9 * step {
            break;
        }
        points.push(w);
        i += 1;
    }
    Ok(points)
}

fn strategy_table(
    spec: &ProblemSpec,
    criterion: Criterion,
    w_min: Option<f64>,
    w_max: Option<f64>,
    step: f64,
    no_borrow: bool,
) -> Result<String, CliError> {
    let safe = spec.params.safe_level();
    let barrier = spec.barrier.unwrap_or(DEFAULT_BARRIER);
    let death = matches!(
        criterion,
        Criterion::RuinAtDeath | Criterion::ShortfallAtDeath
    );
    let default_min = if no_borrow {
        spec.x + step
    } else if death {
        barrier
    } else {
        spec.x
    };
    let w_min = w_min.unwrap_or(default_min);
    let w_max = w_max.unwrap_or(safe - step);
    let points = grid(w_min, w_max, step)?;

    if no_borrow {
        if death {
            return Err(CliError::Spec(
                "the no-borrow variant exists only for lifetime-ruin and shortfall".to_owned(),
            ));
        }
        let sol = solve_psi_nb(spec)?;
        let mut text = String::from("w,pi_nb\n");
        for &w in &points {
            text.push_str(&format!("{},{}\n", fmt10(w), fmt10(sol.allocation(w)?)));
        }
        return Ok(text);
    }

    match criterion {
        Criterion::LifetimeRuin => {
            let mut text = String::from("w,pi_psi\n");
            for &w in &points {
                text.push_str(&format!("{},{}\n", fmt10(w), fmt10(pi_psi(spec, w)?)));
            }
            Ok(text)
        }
        Criterion::Shortfall => {
            let mut text = String::from("w,pi_V\n");
            for &w in &points {
                text.push_str(&format!("{},{}\n", fmt10(w), fmt10(pi_V(spec, w)?)));
            }
            Ok(text)
        }
        Criterion::RuinAtDeath => {
            let sol = ruin_at_death::solve(spec)?;
            let mut text = String::from("w,pi_phi,pi_psi\n");
            for &w in &points {
                let phi_pi = if w <= barrier {
                    barrier_allocation(spec)
                } else {
                    sol.allocation(w)?
                };
                text.push_str(&format!(
                    "{},{},{}\n",
                    fmt10(w),
                    fmt10(phi_pi),
                    fmt10(pi_psi(spec, w)?)
                ));
            }
            Ok(text)
        }
        Criterion::ShortfallAtDeath => {
            let sol = solve_U(spec)?;
            let mut text = String::from("w,pi_U,pi_psi\n");
            for &w in &points {
                let u_pi = if w <= barrier {
                    barrier_allocation(spec)
                } else {
                    sol.allocation(w)?
                };
                text.push_str(&format!(
                    "{},{},{}\n",
                    fmt10(w),
                    fmt10(u_pi),
                    fmt10(pi_psi(spec, w)?)
                ));
            }
            Ok(text)
        }
    }
}

/// One-sided limit of the at-death allocations as wealth falls to the
/// barrier: `2 (c - r M) / (mu - r)`, read off the dual equation there.
fn barrier_allocation(spec: &ProblemSpec) -> f64 {
    let p = &spec.params;
    let barrier = spec.barrier.unwrap_or(DEFAULT_BARRIER);
    2.0 * (p.c - p.r * barrier) / (p.mu - p.r)
}

fn figure1_table(
    spec: &ProblemSpec,
    w_min: Option<f64>,
    w_max: Option<f64>,
    step: f64,
) -> Result<String, CliError> {
    let safe = spec.params.safe_level();
    let barrier = spec.barrier.unwrap_or(DEFAULT_BARRIER);
    let w_min = w_min.unwrap_or(barrier);
    let w_max = w_max.unwrap_or(safe - step);
    let mut points = grid(w_min, w_max, step)?;
    // Two extra samples bracketing the jump of pi_phi at x.
    for extra in [spec.x - 1e-6, spec.x + 1e-6] {
        if extra > w_min && extra < w_max {
            points.push(extra);
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));

    let sol = ruin_at_death::solve(spec)?;
    let mut text = String::from("w,pi_phi,pi_psi\n");
    for &w in &points {
        let phi_pi = if w <= barrier {
            barrier_allocation(spec)
        } else {
            sol.allocation(w)?
        };
        text.push_str(&format!(
            "{},{},{}\n",
            fmt10(w),
            fmt10(phi_pi),
            fmt10(pi_psi(spec, w)?)
        ));
    }
    Ok(text)
}

fn sweep_table(
    spec: &ProblemSpec,
    criterion: Criterion,
    w_min: Option<f64>,
    w_max: Option<f64>,
    step: f64,
    m_fixed: Option<f64>,
    no_borrow: bool,
) -> Result<String, CliError> {
    let safe = spec.params.safe_level();
    let w_min = w_min.unwrap_or(if no_borrow { spec.x + step } else { spec.x });
    let w_max = w_max.unwrap_or(safe - step);
    let points = grid(w_min, w_max, step)?;

    if no_borrow {
        let sol = solve_psi_nb(spec)?;
        let mut text = String::from("w,m,psi_nb,V_nb,pi_nb\n");
        for &w in &points {
            let m = m_fixed.unwrap_or(w);
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt10(w),
                fmt10(m),
                fmt10(sol.value(w, m)?),
                fmt10(sol.shortfall(w, m, spec.x)?),
                fmt10(sol.allocation(w)?)
            ));
        }
        return Ok(text);
    }

    let mut text = String::from("w,m,value\n");
    for &w in &points {
        let m = m_fixed.unwrap_or(w);
        let value = evaluate(spec, criterion, w, m, false)?;
        text.push_str(&format!(
            "{},{},{}\n",
            fmt10(w),
            fmt10(m),
            fmt10(value)
        ));
    }
    Ok(text)
}

/// Builds the feedback rule to simulate.
fn build_strategy(
    spec: &ProblemSpec,
    kind: StrategyKind,
    file: Option<&Path>,
) -> Result<Strategy, CliError> {
    match kind {
        StrategyKind::Psi => Ok(lifetime_ruin::strategy(spec)?),
        StrategyKind::Phi => Ok(ruin_at_death::solve(spec)?.strategy(STRATEGY_SAMPLES)?),
        StrategyKind::U => Ok(solve_U(spec)?.strategy(STRATEGY_SAMPLES)?),
        StrategyKind::Nb => Ok(solve_psi_nb(spec)?.strategy()),
        StrategyKind::File => {
            let path = file.ok_or_else(|| {
                CliError::Spec("--strategy file needs --strategy-file <PATH>".to_owned())
            })?;
            load_strategy_file(path)
        }
    }
}

/// Reads a two-column CSV `w,pi`; an optional first line `w,pi` header is
/// skipped. Rows must be sorted by wealth.
fn load_strategy_file(path: &Path) -> Result<Strategy, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cells = line.split(',');
        let parsed = match (cells.next(), cells.next(), cells.next()) {
            (Some(a), Some(b), None) => a
                .trim()
                .parse::<f64>()
                .and_then(|w| b.trim().parse::<f64>().map(|pi| (w, pi)))
                .ok(),
            _ => None,
        };
        match parsed {
            Some(point) => points.push(point),
            None if idx == 0 => continue,
            None => {
                return Err(CliError::Spec(format!(
                    "strategy file line {}: expected `w,pi`",
                    idx + 1
                )));
            }
        }
    }
    if points.len() < 2 {
        return Err(CliError::Spec(
            "strategy file needs at least two `w,pi` rows".to_owned(),
        ));
    }
    if points.windows(2).any(|p| p[0].0 > p[1].0) {
        return Err(CliError::Spec(
            "strategy file rows must be sorted by wealth".to_owned(),
        ));
    }
    Ok(Strategy::piecewise_linear("file", points))
}

/// Closed-form value of the criterion when the chosen rule optimizes it.
fn benchmark(
    spec: &ProblemSpec,
    kind: StrategyKind,
    criterion: Criterion,
    w: f64,
    m: f64,
) -> Option<f64> {
    match (kind, criterion) {
        (StrategyKind::Psi, Criterion::LifetimeRuin) => psi(spec, w, m).ok(),
        (StrategyKind::Psi, Criterion::Shortfall) => value_shortfall(spec, w, m).ok(),
        (StrategyKind::Phi, Criterion::RuinAtDeath) => phi(spec, w, m).ok(),
        (StrategyKind::U, Criterion::ShortfallAtDeath) => U_value(spec, w, m).ok(),
        (StrategyKind::Nb, Criterion::LifetimeRuin) => psi_nb(spec, w, m).ok(),
        (StrategyKind::Nb, Criterion::Shortfall) => {
            value_shortfall_nb(spec, w, m, spec.x).ok()
        }
        _ => None,
    }
}

/// Writes to the file when given, stdout otherwise.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
