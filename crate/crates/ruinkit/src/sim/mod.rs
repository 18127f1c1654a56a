//! Monte Carlo verification harness for the analytic solvers.
//!
//! Paths of the controlled wealth process are simulated to an exponential
//! death time, with the running minimum corrected by a Brownian bridge over
//! each step so that barrier hits inside a step are not missed. Randomness is
//! keyed by path index (one counter-based stream per path), so a given
//! `(seed, paths, dt)` produces bit-identical estimates no matter how many
//! worker threads run, and two strategies evaluated with the same seed see
//! the same noise (common random numbers).

mod engine;

use ruinkit_core::{Error, ProblemSpec, Result, Strategy};

use engine::{run_paths, Engine};

/// What a simulated path pays at the end; each variant names the quantity
/// whose expectation is being estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Probability that wealth reaches `x` before death.
    LifetimeRuin { x: f64 },
    /// Probability that wealth at death is at or below `x`, with wealth
    /// absorbed if it ever falls to `barrier`.
    RuinAtDeath { x: f64, barrier: f64 },
    /// Expected shortfall `(x - min wealth)+` at death, minimum unrestricted.
    LifetimeShortfall { x: f64 },
    /// Expected shortfall `(x - wealth)+` at death, with wealth absorbed at
    /// `barrier`.
    ShortfallAtDeath { x: f64, barrier: f64 },
}

impl Objective {
    /// Level whose first hit freezes the path, if the objective has one.
    fn ruin_level(&self) -> Option<f64> {
        match *self {
            Objective::LifetimeRuin { x } => Some(x),
            Objective::RuinAtDeath { barrier, .. } => Some(barrier),
            Objective::LifetimeShortfall { .. } => None,
            Objective::ShortfallAtDeath { barrier, .. } => Some(barrier),
        }
    }

    /// Payoff locked in the moment the ruin level is hit.
    fn frozen_payoff(&self) -> f64 {
        match *self {
            Objective::LifetimeRuin { .. } | Objective::RuinAtDeath { .. } => 1.0,
            Objective::LifetimeShortfall { .. } => 0.0,
            Objective::ShortfallAtDeath { x, barrier } => x - barrier,
        }
    }

    /// Payoff at death given wealth at death and the running minimum.
    fn death_payoff(&self, wealth: f64, low: f64) -> f64 {
        match *self {
            Objective::LifetimeRuin { .. } => 0.0,
            Objective::RuinAtDeath { x, .. } => {
                if wealth <= x {
                    1.0
                } else {
                    0.0
                }
            }
            Objective::LifetimeShortfall { x } => (x - low).max(0.0),
            Objective::ShortfallAtDeath { x, .. } => (x - wealth).max(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let (x, barrier) = match *self {
            Objective::LifetimeRuin { x } | Objective::LifetimeShortfall { x } => (x, None),
            Objective::RuinAtDeath { x, barrier } | Objective::ShortfallAtDeath { x, barrier } => {
                (x, Some(barrier))
            }
        };
        if !x.is_finite() {
            return Err(Error::InvalidSpec("objective level x must be finite"));
        }
        if let Some(b) = barrier {
            if !b.is_finite() {
                return Err(Error::InvalidSpec("objective barrier must be finite"));
            }
            if b >= x {
                return Err(Error::InvalidSpec("objective barrier must lie below x"));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            Objective::LifetimeRuin { .. } => "lifetime-ruin",
            Objective::RuinAtDeath { .. } => "ruin-at-death",
            Objective::LifetimeShortfall { .. } => "shortfall",
            Objective::ShortfallAtDeath { .. } => "shortfall-at-death",
        }
    }
}

/// Knobs of a simulation run.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub paths: usize,
    /// Step size in years.
    pub dt: f64,
    pub seed: u64,
    /// Paths still alive here are treated as dying at the cap. `None` means
    /// `10 / lambda`, at which the truncated mass is below `5e-5`.
    pub horizon_cap: Option<f64>,
    /// Simulate each stream twice with the Gaussian draws negated the second
    /// time, and average within the pair.
    pub antithetic: bool,
    /// Step the gap `c/r - W` by its exact lognormal transition instead of
    /// an Euler step. Only available for strategies proportional to the gap.
    pub exact_gbm: bool,
}

impl SimConfig {
    pub fn new(paths: usize, dt: f64, seed: u64) -> Self {
        SimConfig {
            paths,
            dt,
            seed,
            horizon_cap: None,
            antithetic: false,
            exact_gbm: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidSpec("paths must be at least 1"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidSpec("dt must be positive"));
        }
        if let Some(h) = self.horizon_cap {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidSpec("horizon cap must be positive"));
            }
        }
        Ok(())
    }
}

/// Outcome of a simulation run.
#[derive(Debug, Clone, Copy)]
pub struct SimResult {
    pub estimate: f64,
    pub standard_error: f64,
    /// Paths actually run; one more than requested when an odd count is
    /// rounded up to complete an antithetic pair.
    pub paths_used: usize,
    pub objective: Objective,
    /// Closed-form value of the same quantity, when the caller knows it.
    pub analytic_benchmark: Option<f64>,
}

impl SimResult {
    /// Distance from the benchmark in standard errors.
    pub fn z_score(&self) -> Option<f64> {
        let bench = self.analytic_benchmark?;
        if self.standard_error > 0.0 {
            Some((self.estimate - bench) / self.standard_error)
        } else if self.estimate == bench {
            Some(0.0)
        } else {
            None
        }
    }
}

/// One point of an empirical distribution function.
#[derive(Debug, Clone, Copy)]
pub struct CdfPoint {
    pub y: f64,
    pub probability: f64,
    /// Binomial standard error `sqrt(F (1 - F) / n)`.
    pub standard_error: f64,
}

/// One perturbed strategy in a dominance scan, compared path-by-path with
/// the base strategy under common random numbers.
#[derive(Debug, Clone)]
pub struct DominanceEntry {
    pub label: String,
    pub result: SimResult,
    /// Mean of `perturbed - base` payoffs.
    pub diff_mean: f64,
    pub diff_se: f64,
    /// True when the perturbed strategy scores lower (these objectives are
    /// all minimized) by more than three standard errors of the difference.
    pub beats_base: bool,
}

/// Result of [`strategy_dominance_scan`].
#[derive(Debug, Clone)]
pub struct DominanceReport {
    pub base: SimResult,
    pub entries: Vec<DominanceEntry>,
}

impl DominanceReport {
    /// True when no perturbation improved on the base strategy.
    pub fn base_undominated(&self) -> bool {
        self.entries.iter().all(|e| !e.beats_base)
    }
}

/// Estimates the expected payoff of `objective` when wealth starts at `w`
/// with running minimum `m` and follows `strategy` until death.
pub fn simulate_objective(
    spec: &ProblemSpec,
    strategy: &Strategy,
    objective: Objective,
    w: f64,
    m: f64,
    cfg: &SimConfig,
) -> Result<SimResult> {
    let engine = Engine::new(spec, strategy, objective, w, m, cfg)?;
    let run = run_paths(&engine)?;
    Ok(SimResult {
        estimate: run.estimate,
        standard_error: run.standard_error,
        paths_used: run.paths_used,
        objective,
        analytic_benchmark: None,
    })
}

/// Estimates `P(min wealth up to death <= y)` at each point of `y_grid`.
///
/// The minimum is tracked without any ruin absorption, as in the lifetime
/// shortfall problem, and starts at `min(w, m)`.
pub fn simulate_min_wealth_cdf(
    spec: &ProblemSpec,
    strategy: &Strategy,
    w: f64,
    m: f64,
    y_grid: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<CdfPoint>> {
    let objective = Objective::LifetimeShortfall { x: spec.x };
    let engine = Engine::new(spec, strategy, objective, w, m, cfg)?;
    let run = run_paths(&engine)?;
    let n = run.minima.len();
    let mut sorted = run.minima;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("minima are finite"));
    let points = y_grid
        .iter()
        .map(|&y| {
            let count = sorted.partition_point(|&v| v <= y);
            let prob = count as f64 / n as f64;
            CdfPoint {
                y,
                probability: prob,
                standard_error: (prob * (1.0 - prob) / n as f64).sqrt(),
            }
        })
        .collect();
    Ok(points)
}

/// Sorted per-path minimum wealth up to death, one entry per path.
///
/// Same walk as [`simulate_min_wealth_cdf`]; the raw sample supports exact
/// distribution tests instead of grid evaluations.
pub fn simulate_minima(
    spec: &ProblemSpec,
    strategy: &Strategy,
    w: f64,
    m: f64,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    let objective = Objective::LifetimeShortfall { x: spec.x };
    let engine = Engine::new(spec, strategy, objective, w, m, cfg)?;
    let run = run_paths(&engine)?;
    let mut sorted = run.minima;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("minima are finite"));
    Ok(sorted)
}

/// Runs `base` and every entry of `perturbed` on the same random numbers and
/// reports whether any perturbation improves the objective by more than
/// three standard errors of the paired difference.
///
/// When the base strategy respects the borrowing constraint
/// `pi <= max(0, w)` on the reachable wealth range, every perturbation must
/// too; an infeasible one is rejected before any path is simulated.
pub fn strategy_dominance_scan(
    spec: &ProblemSpec,
    objective: Objective,
    base: &Strategy,
    perturbed: &[Strategy],
    w: f64,
    m: f64,
    cfg: &SimConfig,
) -> Result<DominanceReport> {
    let base_engine = Engine::new(spec, base, objective, w, m, cfg)?;
    if respects_borrowing_cap(spec, objective, base, w) {
        for s in perturbed {
            if !respects_borrowing_cap(spec, objective, s, w) {
                return Err(Error::InvalidSpec(
                    "perturbed strategy borrows where the base strategy is constrained",
                ));
            }
        }
    }
    let base_run = run_paths(&base_engine)?;
    let base_units = unit_means(&base_run.payoffs, cfg.antithetic);
    let base_result = SimResult {
        estimate: base_run.estimate,
        standard_error: base_run.standard_error,
        paths_used: base_run.paths_used,
        objective,
        analytic_benchmark: None,
    };

    let mut entries = Vec::with_capacity(perturbed.len());
    for s in perturbed {
        let engine = Engine::new(spec, s, objective, w, m, cfg)?;
        let run = run_paths(&engine)?;
        let units = unit_means(&run.payoffs, cfg.antithetic);
        let (diff_mean, diff_se) = paired_diff(&units, &base_units);
        entries.push(DominanceEntry {
            label: s.label.clone(),
            result: SimResult {
                estimate: run.estimate,
                standard_error: run.standard_error,
                paths_used: run.paths_used,
                objective,
                analytic_benchmark: None,
            },
            diff_mean,
            diff_se,
            beats_base: diff_mean < -3.0 * diff_se && diff_se > 0.0,
        });
    }
    Ok(DominanceReport {
        base: base_result,
        entries,
    })
}

/// Whether `pi(w) <= max(0, w)` holds across the wealth range the simulation
/// can visit, up to a hair of rounding slack.
fn respects_borrowing_cap(
    spec: &ProblemSpec,
    objective: Objective,
    strategy: &Strategy,
    w0: f64,
) -> bool {
    let safe = spec.params.safe_level();
    let lo = objective.ruin_level().unwrap_or(spec.x).min(w0);
    let hi = safe;
    let n = 512;
    (0..=n).all(|i| {
        let w = lo + (hi - lo) * i as f64 / n as f64;
        strategy.allocation(w) <= w.max(0.0) + 1e-9 * (1.0 + w.abs())
    })
}

/// Pair means when antithetic (adjacent payoffs belong to one stream), the
/// payoffs themselves otherwise.
fn unit_means(payoffs: &[f64], antithetic: bool) -> Vec<f64> {
    if antithetic {
        payoffs
            .chunks_exact(2)
            .map(|pair| 0.5 * (pair[0] + pair[1]))
            .collect()
    } else {
        payoffs.to_vec()
    }
}

/// Mean and standard error of `a[i] - b[i]`.
fn paired_diff(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let mut sum = engine::Neumaier::new();
    let mut sum_sq = engine::Neumaier::new();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        sum.add(d);
        sum_sq.add(d * d);
    }
    let nf = n as f64;
    let mean = sum.total() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq.total() - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}
