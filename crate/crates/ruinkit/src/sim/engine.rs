//! Path generation and the deterministic parallel block runner.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use ruinkit_core::{Error, MarketParams, ProblemSpec, Result, Strategy};

use super::{Objective, SimConfig};

/// Paths per block. Blocks are the unit of work handed to worker threads and
/// the unit of deterministic summation: block sums are combined in block
/// order, so the result does not depend on how many workers ran.
const BLOCK_PATHS: usize = 4096;

/// Wealth within `1e-3 * (c/r)` of the safe level is treated as having
/// reached it: the optimal rules invest nothing there, wealth can only drift
/// upward, and the path is settled without simulating to the death time.
const SAFE_BAND_FRACTION: f64 = 1e-3;

pub(crate) struct Engine<'a> {
    params: MarketParams,
    strategy: &'a Strategy,
    objective: Objective,
    w0: f64,
    m0: f64,
    cfg: SimConfig,
    horizon: f64,
    safe: f64,
    band: f64,
    sqrt_dt: f64,
    /// `(nu, s)` of the lognormal gap transition when exact stepping is on.
    exact: Option<(f64, f64)>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(
        spec: &ProblemSpec,
        strategy: &'a Strategy,
        objective: Objective,
        w: f64,
        m: f64,
        cfg: &SimConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        spec.params.validate()?;
        objective.validate()?;
        if !w.is_finite() || !m.is_finite() {
            return Err(Error::InvalidSpec("w and m must be finite"));
        }
        if m > w {
            return Err(Error::Domain(
                "running minimum m must not exceed current wealth w",
            ));
        }
        let params = spec.params;
        let safe = params.safe_level();
        let exact = if cfg.exact_gbm {
            let kappa = strategy.gbm_coefficient().ok_or(Error::InvalidSpec(
                "exact gap stepping requires an allocation proportional to c/r - w",
            ))?;
            if (strategy.safe_level() - safe).abs() > 1e-9 * safe {
                return Err(Error::InvalidSpec(
                    "exact gap stepping requires the strategy gap level to equal c/r",
                ));
            }
            let nu = params.r - (params.mu - params.r) * kappa;
            Some((nu, params.sigma * kappa))
        } else {
            None
        };
        Ok(Engine {
            params,
            strategy,
            objective,
            w0: w,
            m0: m,
            cfg: *cfg,
            horizon: cfg.horizon_cap.unwrap_or(10.0 / params.lambda),
            safe,
            band: SAFE_BAND_FRACTION * safe,
            sqrt_dt: cfg.dt.sqrt(),
            exact,
        })
    }

    /// Simulates one path to death, absorption, or the horizon.
    ///
    /// Returns the payoff and the running minimum. A full step advances by
    /// `dt`; the step containing the death time is shortened to end exactly
    /// there. The per-step minimum comes from sampling the minimum of a
    /// Brownian bridge between the step endpoints (in logs of the gap when
    /// exact stepping is on), so a barrier pierced and re-crossed inside a
    /// step still registers.
    fn walk(&self, path: u64, tau: f64, src: &mut DrawSource) -> Result<(f64, f64)> {
        let obj = self.objective;
        let ruin_level = obj.ruin_level();
        let frozen = obj.frozen_payoff();
        let mut wealth = self.w0;
        let mut low = self.m0.min(self.w0);
        if let Some(level) = ruin_level {
            if low <= level {
                return Ok((frozen, low));
            }
        }
        let MarketParams {
            mu, r, sigma, c, ..
        } = self.params;
        let safe_cut = self.safe - self.band;
        let dt = self.cfg.dt;
        let mut k: u64 = 0;
        loop {
            if wealth >= safe_cut {
                return Ok((obj.death_payoff(wealth, low), low));
            }
            let t = k as f64 * dt;
            if t >= tau {
                return Ok((obj.death_payoff(wealth, low), low));
            }
            let (h, sqrt_h) = if tau - t >= dt {
                (dt, self.sqrt_dt)
            } else {
                let h = tau - t;
                (h, h.sqrt())
            };
            let (z, u) = src.step_draws();
            let (end, step_low) = match self.exact {
                Some((nu, s)) => {
                    let a = (self.safe - wealth).ln();
                    let b = a + (nu - 0.5 * s * s) * h + s * sqrt_h * z;
                    let d = b - a;
                    let peak = 0.5 * (a + b + (d * d - 2.0 * s * s * h * u.ln()).sqrt());
                    (self.safe - b.exp(), self.safe - peak.exp())
                }
                None => {
                    let pi = self.strategy.allocation(wealth);
                    let drift = r * wealth + (mu - r) * pi - c;
                    if drift.abs() * h >= 0.1 * (self.safe - wealth) {
                        return Err(Error::InvalidSpec(
                            "dt too coarse for the strategy drift near the safe level",
                        ));
                    }
                    let vol = sigma * pi;
                    let end = wealth + drift * h + vol * sqrt_h * z;
                    let d = end - wealth;
                    let disc = d * d - 2.0 * vol * vol * h * u.ln();
                    (end, 0.5 * (wealth + end - disc.sqrt()))
                }
            };
            if !end.is_finite() {
                return Err(Error::SolverFailure {
                    context: "monte carlo path",
                    detail: format!("non-finite wealth on path {path} at step {k}"),
                });
            }
            if step_low < low {
                low = step_low;
                if let Some(level) = ruin_level {
                    if low <= level {
                        return Ok((frozen, low));
                    }
                }
            }
            wealth = end;
            k += 1;
        }
    }

    /// Runs one stream: a single path, or an antithetic pair sharing the
    /// stream's death time and uniforms with the Gaussians negated.
    fn run_unit(
        &self,
        unit: usize,
        zrec: &mut Vec<f64>,
        urec: &mut Vec<f64>,
        out: &mut BlockOut,
    ) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(unit as u64);
        let tau = draw_death_time(&mut rng, self.params.lambda).min(self.horizon);
        if self.cfg.antithetic {
            zrec.clear();
            urec.clear();
            let (pa, ma) = self.walk(
                2 * unit as u64,
                tau,
                &mut DrawSource::Record {
                    rng: &mut rng,
                    z: zrec,
                    u: urec,
                },
            )?;
            let (pb, mb) = self.walk(
                2 * unit as u64 + 1,
                tau,
                &mut DrawSource::Replay {
                    rng: &mut rng,
                    z: zrec,
                    u: urec,
                    next: 0,
                },
            )?;
            let mean = 0.5 * (pa + pb);
            out.s1.add(mean);
            out.s2.add(mean * mean);
            out.payoffs.push(pa);
            out.payoffs.push(pb);
            out.minima.push(ma);
            out.minima.push(mb);
        } else {
            let (p, m) = self.walk(unit as u64, tau, &mut DrawSource::Fresh { rng: &mut rng })?;
            out.s1.add(p);
            out.s2.add(p * p);
            out.payoffs.push(p);
            out.minima.push(m);
        }
        out.units += 1;
        Ok(())
    }

    fn run_block(&self, block: usize, units_per_block: usize, units: usize) -> Result<BlockOut> {
        let lo = block * units_per_block;
        let hi = ((block + 1) * units_per_block).min(units);
        let per = if self.cfg.antithetic { 2 } else { 1 };
        let mut out = BlockOut::with_capacity((hi - lo) * per);
        let mut zrec = Vec::new();
        let mut urec = Vec::new();
        for unit in lo..hi {
            self.run_unit(unit, &mut zrec, &mut urec, &mut out)?;
        }
        Ok(out)
    }
}

/// Exponential death time from the head of a stream. Drawn before any step
/// noise so that a pair of antithetic legs shares it.
pub(crate) fn draw_death_time(rng: &mut ChaCha8Rng, lambda: f64) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln() / lambda
}

/// Where a path's randomness comes from. An antithetic pair records the
/// first leg and replays it negated for the second; if the second leg runs
/// longer (the first was absorbed earlier), it continues with fresh draws
/// from the stream, which the first leg never touched.
enum DrawSource<'r> {
    Fresh {
        rng: &'r mut ChaCha8Rng,
    },
    Record {
        rng: &'r mut ChaCha8Rng,
        z: &'r mut Vec<f64>,
        u: &'r mut Vec<f64>,
    },
    Replay {
        rng: &'r mut ChaCha8Rng,
        z: &'r [f64],
        u: &'r [f64],
        next: usize,
    },
}

impl DrawSource<'_> {
    /// One standard normal and one uniform on `(0, 1]`, always in this
    /// order, so recorded and replayed legs stay aligned.
    fn step_draws(&mut self) -> (f64, f64) {
        match self {
            DrawSource::Fresh { rng } => {
                let z: f64 = StandardNormal.sample(rng);
                (z, 1.0 - rng.gen::<f64>())
            }
            DrawSource::Record { rng, z, u } => {
                let zi: f64 = StandardNormal.sample(rng);
                let ui = 1.0 - rng.gen::<f64>();
                z.push(zi);
                u.push(ui);
                (zi, ui)
            }
            DrawSource::Replay { rng, z, u, next } => {
                if *next < z.len() {
                    let i = *next;
                    *next += 1;
                    (-z[i], u[i])
                } else {
                    let zi: f64 = StandardNormal.sample(rng);
                    (-zi, 1.0 - rng.gen::<f64>())
                }
            }
        }
    }
}

/// Compensated accumulator; hides the order-of-magnitude juggling that keeps
/// block sums exact enough to be reduction-order independent in practice.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn new() -> Self {
        Neumaier::default()
    }

    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

struct BlockOut {
    s1: Neumaier,
    s2: Neumaier,
    units: usize,
    payoffs: Vec<f64>,
    minima: Vec<f64>,
}

impl BlockOut {
    fn with_capacity(paths: usize) -> Self {
        BlockOut {
            s1: Neumaier::new(),
            s2: Neumaier::new(),
            units: 0,
            payoffs: Vec::with_capacity(paths),
            minima: Vec::with_capacity(paths),
        }
    }
}

pub(crate) struct RunOutput {
    pub estimate: f64,
    pub standard_error: f64,
    pub paths_used: usize,
    /// Payoff of every path in path order.
    pub payoffs: Vec<f64>,
    /// Running minimum of every path in path order.
    pub minima: Vec<f64>,
}

/// How many workers to use: `RUINKIT_THREADS` when set to a positive
/// integer, otherwise the machine's parallelism.
fn worker_cap() -> usize {
    if let Ok(v) = std::env::var("RUINKIT_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub(crate) fn run_paths(engine: &Engine) -> Result<RunOutput> {
    let antithetic = engine.cfg.antithetic;
    let per = if antithetic { 2 } else { 1 };
    let units = engine.cfg.paths.div_ceil(per);
    let units_per_block = BLOCK_PATHS / per;
    let blocks = units.div_ceil(units_per_block);
    let workers = worker_cap().min(blocks).max(1);

    let mut results: Vec<(usize, Result<BlockOut>)> = if workers == 1 {
        (0..blocks)
            .map(|b| (b, engine.run_block(b, units_per_block, units)))
            .collect()
    } else {
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel();
        thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                scope.spawn(move || loop {
                    let b = next.fetch_add(1, Ordering::Relaxed);
                    if b >= blocks {
                        break;
                    }
                    let out = engine.run_block(b, units_per_block, units);
                    let failed = out.is_err();
                    if tx.send((b, out)).is_err() || failed {
                        break;
                    }
                });
            }
            drop(tx);
            rx.iter().collect()
        })
    };
    results.sort_by_key(|(b, _)| *b);

    // Blocks are combined strictly in index order. On failure the error from
    // the lowest-indexed block wins; the claim counter guarantees every
    // index below an attempted one was attempted, so this is deterministic.
    let complete = results.len() == blocks;
    let mut s1 = Neumaier::new();
    let mut s2 = Neumaier::new();
    let mut n_units = 0usize;
    let mut payoffs = Vec::with_capacity(units * per);
    let mut minima = Vec::with_capacity(units * per);
    for (_b, res) in results {
        let out = res?;
        s1.add(out.s1.total());
        s2.add(out.s2.total());
        n_units += out.units;
        payoffs.extend_from_slice(&out.payoffs);
        minima.extend_from_slice(&out.minima);
    }
    if !complete {
        return Err(Error::Internal("parallel block collection lost a block"));
    }

    let n = n_units as f64;
    let estimate = s1.total() / n;
    let standard_error = if n_units > 1 {
        let var = ((s2.total() - n * estimate * estimate) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(RunOutput {
        estimate,
        standard_error,
        paths_used: n_units * per,
        payoffs,
        minima,
    })
}
