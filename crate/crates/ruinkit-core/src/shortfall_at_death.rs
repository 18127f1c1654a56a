//! Expected shortfall below the target at the moment of death, with wealth
//! absorbed at a barrier, minimized over investment strategies.
//!
//! Above the target `x` the value is an outer power matching the
//! lifetime-ruin shape. Below `x` the value is recovered from a concave
//! dual: writing the dual as a homogeneous part plus `safe * y - (safe - x)`,
//! the homogeneous pair `(u, u')` satisfies a linear second-order equation
//! in the dual variable `y`. The left boundary `y_x` is unknown; shooting
//! from a trial `y_x` with the slope pinned to `x - safe`, the integration
//! is stopped where the slope reaches `M - safe` and the leftover value
//! mismatch there is driven to zero over trial values.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fm;
use crate::market::{derive_constants, DerivedConstants, ProblemSpec};
use crate::numerics::ode::{integrate_with_event, DenseOutput, OdeOptions, OdeSolution};
use crate::numerics::roots;
use crate::strategy::Strategy;

/// One sample of the homogeneous dual pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSample {
    pub y: f64,
    pub value: f64,
    pub slope: f64,
}

/// Solved shortfall-at-death problem.
#[derive(Debug, Clone)]
#[allow(non_snake_case)]
pub struct ShootingSolution {
    /// Dual point at which wealth equals the target `x`.
    pub y_x: f64,
    /// Dual point at which wealth reaches the barrier `M`.
    pub y_M: f64,
    /// Uniform samples of the homogeneous dual pair over `[y_x, y_M]`.
    pub grid: Vec<GridSample>,
    /// Value at the target: expected shortfall when starting at `w = x`.
    pub beta: f64,
    dense: DenseOutput<2>,
    spec: ProblemSpec,
    constants: DerivedConstants,
}

fn barrier(spec: &ProblemSpec) -> Result<f64> {
    spec.barrier
        .ok_or(Error::InvalidSpec("this objective requires a lower barrier M"))
}

struct Shooter {
    lambda: f64,
    r: f64,
    delta: f64,
    u0_base: f64,
    inv_b1: f64,
    v0: f64,
    target_slope: f64,
    y_cap: f64,
}

impl Shooter {
    fn new(spec: &ProblemSpec, k: &DerivedConstants, m_bar: f64) -> Self {
        Shooter {
            lambda: spec.params.lambda,
            r: spec.params.r,
            delta: k.delta,
            u0_base: k.safe - spec.x,
            inv_b1: (k.p - 1.0) / k.p,
            v0: spec.x - k.safe,
            target_slope: m_bar - k.safe,
            y_cap: 1000.0,
        }
    }

    fn rhs(&self, y: f64, s: &[f64; 2]) -> [f64; 2] {
        let acc = (self.lambda * s[0] + ((self.r - self.lambda) * y + self.lambda) * s[1])
            / (self.delta * y * y);
        [s[1], acc]
    }

    fn shoot(&self, trial: f64, max_steps: usize) -> Result<OdeSolution<2>> {
        let u0 = self.u0_base * (1.0 - self.inv_b1 * trial);
        let opts = OdeOptions {
            rtol: 3e-13,
            atol: 1e-14,
            h0: None,
            max_steps,
        };
        let sol = integrate_with_event(
            |y, s| self.rhs(y, s),
            trial,
            [u0, self.v0],
            self.y_cap,
            |_, s| s[1] - self.target_slope,
            &opts,
        )?;
        if sol.event.is_none() {
            return Err(Error::SolverFailure {
                context: "shortfall-at-death shooting",
                detail: alloc::format!(
                    "slope never reached the barrier from trial y_x = {trial:e}"
                ),
            });
        }
        Ok(sol)
    }

    /// Value mismatch at the detected right boundary.
    fn residual(&self, sol: &OdeSolution<2>) -> f64 {
        let y_ev = sol.t_final;
        sol.y_final[0] + self.target_slope * (1.0 - y_ev)
    }
}

/// Solves the free-boundary problem for the expected shortfall at death.
#[allow(non_snake_case)]
pub fn solve_U(spec: &ProblemSpec) -> Result<ShootingSolution> {
    spec.validate()?;
    let m_bar = barrier(spec)?;
    let k = derive_constants(&spec.params)?;
    let shooter = Shooter::new(spec, &k, m_bar);

    // Trial boundary slopes: a geometric sweep toward zero followed by a
    // linear sweep toward b1 where the initial value crosses zero. Trials
    // too stiff to integrate (or where the slope never reaches the barrier)
    // are treated as gaps rather than failures.
    let n_geo = 128;
    let n_lin = 128;
    let geo_lo = 1e-6 * k.b1;
    let geo_hi = 0.5 * k.b1;
    let lin_hi = (1.0 - 1e-9) * k.b1;
    let mut trials: Vec<f64> = Vec::with_capacity(n_geo + n_lin);
    let (log_lo, log_hi) = (fm::ln(geo_lo), fm::ln(geo_hi));
    for i in 0..n_geo {
        let t = i as f64 / (n_geo - 1) as f64;
        trials.push(fm::exp(log_lo + (log_hi - log_lo) * t));
    }
    for i in 1..=n_lin {
        let t = i as f64 / n_lin as f64;
        trials.push(geo_hi + (lin_hi - geo_hi) * t);
    }

    let scan_steps = 60_000;
    let mut bracket: Option<(f64, f64, f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    for &trial in &trials {
        match shooter.shoot(trial, scan_steps) {
            Ok(sol) => {
                let res = shooter.residual(&sol);
                if res == 0.0 {
                    bracket = Some((trial, trial, 0.0, 0.0));
                    break;
                }
                if let Some((pt, pr)) = prev {
                    if (pr > 0.0) != (res > 0.0) {
                        bracket = Some((pt, trial, pr, res));
                        break;
                    }
                }
                prev = Some((trial, res));
            }
            Err(_) => prev = None,
        }
    }
    let (lo, hi, f_lo, f_hi) = bracket.ok_or(Error::SolverFailure {
        context: "shortfall-at-death shooting",
        detail: alloc::format!(
            "no residual sign change across {} trial boundary slopes",
            trials.len()
        ),
    })?;

    let y_x = if lo == hi {
        lo
    } else {
        roots::solve_bracketed(
            |trial| Ok(shooter.residual(&shooter.shoot(trial, scan_steps)?)),
            lo,
            hi,
            f_lo,
            f_hi,
            1e-13 * k.b1,
            200,
        )?
    };

    let final_sol = shooter.shoot(y_x, 200_000)?;
    let y_m = final_sol.t_final;
    let dense = final_sol.dense;

    let n_grid = 513;
    let mut grid = Vec::with_capacity(n_grid);
    for i in 0..n_grid {
        let y = y_x + (y_m - y_x) * i as f64 / (n_grid - 1) as f64;
        let s = dense.eval(y);
        grid.push(GridSample {
            y,
            value: s[0],
            slope: s[1],
        });
    }
    // The slope is the wealth offset and must fall monotonically from
    // x - safe to M - safe; anything else means the root found was spurious.
    for pair in grid.windows(2) {
        if pair[1].slope > pair[0].slope {
            return Err(Error::SolverFailure {
                context: "shortfall-at-death shooting",
                detail: alloc::format!(
                    "dual slope is not monotone near y = {:e}",
                    pair[0].y
                ),
            });
        }
    }

    let beta = y_x * (spec.params.c - spec.params.r * spec.x) / (spec.params.r * k.p);
    Ok(ShootingSolution {
        y_x,
        y_M: y_m,
        grid,
        beta,
        dense,
        spec: *spec,
        constants: k,
    })
}

impl ShootingSolution {
    pub fn barrier_level(&self) -> f64 {
        self.spec.barrier.unwrap_or(f64::NEG_INFINITY)
    }

    /// Homogeneous dual pair `(u, u')` at a dual point `y` in
    /// `[y_x, y_M]`.
    pub fn homogeneous_at(&self, y: f64) -> (f64, f64) {
        let s = self.dense.eval(y);
        (s[0], s[1])
    }

    fn curvature_at(&self, y: f64) -> f64 {
        let p = &self.spec.params;
        let (u, v) = self.homogeneous_at(y);
        (p.lambda * u + ((p.r - p.lambda) * y + p.lambda) * v)
            / (self.constants.delta * y * y)
    }

    /// Finds the dual point at which the wealth map equals `w`, for `w`
    /// strictly between the barrier and the target.
    fn invert_wealth(&self, w: f64) -> Result<f64> {
        let safe = self.constants.safe;
        let f_lo = self.spec.x - w;
        let f_hi = self.barrier_level() - w;
        roots::solve_bracketed(
            |y| Ok(self.homogeneous_at(y).1 + safe - w),
            self.y_x,
            self.y_M,
            f_lo,
            f_hi,
            1e-13 * self.y_M,
            200,
        )
    }

    /// Expected shortfall at death from wealth `w` with running minimum `m`.
    pub fn value(&self, w: f64, m: f64) -> Result<f64> {
        let spec = &self.spec;
        let k = &self.constants;
        let m_bar = self.barrier_level();
        if m <= m_bar || w <= m_bar {
            return Ok(spec.x - m_bar);
        }
        if m > w {
            return Err(Error::Domain("running minimum m exceeds current wealth w"));
        }
        if w >= k.safe {
            return Ok(0.0);
        }
        let c = spec.params.c;
        let r = spec.params.r;
        if w >= spec.x {
            let ratio = (c - r * w) / (c - r * spec.x);
            return Ok(self.beta * fm::powf(ratio, k.p));
        }
        let y = self.invert_wealth(w)?;
        let (u, _) = self.homogeneous_at(y);
        let dual = u + k.safe * y - (k.safe - spec.x);
        Ok(dual - w * y)
    }

    /// Minimizing allocation at wealth `w`.
    pub fn allocation(&self, w: f64) -> Result<f64> {
        let spec = &self.spec;
        let k = &self.constants;
        if w > k.safe {
            return Err(Error::Domain("wealth above the safe level c / r"));
        }
        if w <= self.barrier_level() {
            return Err(Error::Domain("wealth at or below the barrier is absorbed"));
        }
        if w >= spec.x {
            return Ok(k.xi * (k.safe - w));
        }
        let y = self.invert_wealth(w)?;
        let params = &spec.params;
        let sigma_sq = params.sigma * params.sigma;
        Ok((params.mu - params.r) / sigma_sq * (-y * self.curvature_at(y)))
    }

    /// Residuals of the two conditions at the right boundary: the slope
    /// matching `M - safe` and the value matching `(safe - M)(1 - y_M)`,
    /// both normalized by `safe - M`.
    pub fn boundary_residuals(&self) -> [f64; 2] {
        let m_bar = self.barrier_level();
        let safe = self.constants.safe;
        let (u, v) = self.homogeneous_at(self.y_M);
        let scale = safe - m_bar;
        [
            (v - (m_bar - safe)) / scale,
            (u - (safe - m_bar) * (1.0 - self.y_M)) / scale,
        ]
    }

    /// Tabulates the rule as a piecewise-linear strategy. Unlike the
    /// ruin-at-death rule, this one is continuous at the target.
    pub fn strategy(&self, samples: usize) -> Result<Strategy> {
        let n = samples.max(16);
        let k = &self.constants;
        let params = &self.spec.params;
        let gearing = (params.mu - params.r) / (params.sigma * params.sigma);
        let x = self.spec.x;
        let m_bar = self.barrier_level();
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(n + 2);
        for i in 0..n {
            let t = i as f64 / (n as f64);
            let y = self.y_M + (self.y_x - self.y_M) * t;
            let w = if i == 0 {
                m_bar
            } else {
                self.homogeneous_at(y).1 + k.safe
            };
            let pi = gearing * (-y * self.curvature_at(y));
            points.push((w, pi));
        }
        points.push((x, k.xi * (k.safe - x)));
        points.push((k.safe, 0.0));
        for pair in points.windows(2) {
            if pair[1].0 < pair[0].0 {
                return Err(Error::Internal("dual slope samples are not monotone"));
            }
        }
        Ok(Strategy::piecewise_linear("U", points))
    }
}

/// Expected shortfall at death from wealth `w` with running minimum `m`.
#[allow(non_snake_case)]
pub fn U_value(spec: &ProblemSpec, w: f64, m: f64) -> Result<f64> {
    solve_U(spec)?.value(w, m)
}

/// Minimizing allocation at wealth `w`.
#[allow(non_snake_case)]
pub fn pi_U(spec: &ProblemSpec, w: f64) -> Result<f64> {
    solve_U(spec)?.allocation(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::MarketParams;

    fn spec() -> ProblemSpec {
        let params = MarketParams::new(0.06, 0.02, 0.20, 0.04, 1.0).unwrap();
        ProblemSpec::new(params, 0.0)
            .unwrap()
            .with_barrier(-200.0)
            .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn boundary_points_and_beta() {
        let sol = solve_U(&spec()).unwrap();
        assert!(rel(sol.y_x, 0.377_417_830_514_197_908_8) < 1e-8);
        assert!(rel(sol.y_M, 1.509_100_097_798_568_961) < 1e-8);
        assert!(rel(sol.beta, 5.527_156_160_844_674_438) < 1e-8);
        for r in sol.boundary_residuals() {
            assert!(r.abs() < 1e-10, "boundary residual {r:e}");
        }
    }

    #[test]
    fn value_reference_points() {
        let sol = solve_U(&spec()).unwrap();
        assert!(rel(sol.value(0.0, 0.0).unwrap(), sol.beta) < 1e-15);
        assert!(rel(sol.value(-50.0, -50.0).unwrap(), 34.514_899_461_961_209_46) < 1e-8);
        assert!(rel(sol.value(-100.0, -100.0).unwrap(), 76.944_343_622_813_238_2) < 1e-8);
        assert!(rel(sol.value(-150.0, -150.0).unwrap(), 131.774_147_257_030_206_9) < 1e-8);
        assert!(rel(sol.value(-199.0, -199.0).unwrap(), 198.493_915_390_765_401_7) < 1e-8);
        // Outer power region.
        let v25 = sol.value(25.0, 0.0).unwrap();
        let k = derive_constants(&spec().params).unwrap();
        assert!(rel(v25, sol.beta * 0.5f64.powf(k.p)) < 1e-14);
    }

    #[test]
    fn allocation_reference_points() {
        let sol = solve_U(&spec()).unwrap();
        assert!(rel(sol.allocation(-50.0).unwrap(), 142.712_660_755_923_665_2) < 1e-8);
        assert!(rel(sol.allocation(-100.0).unwrap(), 197.491_739_235_164_612_8) < 1e-8);
        assert!(rel(sol.allocation(-150.0).unwrap(), 229.737_519_739_097_678_8) < 1e-8);
        assert!(rel(sol.allocation(-199.0).unwrap(), 249.673_400_431_783_441_2) < 1e-8);
        // Continuity at the target: the rule approaches xi * (safe - x).
        let k = derive_constants(&spec().params).unwrap();
        let inner = sol.allocation(-1e-7).unwrap();
        assert!(rel(inner, k.xi * k.safe) < 1e-6);
        assert_eq!(sol.allocation(0.0).unwrap(), k.xi * k.safe);
        // At the barrier the rule tends to 2 (c - r M) / (mu - r).
        let near_barrier = sol.allocation(-200.0 + 1e-7).unwrap();
        assert!(rel(near_barrier, 250.0) < 1e-6);
    }

    #[test]
    fn absorption_and_domain_branches() {
        let sol = solve_U(&spec()).unwrap();
        assert_eq!(sol.value(25.0, -200.0).unwrap(), 200.0);
        assert_eq!(sol.value(-200.0, -200.0).unwrap(), 200.0);
        assert!(sol.value(25.0, 26.0).is_err());
        assert_eq!(sol.value(50.0, 25.0).unwrap(), 0.0);
        assert!(sol.allocation(-200.0).is_err());
        assert!(sol.allocation(50.5).is_err());
    }

    #[test]
    fn dual_ratio_stays_above_the_smooth_fit_line() {
        let sol = solve_U(&spec()).unwrap();
        let k = derive_constants(&spec().params).unwrap();
        let n = 1000;
        for i in 1..n {
            let y = sol.y_x + (sol.y_M - sol.y_x) * i as f64 / n as f64;
            let (u, v) = sol.homogeneous_at(y);
            let gap = u / v - (y / k.b1 - 1.0);
            assert!(gap > 0.0, "ratio fell to the line at y = {y}");
        }
        let gap_at = |y: f64| {
            let (u, v) = sol.homogeneous_at(y);
            u / v - (y / k.b1 - 1.0)
        };
        assert!(rel(gap_at(0.5), 1.606_412_580_224_442e-1) < 1e-8);
        assert!(rel(gap_at(1.0), 4.413_355_029_875_422e-1) < 1e-8);
        assert!(rel(gap_at(1.3), 4.492_096_248_616_332e-1) < 1e-8);
        let (u0, v0) = sol.homogeneous_at(sol.y_x);
        let at_left = u0 / v0 - (sol.y_x / k.b1 - 1.0);
        assert!(at_left.abs() < 1e-10);
    }

    #[test]
    fn nearly_degenerate_barrier() {
        let params = MarketParams::new(0.06, 0.02, 0.20, 0.04, 1.0).unwrap();
        let s = ProblemSpec::new(params, 0.0)
            .unwrap()
            .with_barrier(-0.001)
            .unwrap();
        let sol = solve_U(&s).unwrap();
        assert!((sol.y_x - 6.827_960_874_3e-5).abs() < 1e-9);
        let gap = sol.y_M - sol.y_x;
        assert!(gap > 4e-10 && gap < 1e-8, "gap {gap:e}");
    }

    #[test]
    fn requires_barrier() {
        let params = MarketParams::new(0.06, 0.02, 0.20, 0.04, 1.0).unwrap();
        let s = ProblemSpec::new(params, 0.0).unwrap();
        assert!(matches!(solve_U(&s), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn tabulated_strategy_tracks_the_rule() {
        let sol = solve_U(&spec()).unwrap();
        let st = sol.strategy(4096).unwrap();
        for w in [-180.0, -100.0, -50.0, -10.0, -1.0] {
            let exact = sol.allocation(w).unwrap();
            let tab = st.allocation(w);
            assert!(
                (tab - exact).abs() < 2e-3 * exact.abs().max(1.0),
                "w={w}: {tab} vs {exact}"
            );
        }
        assert!(st.discontinuities.is_empty());
    }
}
