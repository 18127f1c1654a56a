//! Ruin and shortfall minimization when the investor may not borrow to
//! invest: the allocation is capped at current wealth.
//!
//! The optimal rule has three layers. Above `w_l = xi / (1 + xi) * (c / r)`
//! the cap does not bind and the unconstrained linear rule applies. Between
//! zero and `w_l` everything is invested, so the value follows a
//! fully-invested second-order equation solved here by integrating from
//! `w_l` down to a switch point and continuing with the power series about
//! zero (the series is asymptotic; it is summed to its smallest term).
//! Below zero nothing can be invested and the value is an explicit power,
//! interpreted according to the negative-wealth mode: under welfare
//! accounting wealth is absorbed at zero, while under borrowing for
//! consumption it keeps drifting down.
//!
//! All quantities derive from a single decreasing profile `A` with
//! `A(w_l) = 1`: the ruin probability from `w` with ruin level `x` is
//! `A(w) / A(x)`, and `A(w) / A(y)` is the distribution of the running
//! minimum, from which expected shortfalls follow by integration.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fm;
use crate::market::{
    derive_constants, DerivedConstants, MarketParams, NegativeWealthMode, ProblemSpec,
};
use crate::numerics::ode::{integrate, DenseOutput, OdeOptions};
use crate::numerics::quad;
use crate::shortfall::PenaltyFunction;
use crate::strategy::{Regime, Strategy};

fn band_rhs(params: &MarketParams) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    let half_sig_sq = 0.5 * params.sigma * params.sigma;
    move |w, s| {
        [
            s[1],
            (params.lambda * s[0] - (params.mu * w - params.c) * s[1]) / (half_sig_sq * w * w),
        ]
    }
}

fn band_opts() -> OdeOptions {
    OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        h0: None,
        max_steps: 200_000,
    }
}

fn switch_point(params: &MarketParams, k: &DerivedConstants) -> f64 {
    (params.c / (15.0 * params.sigma * params.sigma)).min(0.5 * k.w_l)
}

/// Power series about zero for the fully-invested equation, normalized to
/// one at zero. The series is asymptotic: coefficients are kept only while
/// the terms at the switch point still shrink, and sums stop at the
/// smallest term.
#[derive(Debug, Clone)]
struct BandSeries {
    coeffs: Vec<f64>,
}

impl BandSeries {
    fn build(params: &MarketParams, w_cap: f64) -> Self {
        let half_sig_sq = 0.5 * params.sigma * params.sigma;
        let mut coeffs = Vec::with_capacity(64);
        coeffs.push(1.0);
        let mut n = 0usize;
        loop {
            let nf = n as f64;
            let a_n = coeffs[n];
            let next =
                (half_sig_sq * nf * (nf - 1.0) + params.mu * nf - params.lambda) * a_n
                    / (params.c * (nf + 1.0));
            if n >= 4
                && fm::abs(next) * fm::powf(w_cap, nf + 1.0)
                    > fm::abs(a_n) * fm::powf(w_cap, nf)
            {
                break;
            }
            coeffs.push(next);
            n += 1;
            if coeffs.len() >= 400 {
                break;
            }
        }
        BandSeries { coeffs }
    }

    /// Value and derivative at `w`, summed to the smallest term.
    fn eval(&self, w: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut slope = 0.0;
        let mut pow_prev = 0.0;
        let mut pow = 1.0;
        let mut prev_mag = f64::INFINITY;
        for (n, &a) in self.coeffs.iter().enumerate() {
            let term = a * pow;
            let mag = fm::abs(term);
            if n >= 4 && mag > prev_mag {
                break;
            }
            value += term;
            if n >= 1 {
                slope += n as f64 * a * pow_prev;
            }
            if n >= 4 && mag < 1e-18 * fm::abs(value) {
                break;
            }
            prev_mag = mag;
            pow_prev = pow;
            pow *= w;
        }
        (value, slope)
    }
}

/// The fully-invested band profile `H` on `[0, w_l]`, with `H(w_l) = 1` and
/// the slope at `w_l` matched to the unconstrained power above it.
#[derive(Debug, Clone)]
pub struct BandProfile {
    dense: DenseOutput<2>,
    series: BandSeries,
    kappa: f64,
    w_switch: f64,
    w_l: f64,
}

impl BandProfile {
    fn build(params: &MarketParams, k: &DerivedConstants) -> Result<Self> {
        let w_switch = switch_point(params, k);
        let gamma = -k.p / (k.safe - k.w_l);
        let sol = integrate(
            band_rhs(params),
            k.w_l,
            [1.0, gamma],
            w_switch,
            &band_opts(),
        )?;
        let series = BandSeries::build(params, w_switch);
        let (s_val, _) = series.eval(w_switch);
        if s_val <= 0.0 || !s_val.is_finite() {
            return Err(Error::SolverFailure {
                context: "fully-invested band profile",
                detail: alloc::format!("series value {s_val:e} at the switch point"),
            });
        }
        let kappa = sol.y_final[0] / s_val;
        Ok(BandProfile {
            dense: sol.dense,
            series,
            kappa,
            w_switch,
            w_l: k.w_l,
        })
    }

    pub fn value(&self, w: f64) -> f64 {
        if w >= self.w_switch {
            self.dense.eval(w)[0]
        } else {
            self.kappa * self.series.eval(w).0
        }
    }

    pub fn slope(&self, w: f64) -> f64 {
        if w >= self.w_switch {
            self.dense.eval(w)[1]
        } else {
            self.kappa * self.series.eval(w).1
        }
    }

    pub fn switch_level(&self) -> f64 {
        self.w_switch
    }

    pub fn band_upper(&self) -> f64 {
        self.w_l
    }
}

/// Fundamental pair of the fully-invested equation anchored at `w_l`:
/// `u(w_l) = 1, u'(w_l) = 0` and `v(w_l) = 0, v'(w_l) = 1`, tabulated over
/// `[w_switch, w_l]` together with their Wronskian at each node.
#[derive(Debug, Clone)]
pub struct ConstrainedOdeBasis {
    pub w_lo: f64,
    pub w_hi: f64,
    pub nodes: Vec<f64>,
    /// Numerical Wronskian `u v' - u' v` at each node.
    pub wronskian: Vec<f64>,
    u: DenseOutput<2>,
    v: DenseOutput<2>,
    p0: f64,
    p1: f64,
}

impl ConstrainedOdeBasis {
    pub fn build(params: &MarketParams) -> Result<Self> {
        params.validate()?;
        let k = derive_constants(params)?;
        let w_switch = switch_point(params, &k);
        let u = integrate(band_rhs(params), k.w_l, [1.0, 0.0], w_switch, &band_opts())?.dense;
        let v = integrate(band_rhs(params), k.w_l, [0.0, 1.0], w_switch, &band_opts())?.dense;
        let n = 257;
        let mut nodes = Vec::with_capacity(n);
        let mut wronskian = Vec::with_capacity(n);
        for i in 0..n {
            let w = w_switch + (k.w_l - w_switch) * i as f64 / (n - 1) as f64;
            let su = u.eval(w);
            let sv = v.eval(w);
            let det = su[0] * sv[1] - su[1] * sv[0];
            if det <= 0.0 {
                return Err(Error::SolverFailure {
                    context: "fully-invested fundamental pair",
                    detail: alloc::format!("Wronskian {det:e} at w = {w}"),
                });
            }
            nodes.push(w);
            wronskian.push(det);
        }
        let sig_sq = params.sigma * params.sigma;
        Ok(ConstrainedOdeBasis {
            w_lo: w_switch,
            w_hi: k.w_l,
            nodes,
            wronskian,
            u,
            v,
            p0: 2.0 * params.mu / sig_sq,
            p1: 2.0 * params.c / sig_sq,
        })
    }

    pub fn u_at(&self, w: f64) -> (f64, f64) {
        let s = self.u.eval(w);
        (s[0], s[1])
    }

    pub fn v_at(&self, w: f64) -> (f64, f64) {
        let s = self.v.eval(w);
        (s[0], s[1])
    }

    /// Wronskian from the first-order coefficient alone, equal to one at
    /// the anchor `w_hi`.
    pub fn wronskian_analytic(&self, w: f64) -> f64 {
        fm::powf(w / self.w_hi, -self.p0) * fm::exp(-self.p1 * (1.0 / w - 1.0 / self.w_hi))
    }
}

/// Which side of the band the ruin level `x` falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoBorrowCase {
    /// `x >= w_l`: the cap never binds above the ruin level and the problem
    /// reduces to the unconstrained one.
    Case1,
    /// `0 <= x < w_l`: ruin happens inside the fully-invested band.
    Case2,
    /// `x < 0` under welfare accounting: wealth stops at zero, so ruin at a
    /// negative level never happens.
    Case3Welfare,
    /// `x < 0` with borrowing for consumption: wealth drifts on down with
    /// nothing invested.
    Case3Borrow,
}

/// Solved borrowing-constrained problem.
#[derive(Debug, Clone)]
pub struct NoBorrowSolution {
    pub case: NoBorrowCase,
    pub h: BandProfile,
    /// Coefficient putting the region above the band in the unconstrained
    /// shape: there the ruin probability is
    /// `beta_x * ((c - r w) / (c - r x))^p`.
    pub beta_x: f64,
    pub spec: ProblemSpec,
    constants: DerivedConstants,
    a_x: f64,
    h0: f64,
}

/// Solves the borrowing-constrained ruin problem for the given ruin level.
pub fn solve_psi_nb(spec: &ProblemSpec) -> Result<NoBorrowSolution> {
    spec.validate()?;
    let k = derive_constants(&spec.params)?;
    let params = &spec.params;
    let case = if spec.x >= k.w_l {
        NoBorrowCase::Case1
    } else if spec.x >= 0.0 {
        NoBorrowCase::Case2
    } else {
        match spec.negative_wealth_mode {
            Some(NegativeWealthMode::Welfare) => NoBorrowCase::Case3Welfare,
            Some(NegativeWealthMode::BorrowForConsumption) => NoBorrowCase::Case3Borrow,
            None => {
                return Err(Error::InvalidSpec(
                    "a ruin level below zero requires a negative-wealth mode",
                ))
            }
        }
    };
    let h = BandProfile::build(params, &k)?;
    let h0 = h.value(0.0);
    let outer_at_x = fm::powf((params.c - params.r * spec.x) / (params.c - params.r * k.w_l), k.p);
    let (a_x, beta_x) = match case {
        NoBorrowCase::Case1 => (outer_at_x, 1.0),
        NoBorrowCase::Case2 => {
            let a = h.value(spec.x);
            (a, outer_at_x / a)
        }
        NoBorrowCase::Case3Welfare => (f64::INFINITY, 0.0),
        NoBorrowCase::Case3Borrow => {
            let a = h0
                * fm::powf(
                    (params.c - params.r * spec.x) / params.c,
                    params.lambda / params.r,
                );
            (a, outer_at_x / a)
        }
    };
    Ok(NoBorrowSolution {
        case,
        h,
        beta_x,
        spec: *spec,
        constants: k,
        a_x,
        h0,
    })
}

impl NoBorrowSolution {
    fn mode(&self) -> Result<NegativeWealthMode> {
        self.spec.negative_wealth_mode.ok_or(Error::InvalidSpec(
            "this quantity depends on the negative-wealth mode",
        ))
    }

    /// The decreasing profile `A`, normalized to one at `w_l`. Below zero
    /// it continues with the borrowing-mode power; welfare-mode callers
    /// never ask there.
    pub fn profile(&self, w: f64) -> f64 {
        let k = &self.constants;
        let params = &self.spec.params;
        if w >= k.safe {
            return 0.0;
        }
        if w >= k.w_l {
            fm::powf((params.c - params.r * w) / (params.c - params.r * k.w_l), k.p)
        } else if w >= 0.0 {
            self.h.value(w)
        } else {
            self.h0 * fm::powf((params.c - params.r * w) / params.c, params.lambda / params.r)
        }
    }

    /// Ruin probability from wealth `w` with running minimum `m`.
    pub fn value(&self, w: f64, m: f64) -> Result<f64> {
        let k = &self.constants;
        let params = &self.spec.params;
        if m <= self.spec.x {
            return Ok(1.0);
        }
        if m > w {
            return Err(Error::Domain("running minimum m exceeds current wealth w"));
        }
        if w >= k.safe {
            return Ok(0.0);
        }
        if w < 0.0 && self.spec.negative_wealth_mode == Some(NegativeWealthMode::Welfare) {
            return Err(Error::Domain(
                "negative wealth cannot occur under welfare accounting",
            ));
        }
        match self.case {
            NoBorrowCase::Case1 => Ok(fm::powf(
                (params.c - params.r * w) / (params.c - params.r * self.spec.x),
                k.p,
            )),
            NoBorrowCase::Case3Welfare => Ok(0.0),
            _ => Ok(self.profile(w) / self.a_x),
        }
    }

    /// Constrained minimizing allocation at wealth `w`.
    pub fn allocation(&self, w: f64) -> Result<f64> {
        let k = &self.constants;
        if w >= k.safe {
            return Err(Error::Domain("wealth above the safe level c / r"));
        }
        if w <= self.spec.x {
            return Err(Error::Domain("wealth at or below the ruin level is absorbed"));
        }
        if w <= 0.0 {
            return Ok(0.0);
        }
        if w <= k.w_l {
            return Ok(w);
        }
        Ok(k.xi * (k.safe - w))
    }

    /// Distribution of the running minimum: the probability that wealth
    /// ever falls below `y`, starting from `w` with running minimum `m`.
    pub fn min_wealth_cdf(&self, w: f64, m: f64, y: f64) -> Result<f64> {
        let k = &self.constants;
        if m > w {
            return Err(Error::Domain("running minimum m exceeds current wealth w"));
        }
        if w >= k.safe {
            return Err(Error::Domain(
                "the running minimum is degenerate at or above the safe level",
            ));
        }
        if y >= m {
            return Ok(1.0);
        }
        if y <= 0.0 {
            return match self.mode()? {
                NegativeWealthMode::Welfare => Ok(if y < 0.0 {
                    0.0
                } else {
                    self.profile(w) / self.h0
                }),
                NegativeWealthMode::BorrowForConsumption => Ok(self.profile(w) / self.profile(y)),
            };
        }
        Ok(self.profile(w) / self.profile(y))
    }

    /// `int dy / A(y)` from the lower end of the reachable range up to `b`.
    fn inv_profile_integral(&self, b: f64) -> Result<f64> {
        let params = &self.spec.params;
        let k = &self.constants;
        let mode = self.mode()?;
        let mut total = 0.0;
        match mode {
            NegativeWealthMode::Welfare => {
                if b <= 0.0 {
                    return Ok(0.0);
                }
            }
            NegativeWealthMode::BorrowForConsumption => {
                if params.lambda <= params.r {
                    return Err(Error::InvalidSpec(
                        "expected shortfall diverges when borrowing for consumption unless lambda > r",
                    ));
                }
                let b0 = b.min(0.0);
                total += fm::powf(params.c, params.lambda / params.r)
                    * fm::powf(params.c - params.r * b0, 1.0 - params.lambda / params.r)
                    / ((params.lambda - params.r) * self.h0);
                if b <= 0.0 {
                    return Ok(total);
                }
            }
        }
        let band_top = b.min(k.w_l);
        let q = quad::integrate(
            |y| Ok(1.0 / self.h.value(y)),
            0.0,
            band_top,
            1e-13,
            1e-12,
            4096,
        )?;
        total += q.value;
        if b > k.w_l {
            let base = fm::powf(params.c - params.r * k.w_l, k.p);
            total += base
                * (fm::powf(params.c - params.r * b, 1.0 - k.p)
                    - fm::powf(params.c - params.r * k.w_l, 1.0 - k.p))
                / (params.r * (k.p - 1.0));
        }
        Ok(total)
    }

    /// Expected lifetime shortfall below the target `x_target`, from wealth
    /// `w` with running minimum `m`.
    pub fn shortfall(&self, w: f64, m: f64, x_target: f64) -> Result<f64> {
        let k = &self.constants;
        let held = (x_target - m).max(0.0);
        if m > w {
            return Err(Error::Domain("running minimum m exceeds current wealth w"));
        }
        if w >= k.safe {
            return Ok(held);
        }
        if w < 0.0 && self.spec.negative_wealth_mode == Some(NegativeWealthMode::Welfare) {
            return Err(Error::Domain(
                "negative wealth cannot occur under welfare accounting",
            ));
        }
        let b = m.min(x_target);
        Ok(held + self.profile(w) * self.inv_profile_integral(b)?)
    }

    /// Expected penalty of the lifetime minimum under `pen`, from wealth
    /// `w` with running minimum `m`.
    pub fn penalty_value(&self, pen: &PenaltyFunction, w: f64, m: f64) -> Result<f64> {
        let params = &self.spec.params;
        let k = &self.constants;
        if m > w {
            return Err(Error::Domain("running minimum m exceeds current wealth w"));
        }
        if w >= k.safe {
            return Ok(pen.value(m));
        }
        if w < 0.0 && self.spec.negative_wealth_mode == Some(NegativeWealthMode::Welfare) {
            return Err(Error::Domain(
                "negative wealth cannot occur under welfare accounting",
            ));
        }
        let mode = self.mode()?;
        let b = m.min(pen.support_upper);
        let a_w = self.profile(w);
        let mut pulled = 0.0;
        let mut segments: Vec<(f64, f64)> = Vec::new();
        match mode {
            NegativeWealthMode::Welfare => {
                if b > 0.0 {
                    segments.push((0.0, b.min(k.w_l)));
                }
            }
            NegativeWealthMode::BorrowForConsumption => {
                if params.lambda <= params.r {
                    return Err(Error::InvalidSpec(
                        "expected penalty diverges when borrowing for consumption unless lambda > r",
                    ));
                }
                // Depth at which the remaining contribution is negligible:
                // below it the minimum's tail mass times the penalty bound
                // stays under 1e-12.
                let ratio = a_w * pen.bound * 1e12 / self.h0;
                let tail_gap =
                    params.c * fm::powf(ratio.max(1.0), params.r / params.lambda);
                let t_cut = (params.c - tail_gap) / params.r;
                if t_cut < b.min(0.0) {
                    // Split the sub-zero range into geometric pieces so the
                    // quadrature never chases a far-away empty tail.
                    let b0 = b.min(0.0);
                    let mut hi_gap = params.c - params.r * b0;
                    loop {
                        let lo_gap = (hi_gap * 4.0).min(tail_gap);
                        let lo = (params.c - lo_gap) / params.r;
                        let hi = (params.c - hi_gap) / params.r;
                        segments.push((lo, hi));
                        if lo_gap >= tail_gap {
                            break;
                        }
                        hi_gap = lo_gap;
                    }
                }
                if b > 0.0 {
                    segments.push((0.0, b.min(k.w_l)));
                }
            }
        }
        if b > k.w_l {
            segments.push((k.w_l, b));
        }
        for (lo, hi) in segments {
            if hi <= lo {
                continue;
            }
            let q = quad::integrate(
                |y| Ok(pen.slope(y) / self.profile(y)),
                lo,
                hi,
                1e-12 / a_w.max(1e-300),
                1e-10,
                4096,
            )?;
            pulled += q.value;
        }
        Ok(pen.value(m) - a_w * pulled)
    }

    /// The constrained rule as a closed-form strategy: nothing below zero,
    /// everything in the band, the unconstrained linear rule above it.
    pub fn strategy(&self) -> Strategy {
        let k = self.constants;
        let w_l = k.w_l;
        let safe = k.safe;
        let xi = k.xi;
        Strategy::new(
            "nb",
            (f64::NEG_INFINITY, safe),
            Vec::new(),
            move |w| {
                if w <= 0.0 {
                    0.0
                } else if w <= w_l {
                    w
                } else if w < safe {
                    xi * (safe - w)
                } else {
                    0.0
                }
            },
            move |w| {
                if w <= 0.0 {
                    Regime::Zero
                } else if w <= w_l {
                    Regime::FullyInvested
                } else {
                    Regime::Unconstrained
                }
            },
        )
    }
}

/// Ruin probability under the borrowing constraint.
pub fn psi_nb(spec: &ProblemSpec, w: f64, m: f64) -> Result<f64> {
    solve_psi_nb(spec)?.value(w, m)
}

/// Constrained minimizing allocation at wealth `w`.
pub fn pi_nb(spec: &ProblemSpec, w: f64) -> Result<f64> {
    solve_psi_nb(spec)?.allocation(w)
}

/// Expected lifetime shortfall below `x_target` under the borrowing
/// constraint.
pub fn value_shortfall_nb(spec: &ProblemSpec, w: f64, m: f64, x_target: f64) -> Result<f64> {
    solve_psi_nb(spec)?.shortfall(w, m, x_target)
}

/// Expected penalty of the lifetime minimum under the borrowing constraint.
pub fn value_f_nb(spec: &ProblemSpec, pen: &PenaltyFunction, w: f64, m: f64) -> Result<f64> {
    solve_psi_nb(spec)?.penalty_value(pen, w, m)
}
