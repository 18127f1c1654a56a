//! Probability of being ruined at the moment of death, with wealth bounded
//! below by a barrier, minimized over investment strategies.
//!
//! Ruin at death means dying with wealth at or below the level `x`; wealth
//! may drop below `x` and recover, but is absorbed at the barrier `M < x`.
//! Above `x` the minimizing rule coincides with the lifetime-ruin rule and
//! the value is an explicit power. Between `M` and `x` the value is concave
//! rather than convex, and is recovered from a concave conjugate: the dual
//! variable `y` is minus the slope of the value, the dual curve is a sum of
//! two powers of `y` plus a linear part, and wealth is read off as the dual
//! slope. The pair of dual boundary points `(y_x, y_M)` comes from a scalar
//! equation in their ratio.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fm;
use crate::market::{derive_constants, DerivedConstants, ProblemSpec};
use crate::numerics::roots;
use crate::strategy::Strategy;

/// Dual description of the value between the barrier and the ruin level:
/// `coeff1 * y^b1 + coeff2 * y^b2 + linear_slope * y + constant` on
/// `[y_lo, y_hi]`, with `exponents = (b1, b2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCurve {
    pub coeff1: f64,
    pub coeff2: f64,
    pub linear_slope: f64,
    pub constant: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub exponents: (f64, f64),
}

impl DualCurve {
    pub fn value(&self, y: f64) -> f64 {
        let (b1, b2) = self.exponents;
        self.coeff1 * fm::powf(y, b1)
            + self.coeff2 * fm::powf(y, b2)
            + self.linear_slope * y
            + self.constant
    }

    /// First derivative in `y`; equals the wealth at which the dual point
    /// `y` is attained.
    pub fn slope(&self, y: f64) -> f64 {
        let (b1, b2) = self.exponents;
        self.coeff1 * b1 * fm::powf(y, b1 - 1.0)
            + self.coeff2 * b2 * fm::powf(y, b2 - 1.0)
            + self.linear_slope
    }

    /// Second derivative in `y`; negative throughout the dual interval.
    pub fn curvature(&self, y: f64) -> f64 {
        let (b1, b2) = self.exponents;
        self.coeff1 * b1 * (b1 - 1.0) * fm::powf(y, b1 - 2.0)
            + self.coeff2 * b2 * (b2 - 1.0) * fm::powf(y, b2 - 2.0)
    }

    /// Inverts the slope map: finds `y` in `[y_lo, y_hi]` with
    /// `slope(y) = w`. The slope decreases in `y`, so the root is bracketed.
    pub fn invert_slope(&self, w: f64) -> Result<f64> {
        let top = self.slope(self.y_lo);
        let bottom = self.slope(self.y_hi);
        if w >= top {
            return Ok(self.y_lo);
        }
        if w <= bottom {
            return Ok(self.y_hi);
        }
        roots::solve_bracketed(
            |y| Ok(self.slope(y) - w),
            self.y_lo,
            self.y_hi,
            top - w,
            bottom - w,
            1e-15 * self.y_hi,
            200,
        )
    }
}

/// Solved ruin-at-death problem.
#[derive(Debug, Clone)]
pub struct RuinAtDeathSolution {
    /// Value at the ruin level: the probability of ruin at death when
    /// starting exactly at `x`.
    pub beta: f64,
    pub dual: DualCurve,
    pub spec: ProblemSpec,
    constants: DerivedConstants,
}

fn barrier(spec: &ProblemSpec) -> Result<f64> {
    spec.barrier
        .ok_or(Error::InvalidSpec("this objective requires a lower barrier M"))
}

/// Solves the scalar equation that determines the ratio
/// `rho = y_x / y_M` of the dual boundary points, on `(0, 1)`.
pub fn solve_ratio_equation(spec: &ProblemSpec) -> Result<f64> {
    spec.validate()?;
    let m_bar = barrier(spec)?;
    let k = derive_constants(&spec.params)?;
    let (b1, b2) = (k.b1, k.b2);
    let span_m = k.safe - m_bar;
    let span_x = k.safe - spec.x;
    let q1 = b1 * (1.0 - b2) / (b1 - b2);
    let q2 = b2 * (b1 - 1.0) / (b1 - b2);
    let eval = |rho: f64| -> f64 {
        span_m * (q1 * fm::powf(rho, b1 - 1.0) + q2 * fm::powf(rho, b2 - 1.0)) - span_x
    };

    // At rho = 1 the combination telescopes to x - M > 0; toward 0 the
    // negative-exponent term dominates and the value falls to -inf.
    let mut lo = 0.5;
    let f_hi = eval(1.0);
    if f_hi <= 0.0 {
        return Err(Error::Internal("ratio equation has the wrong sign at 1"));
    }
    let mut f_lo = eval(lo);
    while f_lo > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::SolverFailure {
                context: "ratio equation",
                detail: alloc::format!("no sign change found down to rho = {lo:e}"),
            });
        }
        f_lo = eval(lo);
    }
    roots::solve_bracketed(|rho| Ok(eval(rho)), lo, 1.0, f_lo, f_hi, 1e-16, 300)
}

/// Dual boundary points `(y_x, y_M)` of the ruin-at-death problem.
pub fn solve_boundaries(spec: &ProblemSpec) -> Result<(f64, f64)> {
    let sol = solve(spec)?;
    Ok((sol.dual.y_lo, sol.dual.y_hi))
}

/// Solves the full problem: ratio equation, dual boundaries, dual curve
/// coefficients, and the value at the ruin level.
pub fn solve(spec: &ProblemSpec) -> Result<RuinAtDeathSolution> {
    spec.validate()?;
    let m_bar = barrier(spec)?;
    let k = derive_constants(&spec.params)?;
    let rho = solve_ratio_equation(spec)?;
    let (b1, b2) = (k.b1, k.b2);
    let span_m = k.safe - m_bar;
    let span_x = k.safe - spec.x;
    let c = spec.params.c;
    let r = spec.params.r;

    let inv_y_x = -((k.p - 1.0) / k.p) * span_x
        + (1.0 - b2) / (b1 - b2) * span_m * fm::powf(rho, b1 - 1.0)
        + (b1 - 1.0) / (b1 - b2) * span_m * fm::powf(rho, b2 - 1.0);
    if inv_y_x <= 0.0 || !inv_y_x.is_finite() {
        return Err(Error::InvalidSpec(
            "dual boundary condition has no positive solution for this barrier",
        ));
    }
    let y_x = 1.0 / inv_y_x;
    let y_m = y_x / rho;

    let d1 = (1.0 - b2) / (b1 - b2) * (m_bar - k.safe) * fm::powf(y_m, 1.0 - b1);
    let d2 = (b1 - 1.0) / (b1 - b2) * (m_bar - k.safe) * fm::powf(y_m, 1.0 - b2);
    if !(d1 < 0.0 && d2 < 0.0) {
        return Err(Error::Internal("dual coefficients lost their sign"));
    }
    let beta = y_x * (c - r * spec.x) / (r * k.p);

    Ok(RuinAtDeathSolution {
        beta,
        dual: DualCurve {
            coeff1: d1,
            coeff2: d2,
            linear_slope: k.safe,
            constant: 1.0,
            y_lo: y_x,
            y_hi: y_m,
            exponents: (b1, b2),
        },
        spec: *spec,
        constants: k,
    })
}

impl RuinAtDeathSolution {
    /// Probability of ruin at death from wealth `w` with running minimum `m`.
    pub fn value(&self, w: f64, m: f64) -> Result<f64> {
        let spec = &self.spec;
        let k = &self.constants;
        let m_bar = self.barrier_level();
        if m <= m_bar || w <= m_bar {
            return Ok(1.0);
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
        let y = self.dual.invert_slope(w)?;
        Ok(self.dual.value(y) - w * y)
    }

    /// Minimizing allocation at wealth `w`.
    pub fn allocation(&self, w: f64) -> Result<f64> {
        let spec = &self.spec;
        let k = &self.constants;
        let m_bar = self.barrier_level();
        if w > k.safe {
            return Err(Error::Domain("wealth above the safe level c / r"));
        }
        if w <= m_bar {
            return Err(Error::Domain("wealth at or below the barrier is absorbed"));
        }
        if w >= spec.x {
            return Ok(k.xi * (k.safe - w));
        }
        let y = self.dual.invert_slope(w)?;
        let params = &spec.params;
        let sigma_sq = params.sigma * params.sigma;
        Ok((params.mu - params.r) / sigma_sq * (-y * self.dual.curvature(y)))
    }

    pub fn barrier_level(&self) -> f64 {
        self.spec.barrier.unwrap_or(f64::NEG_INFINITY)
    }

    /// Residuals of the four conditions that defined the dual curve:
    /// slope equals `x` at `y_lo`, slope equals `M` at `y_hi`, value one at
    /// the barrier, and value continuity with the outer power at `x`. Each
    /// residual is normalized by the scale of the quantity it matches.
    pub fn boundary_residuals(&self) -> [f64; 4] {
        let d = &self.dual;
        let x = self.spec.x;
        let m_bar = self.barrier_level();
        let scale_w = fm::abs(x).max(fm::abs(m_bar)).max(1.0);
        [
            (d.slope(d.y_lo) - x) / scale_w,
            (d.slope(d.y_hi) - m_bar) / scale_w,
            d.value(d.y_hi) - m_bar * d.y_hi - 1.0,
            (d.value(d.y_lo) - x * d.y_lo - self.beta) / self.beta.max(1e-300),
        ]
    }

    /// Residual of the dual equation
    /// `delta y^2 V'' - (r - lambda) y V' - lambda V + c y + lambda = 0`
    /// at a dual point `y`, normalized by `lambda`.
    pub fn dual_ode_residual(&self, y: f64) -> f64 {
        let p = &self.spec.params;
        let k = &self.constants;
        let d = &self.dual;
        let res = k.delta * y * y * d.curvature(y) - (p.r - p.lambda) * y * d.slope(y)
            - p.lambda * d.value(y)
            + p.c * y
            + p.lambda;
        res / p.lambda
    }

    /// Tabulates the rule as a piecewise-linear strategy: sampled between
    /// the barrier and `x`, exact (linear) between `x` and the safe level,
    /// with the jump at `x` encoded as a repeated knot.
    pub fn strategy(&self, samples: usize) -> Result<Strategy> {
        let n = samples.max(16);
        let k = &self.constants;
        let d = &self.dual;
        let params = &self.spec.params;
        let gearing = (params.mu - params.r) / (params.sigma * params.sigma);
        let x = self.spec.x;
        let m_bar = self.barrier_level();
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(n + 3);
        // March y from y_hi down to y_lo so wealth rises from M to x. The
        // endpoint wealths are pinned exactly so the repeated knot at x
        // lines up.
        let log_lo = fm::ln(d.y_lo);
        let log_hi = fm::ln(d.y_hi);
        for i in 0..=n {
            let t = (i as f64) / (n as f64);
            let y = fm::exp(log_hi + (log_lo - log_hi) * t);
            let w = if i == 0 {
                m_bar
            } else if i == n {
                x
            } else {
                d.slope(y)
            };
            let pi = gearing * (-y * d.curvature(y));
            points.push((w, pi));
        }
        points.push((x, k.xi * (k.safe - x)));
        points.push((k.safe, 0.0));
        for pair in points.windows(2) {
            if pair[1].0 < pair[0].0 {
                return Err(Error::Internal("dual slope samples are not monotone"));
            }
        }
        Ok(Strategy::piecewise_linear("phi", points))
    }
}

/// Probability of ruin at death from wealth `w` with running minimum `m`.
pub fn phi(spec: &ProblemSpec, w: f64, m: f64) -> Result<f64> {
    solve(spec)?.value(w, m)
}

/// Minimizing allocation at wealth `w`.
pub fn pi_phi(spec: &ProblemSpec, w: f64) -> Result<f64> {
    solve(spec)?.allocation(w)
}
