//! Market model, derived constants, and problem specification.
//!
//! The wealth of an agent who invests `pi(t)` in a risky asset with drift
//! `mu` and volatility `sigma`, keeps the rest at the riskless rate `r`, and
//! consumes at the constant rate `c` follows
//!
//! ```text
//! dW = (r W + (mu - r) pi - c) dt + sigma pi dB.
//! ```
//!
//! The agent dies at an independent exponential time with hazard `lambda`.
//! Every solver in this crate works on this model; the quantities that
//! recur everywhere (the Sharpe-squared rate `delta`, the ruin exponent `p`,
//! the dual exponents `b1`/`b2`, the feedback gain `xi`, and the safe level
//! `c / r`) are computed once by [`derive_constants`].

use crate::error::{Error, Result};
use crate::fm;

/// Parameters of the financial market and the consumption stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Drift of the risky asset.
    pub mu: f64,
    /// Riskless rate.
    pub r: f64,
    /// Volatility of the risky asset.
    pub sigma: f64,
    /// Hazard rate of the exponential death time.
    pub lambda: f64,
    /// Consumption rate.
    pub c: f64,
}

impl MarketParams {
    pub fn new(mu: f64, r: f64, sigma: f64, lambda: f64, c: f64) -> Result<Self> {
        let params = MarketParams {
            mu,
            r,
            sigma,
            lambda,
            c,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks the standing assumptions, naming the violated one.
    pub fn validate(&self) -> Result<()> {
        for (value, name) in [
            (self.mu, "mu must be finite"),
            (self.r, "r must be finite"),
            (self.sigma, "sigma must be finite"),
            (self.lambda, "lambda must be finite"),
            (self.c, "c must be finite"),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParams(name));
            }
        }
        if self.r <= 0.0 {
            return Err(Error::InvalidParams("requires r > 0"));
        }
        if self.mu <= self.r {
            return Err(Error::InvalidParams("requires mu > r"));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidParams("requires sigma > 0"));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidParams("requires lambda > 0"));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParams("requires c > 0"));
        }
        Ok(())
    }

    /// Wealth level `c / r` from which consumption is funded risklessly forever.
    pub fn safe_level(&self) -> f64 {
        self.c / self.r
    }
}

/// Constants derived from [`MarketParams`] that appear throughout the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Half the squared Sharpe ratio, `((mu - r) / sigma)^2 / 2`.
    pub delta: f64,
    /// Decay exponent of the ruin probability in `c - r w`; always `> 1`.
    pub p: f64,
    /// Positive dual exponent, equal to `p / (p - 1)`.
    pub b1: f64,
    /// Negative dual exponent.
    pub b2: f64,
    /// Feedback gain: the optimal ruin-minimizing allocation is `xi (c/r - w)`.
    pub xi: f64,
    /// Wealth at which the unconstrained allocation equals wealth itself,
    /// `xi / (1 + xi) * c / r`; the borrowing constraint binds below it.
    pub w_l: f64,
    /// The safe level `c / r`.
    pub safe: f64,
}

/// Computes the constants shared by all solvers. Fails only on invalid
/// parameters; the discriminants involved are non-negative for every
/// admissible parameter set.
pub fn derive_constants(params: &MarketParams) -> Result<DerivedConstants> {
    params.validate()?;
    let MarketParams {
        mu,
        r,
        sigma,
        lambda,
        c,
    } = *params;

    let sharpe = (mu - r) / sigma;
    let delta = 0.5 * sharpe * sharpe;

    // (r + lambda + delta)^2 - 4 r lambda >= (r - lambda)^2 >= 0.
    let s = r + lambda + delta;
    let disc_p = s * s - 4.0 * r * lambda;
    if disc_p < 0.0 {
        return Err(Error::Internal("discriminant of the ruin exponent is negative"));
    }
    let p = (s + fm::sqrt(disc_p)) / (2.0 * r);

    // (r - lambda + delta)^2 + 4 lambda delta >= 0 trivially.
    let t = r - lambda + delta;
    let disc_b = t * t + 4.0 * lambda * delta;
    if disc_b < 0.0 {
        return Err(Error::Internal("discriminant of the dual exponents is negative"));
    }
    let root_b = fm::sqrt(disc_b);
    let b1 = (t + root_b) / (2.0 * delta);
    let b2 = (t - root_b) / (2.0 * delta);

    let xi = (mu - r) / (sigma * sigma * (p - 1.0));
    let safe = c / r;
    let w_l = xi / (1.0 + xi) * safe;

    Ok(DerivedConstants {
        delta,
        p,
        b1,
        b2,
        xi,
        w_l,
        safe,
    })
}

/// Treatment of strictly negative wealth in the borrowing-constrained model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeWealthMode {
    /// Negative wealth is absorbing: consumption stops and the agent lives
    /// on at the shortfall level reached.
    Welfare,
    /// The agent keeps consuming by borrowing at the riskless rate while
    /// investing nothing.
    BorrowForConsumption,
}

/// A ruin or shortfall problem: market, ruin level, and optional barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub params: MarketParams,
    /// Ruin level: wealth hitting `x` counts as ruin while alive.
    pub x: f64,
    /// Lower barrier `M < x` for the problems that bound wealth below;
    /// `None` for the problems that only watch the level `x`.
    pub barrier: Option<f64>,
    /// How negative wealth is handled in the borrowing-constrained model.
    pub negative_wealth_mode: Option<NegativeWealthMode>,
}

impl ProblemSpec {
    pub fn new(params: MarketParams, x: f64) -> Result<Self> {
        let spec = ProblemSpec {
            params,
            x,
            barrier: None,
            negative_wealth_mode: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_barrier(mut self, barrier: f64) -> Result<Self> {
        self.barrier = Some(barrier);
        self.validate()?;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: NegativeWealthMode) -> Self {
        self.negative_wealth_mode = Some(mode);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.x.is_finite() {
            return Err(Error::InvalidSpec("ruin level x must be finite"));
        }
        if self.x >= self.params.safe_level() {
            return Err(Error::InvalidSpec("requires x < c / r"));
        }
        if let Some(m) = self.barrier {
            if !m.is_finite() {
                return Err(Error::InvalidSpec("barrier M must be finite"));
            }
            if m >= self.x {
                return Err(Error::InvalidSpec("requires M < x"));
            }
        }
        Ok(())
    }
}
