//! Probability of ruin during the investor's lifetime, minimized over
//! investment strategies, in closed form.
//!
//! Ruin means wealth reaching the level `x` while the investor is alive.
//! The state is the current wealth `w` together with the running minimum
//! `m` of wealth so far; the probability is memoryless in `m` except that
//! `m <= x` means ruin has already happened. The minimizing allocation is
//! linear in the gap to the safe level, `pi(w) = xi (c/r - w)`, and under it
//! the running minimum at death has an explicit power-law distribution.

use crate::error::{Error, Result};
use crate::fm;
use crate::market::{derive_constants, ProblemSpec};
use crate::strategy::Strategy;

/// Minimal probability that wealth hits `spec.x` before death, starting
/// from wealth `w` with running minimum `m`.
pub fn psi(spec: &ProblemSpec, w: f64, m: f64) -> Result<f64> {
    spec.validate()?;
    let k = derive_constants(&spec.params)?;
    let x = spec.x;
    if m <= x {
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
    Ok(fm::powf((c - r * w) / (c - r * x), k.p))
}

/// Allocation of the ruin-minimizing strategy at wealth `w`.
pub fn pi_psi(spec: &ProblemSpec, w: f64) -> Result<f64> {
    spec.validate()?;
    let k = derive_constants(&spec.params)?;
    if w > k.safe {
        return Err(Error::Domain("wealth above the safe level c / r"));
    }
    Ok(k.xi * (k.safe - w))
}

/// Distribution function of the lifetime minimum wealth under the
/// ruin-minimizing strategy: the probability that the minimum ever falls
/// to `y` or below, starting from wealth `w` with running minimum `m`.
pub fn min_wealth_cdf(spec: &ProblemSpec, w: f64, m: f64, y: f64) -> Result<f64> {
    spec.validate()?;
    let k = derive_constants(&spec.params)?;
    if m > w {
        return Err(Error::Domain("running minimum m exceeds current wealth w"));
    }
    if w >= k.safe {
        return Err(Error::Domain("wealth at or above the safe level c / r"));
    }
    if y >= m {
        return Ok(1.0);
    }
    let c = spec.params.c;
    let r = spec.params.r;
    Ok(fm::powf((c - r * w) / (c - r * y), k.p))
}

/// The ruin-minimizing feedback rule as a [`Strategy`].
pub fn strategy(spec: &ProblemSpec) -> Result<Strategy> {
    spec.validate()?;
    let k = derive_constants(&spec.params)?;
    Ok(Strategy::linear_gap("psi", k.xi, k.safe))
}
