//! Expected lifetime shortfall below a target, and its generalization to an
//! arbitrary penalty on the lifetime minimum wealth.
//!
//! The shortfall objective `E[(x - min wealth)+]` is minimized by exactly
//! the same feedback rule as the lifetime ruin probability, so its value is
//! an integral of the power-law distribution of the lifetime minimum. The
//! same integral with a general decreasing penalty `f` in place of the hinge
//! gives `value_f`.

use alloc::sync::Arc;

use crate::error::{Error, Result};
use crate::fm;
use crate::lifetime_ruin::pi_psi;
use crate::market::{derive_constants, ProblemSpec};
use crate::numerics::quad;

/// Expected shortfall `E[(x - lifetime minimum)+]` under the minimizing
/// strategy, from wealth `w` with running minimum `m`.
pub fn value_shortfall(spec: &ProblemSpec, w: f64, m: f64) -> Result<f64> {
    spec.validate()?;
    let k = derive_constants(&spec.params)?;
    let x = spec.x;
    if m > w {
        return Err(Error::Domain("running minimum m exceeds current wealth w"));
    }
    let sunk = (x - m).max(0.0);
    if w >= k.safe {
        return Ok(sunk);
    }
    let c = spec.params.c;
    let r = spec.params.r;
    let level = m.min(x);
    let ratio = (c - r * w) / (c - r * level);
    Ok(sunk + fm::powf(ratio, k.p) * (c - r * level) / (r * (k.p - 1.0)))
}

/// Allocation of the shortfall-minimizing strategy. Identical to the
/// ruin-minimizing allocation, bit for bit.
#[allow(non_snake_case)]
pub fn pi_V(spec: &ProblemSpec, w: f64) -> Result<f64> {
    pi_psi(spec, w)
}

type PenaltyFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A decreasing penalty on the lifetime minimum wealth.
///
/// `f` and its derivative are supplied as closures; `support_upper` is a
/// level above which the derivative vanishes, and `bound` bounds the total
/// variation of `f` (for a monotone penalty, the size of its range). The
/// bound controls where the integration tail can be cut.
#[derive(Clone)]
pub struct PenaltyFunction {
    f: Arc<PenaltyFn>,
    f_prime: Arc<PenaltyFn>,
    pub support_upper: f64,
    pub bound: f64,
}

impl core::fmt::Debug for PenaltyFunction {
    fn fmt(&self, fm: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        fm.debug_struct("PenaltyFunction")
            .field("support_upper", &self.support_upper)
            .field("bound", &self.bound)
            .finish_non_exhaustive()
    }
}

impl PenaltyFunction {
    pub fn new<F, G>(f: F, f_prime: G, support_upper: f64, bound: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PenaltyFunction {
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            support_upper,
            bound,
        }
    }

    pub fn value(&self, m: f64) -> f64 {
        (self.f)(m)
    }

    pub fn slope(&self, m: f64) -> f64 {
        (self.f_prime)(m)
    }

    /// Shortfall below `x` capped at `cap`, with the two kinks of the hinge
    /// smoothed over a width `eps`. Converges to the plain shortfall as
    /// `cap -> inf` and `eps -> 0`.
    pub fn capped_shortfall(x: f64, cap: f64, eps: f64) -> Self {
        assert!(cap > eps && eps > 0.0, "need cap > eps > 0");
        let f = move |m: f64| -> f64 {
            if m >= x {
                0.0
            } else if m >= x - eps {
                (x - m) * (x - m) / (2.0 * eps)
            } else if m >= x - cap {
                x - m - 0.5 * eps
            } else if m >= x - cap - eps {
                let t = m - x + cap + eps;
                cap - t * t / (2.0 * eps)
            } else {
                cap
            }
        };
        let f_prime = move |m: f64| -> f64 {
            if m >= x {
                0.0
            } else if m >= x - eps {
                -(x - m) / eps
            } else if m >= x - cap {
                -1.0
            } else if m >= x - cap - eps {
                -(m - (x - cap - eps)) / eps
            } else {
                0.0
            }
        };
        PenaltyFunction::new(f, f_prime, x, cap)
    }
}

/// Expected penalty `E[f(lifetime minimum)]` under the minimizing strategy,
/// from wealth `w` with running minimum `m`: the penalty at `m` minus the
/// integral of `f'` against the distribution of the lifetime minimum.
pub fn value_f(spec: &ProblemSpec, pen: &PenaltyFunction, w: f64, m: f64) -> Result<f64> {
    spec.validate()?;
    let k = derive_constants(&spec.params)?;
    if m > w {
        return Err(Error::Domain("running minimum m exceeds current wealth w"));
    }
    if w >= k.safe {
        return Ok(pen.value(m));
    }
    let c = spec.params.c;
    let r = spec.params.r;
    let p = k.p;
    let numer = c - r * w;

    let b = m.min(pen.support_upper);
    // Below y = tail_cut the distribution function is so small that the
    // remaining integral is bounded by tail_tol.
    let tail_tol = 1e-12;
    let tail_cut = if pen.bound > 0.0 {
        (c - numer * fm::powf(pen.bound / tail_tol, 1.0 / p)) / r
    } else {
        b
    };
    if tail_cut >= b {
        return Ok(pen.value(m));
    }

    let integrand = |y: f64| -> Result<f64> {
        Ok(pen.slope(y) * fm::powf(numer / (c - r * y), p))
    };
    let q = quad::integrate(integrand, tail_cut, b, 1e-11, 1e-10, 4096)?;
    Ok(pen.value(m) - q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::MarketParams;

    fn spec(x: f64) -> ProblemSpec {
        let params = MarketParams::new(0.06, 0.02, 0.20, 0.04, 1.0).unwrap();
        ProblemSpec::new(params, x).unwrap()
    }

    #[test]
    fn shortfall_reference_values() {
        assert!(
            (value_shortfall(&spec(0.0), 25.0, 25.0).unwrap() - 1.942_735_271_510_415_473).abs()
                < 1e-13
        );
        assert!(
            (value_shortfall(&spec(10.0), 25.0, 25.0).unwrap() - 3.329_469_898_760_796_748).abs()
                < 1e-13
        );
        assert!(
            (value_shortfall(&spec(0.0), 5.0, -3.0).unwrap() - 15.556_676_656_975_832_77).abs()
                < 1e-12
        );
        assert!(
            (value_shortfall(&spec(10.0), 25.0, 8.0).unwrap() - 4.959_508_554_630_993_022).abs()
                < 1e-13
        );
    }

    #[test]
    fn shortfall_edges() {
        let s = spec(0.0);
        assert!(value_shortfall(&s, 25.0, 30.0).is_err());
        // At the safe level only the sunk shortfall remains.
        assert_eq!(value_shortfall(&s, 50.0, -4.0).unwrap(), 4.0);
        assert_eq!(value_shortfall(&s, 60.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn allocation_is_shared_with_ruin() {
        let s = spec(0.0);
        for w in [-120.0, -3.0, 0.0, 17.0, 42.0, 50.0] {
            assert_eq!(
                pi_V(&s, w).unwrap().to_bits(),
                pi_psi(&s, w).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn capped_penalty_shape() {
        let pen = PenaltyFunction::capped_shortfall(0.0, 100.0, 1e-4);
        assert_eq!(pen.value(1.0), 0.0);
        assert_eq!(pen.value(0.0), 0.0);
        assert!((pen.value(-1e-4) - 5e-5).abs() < 1e-18);
        assert!((pen.value(-50.0) - (50.0 - 5e-5)).abs() < 1e-12);
        assert_eq!(pen.value(-200.0), 100.0);
        // Continuity across the smoothing bands.
        for m in [-1e-4, -100.0, -100.0 - 1e-4] {
            let lo = pen.value(m - 1e-9);
            let hi = pen.value(m + 1e-9);
            assert!((lo - hi).abs() < 1e-8);
        }
        assert_eq!(pen.slope(-50.0), -1.0);
        assert_eq!(pen.slope(-200.0), 0.0);
    }

    #[test]
    fn penalty_value_approaches_plain_shortfall() {
        let s = spec(0.0);
        let exact = value_shortfall(&s, 25.0, 25.0).unwrap();
        let mut prev = 0.0;
        for cap in [10.0, 100.0, 1000.0] {
            let pen = PenaltyFunction::capped_shortfall(0.0, cap, 1e-6);
            let v = value_f(&s, &pen, 25.0, 25.0).unwrap();
            // Capping can only lower the expected penalty.
            assert!(v <= exact + 1e-9, "cap {cap}: {v} vs {exact}");
            assert!(v >= prev - 1e-12, "cap {cap} not monotone");
            prev = v;
        }
        let pen = PenaltyFunction::capped_shortfall(0.0, 1e6, 1e-6);
        let v = value_f(&s, &pen, 25.0, 25.0).unwrap();
        assert!((v - exact).abs() < 1e-6, "{v} vs {exact}");
    }

    #[test]
    fn penalty_respects_running_minimum() {
        let s = spec(0.0);
        let pen = PenaltyFunction::capped_shortfall(0.0, 1e6, 1e-6);
        let exact = value_shortfall(&s, 25.0, -4.0).unwrap();
        let v = value_f(&s, &pen, 25.0, -4.0).unwrap();
        assert!((v - exact).abs() < 2e-6, "{v} vs {exact}");
    }
}
