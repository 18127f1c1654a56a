//! Investment strategies as feedback rules on current wealth.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Qualitative description of the allocation at a wealth level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Interior optimum; the rule is not pinned to a constraint.
    Unconstrained,
    /// The no-borrowing constraint binds: all wealth is in the risky asset.
    FullyInvested,
    /// Nothing in the risky asset.
    Zero,
}

type AllocFn = dyn Fn(f64) -> f64 + Send + Sync;
type RegimeFn = dyn Fn(f64) -> Regime + Send + Sync;

/// A feedback rule `w -> pi(w)` giving the amount held in the risky asset,
/// together with enough structure for simulation and reporting.
#[derive(Clone)]
pub struct Strategy {
    pub label: String,
    /// Wealth interval on which the rule is meaningful.
    pub domain: (f64, f64),
    /// Wealth levels where the allocation jumps.
    pub discontinuities: Vec<f64>,
    alloc: Arc<AllocFn>,
    regime: Arc<RegimeFn>,
    /// Present when the allocation is exactly `kappa * (safe - w)`, in which
    /// case the gap `safe - w` is a geometric Brownian motion and can be
    /// simulated without discretization error.
    gbm_kappa: Option<f64>,
    safe: f64,
}

impl core::fmt::Debug for Strategy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Strategy")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("discontinuities", &self.discontinuities)
            .field("gbm_kappa", &self.gbm_kappa)
            .field("safe", &self.safe)
            .finish_non_exhaustive()
    }
}

impl Strategy {
    /// Wraps arbitrary allocation and regime closures.
    pub fn new<A, R>(
        label: impl Into<String>,
        domain: (f64, f64),
        discontinuities: Vec<f64>,
        alloc: A,
        regime: R,
    ) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64) -> Regime + Send + Sync + 'static,
    {
        Strategy {
            label: label.into(),
            domain,
            discontinuities,
            alloc: Arc::new(alloc),
            regime: Arc::new(regime),
            gbm_kappa: None,
            safe: f64::INFINITY,
        }
    }

    /// The rule `pi(w) = kappa * (safe - w)`, zero at and above the safe
    /// level. Marked as exactly simulable.
    pub fn linear_gap(label: impl Into<String>, kappa: f64, safe: f64) -> Self {
        Strategy {
            label: label.into(),
            domain: (f64::NEG_INFINITY, safe),
            discontinuities: Vec::new(),
            alloc: Arc::new(move |w| if w >= safe { 0.0 } else { kappa * (safe - w) }),
            regime: Arc::new(|_| Regime::Unconstrained),
            gbm_kappa: Some(kappa),
            safe,
        }
    }

    /// Linear interpolation through `points` (sorted by wealth), constant
    /// beyond the first and last point. A repeated wealth value with two
    /// different allocations encodes a jump and is reported as such.
    pub fn piecewise_linear(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        assert!(points.len() >= 2, "need at least two interpolation points");
        let mut discontinuities = Vec::new();
        for pair in points.windows(2) {
            assert!(
                pair[0].0 <= pair[1].0,
                "interpolation points must be sorted by wealth"
            );
            if pair[0].0 == pair[1].0 && pair[0].1 != pair[1].1 {
                discontinuities.push(pair[0].0);
            }
        }
        let domain = (points[0].0, points[points.len() - 1].0);
        let pts = Arc::new(points);
        Strategy {
            label: label.into(),
            domain,
            discontinuities,
            alloc: Arc::new(move |w| interp(&pts, w)),
            regime: Arc::new(|_| Regime::Unconstrained),
            gbm_kappa: None,
            safe: f64::INFINITY,
        }
    }

    /// The same rule with every allocation multiplied by `factor`.
    pub fn scaled(&self, factor: f64, label: impl Into<String>) -> Self {
        let alloc = self.alloc.clone();
        Strategy {
            label: label.into(),
            domain: self.domain,
            discontinuities: self.discontinuities.clone(),
            alloc: Arc::new(move |w| factor * alloc(w)),
            regime: self.regime.clone(),
            gbm_kappa: self.gbm_kappa.map(|k| k * factor),
            safe: self.safe,
        }
    }

    /// The same rule with `offset` added everywhere. The result is no longer
    /// proportional to the gap, so exact gap simulation is dropped.
    pub fn shifted(&self, offset: f64, label: impl Into<String>) -> Self {
        let alloc = self.alloc.clone();
        Strategy {
            label: label.into(),
            domain: self.domain,
            discontinuities: self.discontinuities.clone(),
            alloc: Arc::new(move |w| alloc(w) + offset),
            regime: Arc::new(|_| Regime::Unconstrained),
            gbm_kappa: None,
            safe: self.safe,
        }
    }

    pub fn allocation(&self, w: f64) -> f64 {
        (self.alloc)(w)
    }

    pub fn regime(&self, w: f64) -> Regime {
        (self.regime)(w)
    }

    /// `Some(kappa)` when the rule is exactly `kappa * (safe - w)`.
    pub fn gbm_coefficient(&self) -> Option<f64> {
        self.gbm_kappa
    }

    /// Safe level used by [`Strategy::linear_gap`]; infinite otherwise.
    pub fn safe_level(&self) -> f64 {
        self.safe
    }
}

fn interp(pts: &[(f64, f64)], w: f64) -> f64 {
    if w <= pts[0].0 {
        return pts[0].1;
    }
    let n = pts.len();
    if w >= pts[n - 1].0 {
        return pts[n - 1].1;
    }
    let i = pts.partition_point(|p| p.0 <= w);
    let (x0, y0) = pts[i - 1];
    let (x1, y1) = pts[i];
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (w - x0) / (x1 - x0)
}
