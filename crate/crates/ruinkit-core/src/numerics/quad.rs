//! Globally adaptive quadrature built on a 15-point Kronrod rule with its
//! embedded 7-point Gauss rule. The interval with the largest error estimate
//! is bisected first, so budget goes where the integrand is hardest.

use alloc::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::fm;

/// Kronrod abscissae on [0, 1] by symmetry (the negatives are implied).
/// Odd indices 1, 3, 5 and the centre are the Gauss points.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);

    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let contribution = if x == 0.0 {
            f(mid)?
        } else {
            f(mid - half * x)? + f(mid + half * x)?
        };
        kronrod += wk * contribution;
        // The Gauss points are the odd-indexed abscissae plus the centre,
        // which lands at index 7 and therefore in the same branch.
        if i % 2 == 1 {
            gauss += WG[i / 2] * contribution;
        }
    }
    let value = kronrod * half;
    let error = fm::abs((kronrod - gauss) * half);
    Ok(Panel {
        a,
        b,
        value,
        error,
    })
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Integrates `f` over `[a, b]` until the summed error estimate drops below
/// `abs_tol + rel_tol * |integral|`, bisecting at most `max_panels` times.
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            panels: 0,
        });
    }
    if !(a < b) {
        return Err(Error::Internal("integration interval is reversed"));
    }

    let mut heap = BinaryHeap::new();
    heap.push(kronrod_panel(&mut f, a, b)?);
    let mut panels = 1usize;

    loop {
        let mut total = 0.0;
        let mut total_err = 0.0;
        for p in heap.iter() {
            total += p.value;
            total_err += p.error;
        }
        if total_err <= abs_tol + rel_tol * fm::abs(total) {
            // Re-sum smallest-first for a slightly better-conditioned total.
            let mut parts: alloc::vec::Vec<f64> = heap.iter().map(|p| p.value).collect();
            parts.sort_by(|x, y| fm::abs(*x).total_cmp(&fm::abs(*y)));
            let value = parts.iter().sum();
            return Ok(Quadrature {
                value,
                error_estimate: total_err,
                panels,
            });
        }
        if panels >= max_panels {
            return Err(Error::Numerics {
                context: "adaptive quadrature",
                achieved: total_err,
                requested: abs_tol + rel_tol * fm::abs(total),
            });
        }
        let worst = heap.pop().expect("heap cannot be empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Numerics {
                context: "adaptive quadrature",
                achieved: total_err,
                requested: abs_tol + rel_tol * fm::abs(total),
            });
        }
        heap.push(kronrod_panel(&mut f, worst.a, mid)?);
        heap.push(kronrod_panel(&mut f, mid, worst.b)?);
        panels += 1;
    }
}
