//! Scalar root finding on a bracket: bisection with a safeguarded secant
//! accelerator. The function may itself fail, so evaluations return `Result`.

use crate::error::{Error, Result};
use crate::fm;

/// Finds a root of `f` in `[a, b]` given evaluations `fa = f(a)` and
/// `fb = f(b)` of opposite sign (or zero). Each iteration tries a secant
/// step and falls back to bisection whenever the secant point leaves the
/// bracket or fails to shrink it fast enough, so convergence is guaranteed.
///
/// Stops when the bracket is narrower than `tol_x` (plus a few ulps of the
/// endpoints) and returns the endpoint with the smaller residual.
pub fn solve_bracketed<F>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    tol_x: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::Internal("root bracket is empty"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::SolverFailure {
            context: "bracketed root solve",
            detail: alloc::format!("no sign change on [{a:e}, {b:e}]"),
        });
    }

    let mut lo = a;
    let mut hi = b;
    let mut flo = fa;
    let mut fhi = fb;
    // Force a bisection whenever the previous step left the bracket wider
    // than half of what it was two steps ago.
    let mut width_two_ago = hi - lo;

    for _ in 0..max_iter {
        let width = hi - lo;
        if width <= tol_x + 4.0 * f64::EPSILON * fm::abs(lo).max(fm::abs(hi)) {
            break;
        }

        let mid = lo + 0.5 * width;
        let secant = lo - flo * (hi - lo) / (fhi - flo);
        let margin = 0.01 * width;
        let use_secant = secant.is_finite()
            && secant > lo + margin
            && secant < hi - margin
            && width <= 0.5 * width_two_ago;
        let x = if use_secant { secant } else { mid };
        width_two_ago = width;

        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == (flo > 0.0) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }

    let width = hi - lo;
    if width > tol_x + 4.0 * f64::EPSILON * fm::abs(lo).max(fm::abs(hi)) {
        return Err(Error::SolverFailure {
            context: "bracketed root solve",
            detail: alloc::format!("bracket stalled at width {width:e}"),
        });
    }
    Ok(if fm::abs(flo) <= fm::abs(fhi) { lo } else { hi })
}

/// Evaluates `f` on `n + 1` uniformly spaced points of `[a, b]` and returns
/// the first adjacent pair with a sign change, as `(x0, x1, f0, f1)`.
/// Points where `f` fails are treated as gaps: a sign change is only
/// reported between two successful evaluations with no failure in between.
pub fn scan_for_bracket<F>(mut f: F, a: f64, b: f64, n: usize) -> Result<(f64, f64, f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let x = a + (b - a) * (i as f64) / (n as f64);
        let Ok(fx) = f(x) else {
            prev = None;
            continue;
        };
        if fx == 0.0 {
            return Ok((x, x, 0.0, 0.0));
        }
        if let Some((px, pfx)) = prev {
            if (pfx > 0.0) != (fx > 0.0) {
                return Ok((px, x, pfx, fx));
            }
        }
        prev = Some((x, fx));
    }
    Err(Error::SolverFailure {
        context: "bracket scan",
        detail: alloc::format!("no sign change found on [{a:e}, {b:e}] with {n} panels"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = solve_bracketed(|x| Ok(x * x - 2.0), 0.0, 2.0, -2.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-13);

        let f = |x: f64| Ok(fm::exp(x) - 3.0);
        let r = solve_bracketed(f, 0.0, 2.0, f(0.0).unwrap(), f(2.0).unwrap(), 1e-14, 200).unwrap();
        assert!((r - fm::ln(3.0)).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_brackets() {
        assert!(solve_bracketed(|x| Ok(x), 1.0, 2.0, 1.0, 2.0, 1e-12, 100).is_err());
        assert!(solve_bracketed(|x| Ok(x), 2.0, 1.0, 2.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn scan_skips_failures() {
        // A pole at x = 0 must not be mistaken for a root.
        let f = |x: f64| {
            if fm::abs(x) < 0.05 {
                Err(Error::Domain("pole"))
            } else {
                Ok(1.0 / x)
            }
        };
        assert!(scan_for_bracket(f, -1.0, 1.0, 40).is_err());
        let (x0, x1, _, _) = scan_for_bracket(|x| Ok(x - 0.3), 0.0, 1.0, 10).unwrap();
        assert!(x0 <= 0.3 && 0.3 <= x1);
    }
}
