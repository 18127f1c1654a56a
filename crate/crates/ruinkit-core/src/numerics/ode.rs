//! Explicit Runge-Kutta 5(4) integration with a fourth-order interpolant on
//! every accepted step and sign-change event location on the interpolant.
//! Works in either time direction; the step size is signed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fm;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

/// Fifth-order weights; the second stage drops out.
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

/// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Weights of the quartic interpolation term.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step, stored as interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let omt = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            let [c0, c1, c2, c3, c4] = [
                self.cont[0][i],
                self.cont[1][i],
                self.cont[2][i],
                self.cont[3][i],
                self.cont[4][i],
            ];
            out[i] = c0 + theta * (c1 + omt * (c2 + theta * (c3 + omt * c4)));
        }
        out
    }
}

/// Piecewise-polynomial solution usable anywhere between its endpoints.
#[derive(Debug, Clone)]
pub struct DenseOutput<const N: usize> {
    segs: Vec<Segment<N>>,
    forward: bool,
}

impl<const N: usize> DenseOutput<N> {
    pub fn t_start(&self) -> f64 {
        self.segs[0].t0
    }

    pub fn t_end(&self) -> f64 {
        let last = &self.segs[self.segs.len() - 1];
        last.t0 + last.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let n = self.segs.len();
        let idx = if self.forward {
            self.segs.partition_point(|s| s.t0 <= t)
        } else {
            self.segs.partition_point(|s| s.t0 >= t)
        };
        self.segs[idx.saturating_sub(1).min(n - 1)].eval(t)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; a small fraction of the span when absent.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h0: None,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub dense: DenseOutput<N>,
    pub t_final: f64,
    pub y_final: [f64; N],
    /// Location of the first sign change of the event function, if any.
    pub event: Option<f64>,
    pub steps: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t_end` (either direction).
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    integrate_with_event(f, t0, y0, t_end, |_, _| 1.0, opts)
}

/// Like [`integrate`], but stops at the first sign change of `event`,
/// locating it on the interpolant to about 1e-12 in `t`.
pub fn integrate_with_event<const N: usize, F, G>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    mut event: G,
    opts: &OdeOptions,
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]) -> f64,
{
    let span = t_end - t0;
    if span == 0.0 || !span.is_finite() {
        return Err(Error::Internal("integration span is empty or not finite"));
    }
    let forward = span > 0.0;
    let mut h = opts.h0.unwrap_or(span * 1e-4);
    if h == 0.0 || (h > 0.0) != forward {
        return Err(Error::Internal("initial step opposes the integration direction"));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let g0 = event(t, &y);
    if g0 == 0.0 {
        return Ok(OdeSolution {
            dense: DenseOutput {
                segs: alloc::vec![Segment {
                    t0,
                    h: span,
                    cont: [y0, [0.0; N], [0.0; N], [0.0; N], [0.0; N]],
                }],
                forward,
            },
            t_final: t0,
            y_final: y0,
            event: Some(t0),
            steps: 0,
        });
    }
    let mut g_prev = g0;

    let mut segs: Vec<Segment<N>> = Vec::new();
    let mut steps = 0usize;

    loop {
        if steps >= opts.max_steps {
            return Err(Error::SolverFailure {
                context: "runge-kutta integration",
                detail: alloc::format!("step budget of {} exhausted at t = {t:e}", opts.max_steps),
            });
        }
        steps += 1;

        // Land exactly on the terminal point.
        let mut last = false;
        if (t + h - t_end) * if forward { 1.0 } else { -1.0 } >= 0.0 {
            h = t_end - t;
            last = true;
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y1 = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(t + h, &y1);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i]
                    + E3 * k3[i]
                    + E4 * k4[i]
                    + E5 * k5[i]
                    + E6 * k6[i]
                    + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * fm::abs(y[i]).max(fm::abs(y1[i]));
            err_sq += (e / scale) * (e / scale);
        }
        let err = fm::sqrt(err_sq / N as f64);

        if err.is_finite() && err <= 1.0 {
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y1[i] - y[i];
                let bspl = h * k1[i] - dy;
                cont[0][i] = y[i];
                cont[1][i] = dy;
                cont[2][i] = bspl;
                cont[3][i] = dy - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let seg = Segment { t0: t, h, cont };

            let t_next = t + h;
            let g_next = event(t_next, &y1);
            if g_next == 0.0 || (g_next > 0.0) != (g_prev > 0.0) {
                // Bisect on the interpolant.
                let (mut a, mut b) = (t, t_next);
                let mut ga = g_prev;
                for _ in 0..200 {
                    if fm::abs(b - a) <= 1e-12 * fm::abs(b).max(1.0) {
                        break;
                    }
                    let mid = 0.5 * (a + b);
                    let gm = event(mid, &seg.eval(mid));
                    if gm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if (gm > 0.0) == (ga > 0.0) {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                let t_ev = 0.5 * (a + b);
                let y_ev = seg.eval(t_ev);
                segs.push(seg);
                return Ok(OdeSolution {
                    dense: DenseOutput { segs, forward },
                    t_final: t_ev,
                    y_final: y_ev,
                    event: Some(t_ev),
                    steps,
                });
            }

            segs.push(seg);
            t = t_next;
            y = y1;
            k1 = k7;
            g_prev = g_next;

            if last {
                return Ok(OdeSolution {
                    dense: DenseOutput { segs, forward },
                    t_final: t,
                    y_final: y,
                    event: None,
                    steps,
                });
            }
        }

        let factor = if err.is_finite() && err > 0.0 {
            (0.9 * fm::powf(err, -0.2)).clamp(0.2, 5.0)
        } else if err == 0.0 {
            5.0
        } else {
            0.2
        };
        h *= factor;
        if fm::abs(h) < 1e-14 * fm::abs(t).max(1.0) {
            return Err(Error::SolverFailure {
                context: "runge-kutta integration",
                detail: alloc::format!("step size underflow at t = {t:e}"),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_row_sums() {
        assert!((A21 - C2).abs() < 1e-16);
        assert!((A31 + A32 - C3).abs() < 1e-16);
        assert!((A41 + A42 + A43 - C4).abs() < 1e-15);
        assert!((A51 + A52 + A53 + A54 - C5).abs() < 1e-15);
        assert!((A61 + A62 + A63 + A64 + A65 - 1.0).abs() < 1e-15);
        assert!((B1 + B3 + B4 + B5 + B6 - 1.0).abs() < 1e-15);
        assert!((E1 + E3 + E4 + E5 + E6 + E7).abs() < 1e-15);
    }

    #[test]
    fn exponential_growth() {
        let sol = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, &OdeOptions::default())
            .unwrap();
        assert!((sol.y_final[0] - core::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_and_dense_accuracy() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let sol = integrate(f, 0.0, [0.0, 1.0], 2.0, &OdeOptions::default()).unwrap();
        assert!((sol.y_final[0] - 2.0f64.sin()).abs() < 1e-9);
        for i in 0..40 {
            let t = 2.0 * (i as f64 + 0.5) / 40.0;
            let v = sol.dense.eval(t);
            assert!((v[0] - t.sin()).abs() < 1e-8, "dense value off at t={t}");
            assert!((v[1] - t.cos()).abs() < 1e-8, "dense slope off at t={t}");
        }
    }

    #[test]
    fn backward_integration() {
        let sol = integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [core::f64::consts::E], 0.0, &OdeOptions::default())
            .unwrap();
        assert!((sol.y_final[0] - 1.0).abs() < 1e-9);
        let mid = sol.dense.eval(0.5);
        assert!((mid[0] - fm::exp(0.5)).abs() < 1e-8);
    }

    #[test]
    fn event_location() {
        // y' = 1 from 0: y hits 0.5 at t = 0.5.
        let sol = integrate_with_event(
            |_, _: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            2.0,
            |_, y| y[0] - 0.5,
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((sol.event.unwrap() - 0.5).abs() < 1e-11);
        assert!((sol.y_final[0] - 0.5).abs() < 1e-11);

        // Oscillator velocity crosses zero at t = pi/2.
        let sol = integrate_with_event(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            3.0,
            |_, y| y[1],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((sol.event.unwrap() - core::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn no_event_returns_endpoint() {
        let sol = integrate_with_event(
            |_, _: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            1.0,
            |_, y| y[0] + 10.0,
            &OdeOptions::default(),
        )
        .unwrap();
        assert!(sol.event.is_none());
        assert!((sol.t_final - 1.0).abs() < 1e-15);
    }
}
