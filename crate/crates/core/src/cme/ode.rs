//! Explicit Runge–Kutta integrators for complex mode amplitudes: an adaptive
//! Dormand–Prince 5(4) pair with FSAL and a fixed-step classical RK4 used as
//! a brute-force reference.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type State<const N: usize> = [Complex64; N];

/// Error control of the adaptive integrator. A step is accepted when every
/// component satisfies |err_i| ≤ atol_i + rtol·max(|y_i|, |y_new,i|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    pub max_steps: usize,
}

impl<const N: usize> StepControl<N> {
    pub fn new(rtol: f64, atol: [f64; N]) -> Self {
        StepControl {
            rtol,
            atol,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b*, fifth minus embedded fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (w, k) in terms {
        if *w == 0.0 {
            continue;
        }
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += ki * (h * w);
        }
    }
    out
}

/// Integrate `dy/dx = f(x, y)` from `x0` and return the state at every
/// point of `samples` (non-decreasing, all ≥ `x0`).
pub fn dopri5<const N: usize, F>(
    f: F,
    x0: f64,
    y0: State<N>,
    samples: &[f64],
    control: &StepControl<N>,
) -> Result<(Vec<State<N>>, Stats)>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let mut stats = Stats::default();
    let mut out = Vec::with_capacity(samples.len());
    let Some(&x_end) = samples.last() else {
        return Ok((out, stats));
    };
    let span = x_end - x0;
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    stats.evaluations += 1;
    let mut h = if span > 0.0 { (0.01 * span).min(1.0) } else { 0.0 };
    let h_min = 1e-12 * span.abs().max(1.0);

    for &target in samples {
        if target < x {
            return Err(Error::InvalidParameter(
                "sample points must be non-decreasing and start at x0".into(),
            ));
        }
        while x < target {
            if stats.accepted + stats.rejected >= control.max_steps {
                return Err(Error::StepFailure {
                    x,
                    reason: format!("step budget of {} exhausted", control.max_steps),
                });
            }
            let remaining = target - x;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };

            let k2 = f(x + C2 * step, &combine(&y, step, &[(A21, &k1)]));
            let k3 = f(x + C3 * step, &combine(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * step, &combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                x + C5 * step,
                &combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + step,
                &combine(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combine(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(x + step, &y_new);
            stats.evaluations += 6;

            let mut err_ratio: f64 = 0.0;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
                let scale = control.atol[i] + control.rtol * y[i].norm().max(y_new[i].norm());
                let ratio = if scale > 0.0 {
                    e.norm() / scale
                } else if e.norm() == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                err_ratio = err_ratio.max(ratio);
            }
            if !y_new.iter().all(|c| c.re.is_finite() && c.im.is_finite()) || err_ratio.is_nan() {
                return Err(Error::StepFailure {
                    x,
                    reason: "non-finite amplitudes".into(),
                });
            }

            let factor = if err_ratio == 0.0 {
                5.0
            } else {
                (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err_ratio <= 1.0 {
                x = if clipped { target } else { x + step };
                y = y_new;
                k1 = k7;
                stats.accepted += 1;
                // a step shortened to land on a sample does not shrink h
                h = if clipped { h.max(step * factor) } else { step * factor };
            } else {
                stats.rejected += 1;
                h = step * factor.min(1.0);
                if h < h_min {
                    return Err(Error::StepFailure {
                        x,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

/// Classical fourth-order Runge–Kutta with `steps` equal steps.
pub fn rk4<const N: usize, F>(f: F, x0: f64, y0: State<N>, x_end: f64, steps: usize) -> State<N>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let h = (x_end - x0) / steps as f64;
    let mut y = y0;
    for n in 0..steps {
        let x = x0 + h * n as f64;
        let k1 = f(x, &y);
        let k2 = f(x + 0.5 * h, &combine(&y, h, &[(0.5, &k1)]));
        let k3 = f(x + 0.5 * h, &combine(&y, h, &[(0.5, &k2)]));
        let k4 = f(x + h, &combine(&y, h, &[(1.0, &k3)]));
        y = combine(&y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
    }
    y
}
