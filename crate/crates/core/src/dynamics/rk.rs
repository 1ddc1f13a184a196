//! Explicit Runge–Kutta steppers: Dormand–Prince 5(4) with adaptive step
//! control and classical fixed-step RK4.
//!
//! Both integrate across a sorted list of output times and land on each of
//! them exactly; no dense output interpolation is involved.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::tensor::{CMatrix, C64};

/// Vector-space operations the steppers need.
pub trait OdeState: Clone {
    /// `self += a·x`.
    fn axpy(&mut self, a: f64, x: &Self);

    fn zeros_like(&self) -> Self;

    /// RMS of `err_i / (atol + rtol·max(|y0_i|, |y1_i|))`.
    fn scaled_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl OdeState for CMatrix {
    fn axpy(&mut self, a: f64, x: &Self) {
        let a = C64::new(a, 0.0);
        self.zip_apply(x, |s, v| *s += a * v);
    }

    fn zeros_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }

    fn scaled_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        rms(err.iter().zip(y0.iter().zip(y1.iter())).map(|(e, (a, b))| {
            e.norm() / (atol + rtol * a.norm().max(b.norm()))
        }), err.len())
    }
}

impl OdeState for DVector<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.axpy(a, x, 1.0);
    }

    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }

    fn scaled_error(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        rms(err.iter().zip(y0.iter().zip(y1.iter())).map(|(e, (a, b))| {
            e.abs() / (atol + rtol * a.abs().max(b.abs()))
        }), err.len())
    }
}

fn rms(terms: impl Iterator<Item = f64>, n: usize) -> f64 {
    (terms.map(|x| x * x).sum::<f64>() / n.max(1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

/// Counters reported by the steppers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
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
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<S: OdeState>(y: &S, h: f64, terms: &[(f64, &S)]) -> S {
    let mut out = y.clone();
    for &(c, k) in terms {
        if c != 0.0 {
            out.axpy(h * c, k);
        }
    }
    out
}

/// Integrates `dy/dt = f(t, y)` from `(t0, y0)` and returns `y` at every
/// entry of `outputs` (sorted, all `≥ t0`).
pub fn dopri5<S, F>(
    mut f: F,
    t0: f64,
    y0: &S,
    outputs: &[f64],
    opts: &AdaptiveOptions,
) -> Result<(Vec<S>, StepStats)>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let mut stats = StepStats::default();
    let mut results = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = f(t, &y);
    stats.evaluations += 1;

    let span = outputs.last().map_or(0.0, |&end| end - t0);
    let mut h = initial_step(&y, &k1, opts).min(opts.max_step).min(span.max(f64::MIN_POSITIVE));

    for &target in outputs {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }

            let k2 = f(t + C2 * step, &combo(&y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &combo(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * step, &combo(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * step,
                &combo(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + step,
                &combo(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combo(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t_new = if last { target } else { t + step };
            let k7 = f(t_new, &y_new);
            stats.evaluations += 6;

            let err = combo(
                &y.zeros_like(),
                step,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let e = S::scaled_error(&err, &y, &y_new, opts.atol, opts.rtol);

            if e <= 1.0 {
                stats.accepted += 1;
                t = t_new;
                y = y_new;
                k1 = k7;
                let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                // A step shortened to hit an output time says nothing about h.
                if !last || step >= h {
                    h = (step * factor).min(opts.max_step);
                } else {
                    h = h.max(step * factor).min(opts.max_step);
                }
            } else {
                stats.rejected += 1;
                let factor = if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = step * factor;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
            }
        }
        results.push(y.clone());
    }
    Ok((results, stats))
}

fn initial_step<S: OdeState>(y: &S, dy: &S, opts: &AdaptiveOptions) -> f64 {
    let zero = y.zeros_like();
    let d0 = S::scaled_error(y, y, y, opts.atol, opts.rtol);
    let d1 = S::scaled_error(dy, y, &zero, opts.atol, opts.rtol);
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}

/// Classical RK4 with steps no longer than `max_step`, landing exactly on
/// every output time.
pub fn rk4<S, F>(mut f: F, t0: f64, y0: &S, outputs: &[f64], max_step: f64) -> (Vec<S>, StepStats)
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let mut stats = StepStats::default();
    let mut results = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0.clone();
    for &target in outputs {
        let span = target - t;
        if span > 0.0 {
            let n = (span / max_step).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for i in 0..n {
                let ti = t + i as f64 * h;
                let k1 = f(ti, &y);
                let k2 = f(ti + 0.5 * h, &combo(&y, h, &[(0.5, &k1)]));
                let k3 = f(ti + 0.5 * h, &combo(&y, h, &[(0.5, &k2)]));
                let k4 = f(ti + h, &combo(&y, h, &[(1.0, &k3)]));
                y = combo(&y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
                stats.evaluations += 4;
                stats.accepted += 1;
            }
            t = target;
        }
        results.push(y.clone());
    }
    (results, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(rtol: f64) -> AdaptiveOptions {
        AdaptiveOptions { rtol, atol: 1e-14, max_step: f64::INFINITY }
    }

    #[test]
    fn dopri5_exponential_decay() {
        let y0 = DVector::from_vec(vec![1.0]);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let (ys, stats) = dopri5(|_, y: &DVector<f64>| -y * 2.0, 0.0, &y0, &times, &opts(1e-10)).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - (-2.0 * t).exp()).abs() < 1e-10, "t={t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn dopri5_harmonic_oscillator() {
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let times = [0.0, 1.0, 3.0, 10.0];
        let (ys, _) = dopri5(
            |_, y: &DVector<f64>| DVector::from_vec(vec![y[1], -y[0]]),
            0.0,
            &y0,
            &times,
            &opts(1e-11),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let y0 = DVector::from_vec(vec![1.0]);
        let err = |h: f64| {
            let (ys, _) = rk4(|_, y: &DVector<f64>| -y.clone(), 0.0, &y0, &[1.0], h);
            (ys[0][0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.5, "{ratio}");
    }

    #[test]
    fn output_at_start_is_initial_state() {
        let y0 = DVector::from_vec(vec![3.0, -1.0]);
        let (ys, _) = dopri5(|_, y: &DVector<f64>| y * 5.0, 0.0, &y0, &[0.0], &opts(1e-9)).unwrap();
        assert_eq!(ys[0], y0);
    }

    #[test]
    fn max_step_is_respected() {
        let y0 = DVector::from_vec(vec![1.0]);
        let o = AdaptiveOptions { rtol: 1e-6, atol: 1e-9, max_step: 0.01 };
        let (_, stats) = dopri5(|_, y: &DVector<f64>| -y.clone(), 0.0, &y0, &[1.0], &o).unwrap();
        assert!(stats.accepted >= 100);
    }
}
