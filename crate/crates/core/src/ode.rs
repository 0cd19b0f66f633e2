//! Adaptive Dormand–Prince 5(4) integration for autonomous systems.

use crate::error::{Error, Result};

/// Tolerances and step limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h0: 1e-3, h_min: 1e-14, h_max: 0.5, max_steps: 2_000_000 }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(y)` from `t0` to `t1` (either direction), calling
/// `observe(t, y)` after every accepted step; returning `false` stops early.
///
/// Returns the final time and state.
pub fn integrate<F, O>(f: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions, mut observe: O) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64], &mut [f64]),
    O: FnMut(f64, &[f64]) -> bool,
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.h0.min((t1 - t0).abs()).max(opts.h_min);
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    f(&y, &mut k[0]);
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::Integration(format!("step limit reached at t = {t}")));
        }
        steps += 1;
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += hs * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            let (_, rest) = k.split_at_mut(s);
            f(&tmp, &mut rest[0]);
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut acc = y[i];
            let mut e = 0.0;
            for s in 0..7 {
                acc += hs * B[s] * k[s][i];
                e += hs * E[s] * k[s][i];
            }
            y_new[i] = acc;
            let sc = opts.atol + opts.rtol * y[i].abs().max(acc.abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite state near t = {t}")));
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            std::mem::swap(&mut y, &mut y_new);
            // first-same-as-last: stage 7 is the derivative at the new point
            k.swap(0, 6);
            if !observe(t, &y) {
                return Ok((t, y));
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < opts.h_min {
                return Err(Error::Integration(format!("step size underflow at t = {t}")));
            }
        }
    }
    Ok((t, y))
}

/// Integrates without observation.
pub fn flow<F>(f: F, y0: &[f64], t: f64, opts: &OdeOptions) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    integrate(f, 0.0, y0, t, opts, |_, _| true).map(|(_, y)| y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
        let y = flow(|y, d| d[0] = -y[0], &[1.0], 3.0, &opts).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-12);
        let back = flow(|y, d| d[0] = -y[0], &y, -3.0, &opts).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
        let tau = 2.0 * std::f64::consts::PI;
        let y = flow(
            |y, d| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            &[1.0, 0.0],
            tau,
            &opts,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn early_stop() {
        let opts = OdeOptions::default();
        let (t, _) = integrate(|_, d| d[0] = 1.0, 0.0, &[0.0], 10.0, &opts, |t, _| t < 1.0).unwrap();
        assert!(t >= 1.0 && t < 10.0);
    }
}
