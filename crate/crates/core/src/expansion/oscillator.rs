use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadratic `Q = p D^2 + 2 q sym(Y D) + c Y^2` on one `y'''` coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub p: f64,
    pub q: f64,
    pub c: f64,
}

impl OscillatorSpec {
    pub fn new(p: f64, q: f64, c: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && c.is_finite()) || p * c - q * q <= 0.0 {
            return Err(Error::InvalidInput(format!("oscillator ({p}, {q}, {c}) is not elliptic")));
        }
        Ok(Self { p, q, c })
    }

    /// `q - 1/4`.
    pub fn q_tilde(&self) -> f64 {
        self.q - 0.25
    }

    /// `pc - q~^2`.
    pub fn discriminant(&self) -> f64 {
        self.p * self.c - self.q_tilde().powi(2)
    }
}

/// `kappa_k = (2k + 1) sqrt(pc - q~^2)` for `k = 0..=k_max`.
pub fn oscillator_spectrum(spec: &OscillatorSpec, k_max: usize) -> Result<Vec<f64>> {
    let disc = spec.discriminant();
    if disc <= 0.0 {
        return Err(Error::DegenerateOscillator(disc));
    }
    let root = disc.sqrt();
    Ok((0..=k_max).map(|k| (2 * k + 1) as f64 * root).collect())
}

/// Lowest `count` eigenvalues of the centred-difference discretization of
/// `p D^2 + q~ (Y D + D Y) + c Y^2` (`D = -i d/dY`) on `[-half_width, half_width]`
/// with `n` interior points and Dirichlet ends.
pub fn finite_difference_spectrum(spec: &OscillatorSpec, half_width: f64, n: usize, count: usize) -> Vec<f64> {
    let h = 2.0 * half_width / (n + 1) as f64;
    let y = |i: usize| -half_width + (i + 1) as f64 * h;
    let qt = spec.q_tilde();
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * spec.p / (h * h) + spec.c * y(i) * y(i)).collect();
    // |H_{i,i+1}| after a diagonal unitary gauge
    let off: Vec<f64> = (0..n - 1)
        .map(|i| Complex::new(-spec.p / (h * h), -qt * (y(i) + y(i + 1)) / (2.0 * h)).norm())
        .collect();
    let count_below = |x: f64| {
        let mut neg = 0;
        let mut d = diag[0] - x;
        if d < 0.0 {
            neg += 1;
        }
        for i in 1..n {
            let dd = if d == 0.0 { f64::EPSILON } else { d };
            d = diag[i] - x - off[i - 1] * off[i - 1] / dd;
            if d < 0.0 {
                neg += 1;
            }
        }
        neg
    };
    let lo0 = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * off.iter().cloned().fold(0.0, f64::max);
    (0..count)
        .map(|k| {
            let (mut lo, mut hi) = (lo0, lo0.abs() + 1.0);
            while count_below(hi) <= k {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Richardson-extrapolated finite-difference spectrum from grids `n`, `2n+1`, `4n+3`.
pub fn extrapolated_spectrum(spec: &OscillatorSpec, half_width: f64, n: usize, count: usize) -> Vec<f64> {
    let a = finite_difference_spectrum(spec, half_width, n, count);
    let b = finite_difference_spectrum(spec, half_width, 2 * n + 1, count);
    let c = finite_difference_spectrum(spec, half_width, 4 * n + 3, count);
    (0..count)
        .map(|k| {
            let ab = (4.0 * b[k] - a[k]) / 3.0;
            let bc = (4.0 * c[k] - b[k]) / 3.0;
            (16.0 * bc - ab) / 15.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_oscillator() {
        let s = OscillatorSpec::new(1.0, 0.0, 1.0).unwrap();
        let k = oscillator_spectrum(&s, 3).unwrap();
        let root = 15f64.sqrt() / 4.0;
        for (i, v) in k.iter().enumerate() {
            assert!((v - (2 * i + 1) as f64 * root).abs() < 1e-15);
        }
        let fd = extrapolated_spectrum(&s, 20.0, 2000, 4);
        for (a, b) in k.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn cross_term_cancels_shift() {
        let s = OscillatorSpec::new(2.0, 0.25, 0.5).unwrap();
        let k = oscillator_spectrum(&s, 2).unwrap();
        assert!((k[0] - 1.0).abs() < 1e-15);
        let fd = extrapolated_spectrum(&s, 20.0, 2000, 3);
        for (a, b) in k.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn degenerate_boundary() {
        let s = OscillatorSpec::new(1.0, 0.0, 1.0 / 16.0).unwrap();
        assert!(matches!(oscillator_spectrum(&s, 1), Err(Error::DegenerateOscillator(_))));
        assert!(OscillatorSpec::new(1.0, 1.0, 1.0).is_err());
    }
}
