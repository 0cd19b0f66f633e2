//! Numerical stationary-phase check of the long-time asymptotics
//! `u = (2 pi i)^{-1} int exp(i(-tau sigma + sqrt(sigma - V0)) / x) a(sigma) dsigma`.

use std::f64::consts::PI;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalform::{cutoff, fit_slope};

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex<f64>>(f: &F, a: f64, b: f64) -> (Complex<f64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let fx = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        kronrod += fx * GK_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += fx * GAUSS_WEIGHTS[i / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

/// Adaptive Gauss–Kronrod over pre-split panels.
fn adaptive<F: Fn(f64) -> Complex<f64>>(f: &F, panels: &[(f64, f64)], abs_tol: f64) -> Result<(Complex<f64>, f64)> {
    let mut stack: Vec<(f64, f64, Complex<f64>, f64)> = panels
        .iter()
        .map(|&(a, b)| {
            let (v, e) = gk15(f, a, b);
            (a, b, v, e)
        })
        .collect();
    let mut total = Complex::new(0.0, 0.0);
    let mut err = 0.0;
    let per_panel = abs_tol / panels.len().max(1) as f64;
    let mut evals = 0usize;
    while let Some((a, b, v, e)) = stack.pop() {
        let width_share = per_panel.max(abs_tol * (b - a) / (panels.last().unwrap().1 - panels[0].0));
        if e <= width_share || b - a < 1e-12 {
            total += v;
            err += e;
            continue;
        }
        evals += 1;
        if evals > 2_000_000 {
            return Err(Error::NonConvergence("quadrature subdivision limit reached".into()));
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        stack.push((a, m, v1, e1));
        stack.push((m, b, v2, e2));
    }
    Ok((total, err))
}

/// `int_lo^hi f(s) exp(i phi(s) / x) ds` with panels sized to the local
/// oscillation `|phi'| / x`.
pub fn oscillatory_quadrature<F, P, D>(f: F, phi: P, dphi: D, lo: f64, hi: f64, x: f64, tol: f64) -> Result<(Complex<f64>, f64)>
where
    F: Fn(f64) -> f64 + Sync,
    P: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    if !(x > 0.0 && hi > lo) {
        return Err(Error::InvalidInput("need x > 0 and a nonempty interval".into()));
    }
    let mut panels = Vec::new();
    let mut s = lo;
    while s < hi {
        // about a quarter wavelength per panel, bounded below and above
        let w = (0.5 * PI * x / dphi(s).abs().max(1e-12)).clamp(1e-9, (hi - lo) / 16.0);
        let e = (s + w).min(hi);
        panels.push((s, e));
        s = e;
    }
    let scale = {
        let n = 2000;
        let h = (hi - lo) / n as f64;
        (0..n).map(|i| f(lo + (i as f64 + 0.5) * h).abs()).sum::<f64>() * h
    };
    let g = |t: f64| Complex::from_polar(f(t), phi(t) / x);
    adaptive(&g, &panels, tol * scale.max(1e-300))
}

/// Gaussian bump times a smooth cutoff equal to one on `[lo + ramp, hi - ramp]`
/// and vanishing outside `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub center: f64,
    pub width: f64,
    pub lo: f64,
    pub hi: f64,
    pub ramp: f64,
}

impl Amplitude {
    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.lo || s >= self.hi {
            return 0.0;
        }
        // cutoff(u) = 1 on u <= 1 and 0 on u >= 2
        let left = cutoff(1.0 + (self.lo + self.ramp - s) / self.ramp);
        let right = cutoff(1.0 + (s - self.hi + self.ramp) / self.ramp);
        let z = (s - self.center) / self.width;
        (-0.5 * z * z).exp() * left * right
    }

    pub fn contains(&self, s: f64) -> bool {
        s > self.lo && s < self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StationaryPhaseCase {
    pub v0z: f64,
    pub tau: f64,
    pub amplitude: Amplitude,
    pub x_list: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl StationaryPhaseCase {
    /// `V0(z) = v0z`, Gaussian of width `0.3` centred at the critical energy.
    pub fn gaussian(v0z: f64, tau: f64, x_list: Vec<f64>) -> Self {
        let sc = critical_energy(v0z, tau);
        let amplitude = Amplitude { center: sc, width: 0.3, lo: v0z + 0.05 * (sc - v0z), hi: sc + 1.6, ramp: 0.4 };
        Self { v0z, tau, amplitude, x_list, tol: default_tol() }
    }

    /// `Phi(z, sigma) = sqrt(sigma - V0(z))`.
    pub fn phase_profile(&self, s: f64) -> f64 {
        (s - self.v0z).max(0.0).sqrt()
    }

    /// `-tau sigma + Phi(sigma)`.
    pub fn phase(&self, s: f64) -> f64 {
        -self.tau * s + self.phase_profile(s)
    }

    fn dphase(&self, s: f64) -> f64 {
        -self.tau + 0.5 / (s - self.v0z).max(1e-300).sqrt()
    }

    fn validate(&self) -> Result<()> {
        let a = &self.amplitude;
        if !(self.tau > 0.0 && a.width > 0.0 && a.ramp > 0.0 && a.hi - a.lo > 2.0 * a.ramp) {
            return Err(Error::InvalidInput("need tau > 0, positive width and a support wider than both ramps".into()));
        }
        if a.lo <= self.v0z {
            return Err(Error::InvalidInput("amplitude support must lie above V0(z)".into()));
        }
        if self.x_list.iter().any(|x| *x <= 0.0) {
            return Err(Error::InvalidInput("x values must be positive".into()));
        }
        Ok(())
    }

    /// `u(tau, x)` including the `(2 pi i)^{-1}` normalization.
    pub fn integral(&self, x: f64) -> Result<(Complex<f64>, f64)> {
        self.validate()?;
        let a = self.amplitude;
        let (v, e) = oscillatory_quadrature(
            |s| a.eval(s),
            |s| self.phase(s),
            |s| self.dphase(s),
            a.lo,
            a.hi,
            x,
            self.tol,
        )?;
        let norm = Complex::new(0.0, -1.0 / (2.0 * PI));
        Ok((v * norm, e / (2.0 * PI)))
    }
}

/// `sigma_c = V0(z) + 1 / (4 tau^2)`.
pub fn critical_energy(v0z: f64, tau: f64) -> f64 {
    v0z + 0.25 / (tau * tau)
}

/// `Psi(tau) = -tau sigma_c + sqrt(sigma_c - V0(z))`.
pub fn psi(v0z: f64, tau: f64) -> f64 {
    let sc = critical_energy(v0z, tau);
    -tau * sc + (sc - v0z).sqrt()
}

/// `e^{-3 i pi / 4} / (2 sqrt(pi))`.
pub fn expected_prefactor() -> Complex<f64> {
    Complex::from_polar(0.5 / PI.sqrt(), -0.75 * PI)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpSample {
    pub x: f64,
    pub integral: Complex<f64>,
    pub error_estimate: f64,
    pub prefactor: Complex<f64>,
    pub prefactor_mod: f64,
    pub prefactor_phase: f64,
    /// `|prefactor - c|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpResult {
    pub sigma_c: f64,
    pub psi: f64,
    /// Numerical stationary point of the phase.
    pub peak_sigma: f64,
    /// Second difference of the phase divided by `x`, times `x` (x-free).
    pub hessian_numeric: f64,
    /// `-2 tau^3`.
    pub hessian_expected: f64,
    /// Finite-difference `d Psi / d tau`, expected `-sigma_c`.
    pub envelope_derivative: f64,
    pub expected: Complex<f64>,
    pub samples: Vec<SpSample>,
    /// Slope of `log deviation` against `log x`.
    pub fitted_order: Option<f64>,
}

/// Stationary point of `phi` in `(lo, hi)` from sign changes of a central
/// difference, refined by bisection.
pub fn locate_stationary_point<P: Fn(f64) -> f64>(phi: P, lo: f64, hi: f64) -> Option<f64> {
    let h = 1e-6;
    let d = |s: f64| (phi(s + h) - phi(s - h)) / (2.0 * h);
    let n = 1000;
    let step = (hi - lo) / n as f64;
    for i in 0..n {
        let (mut a, mut b) = (lo + i as f64 * step, lo + (i + 1) as f64 * step);
        let (da, db) = (d(a), d(b));
        if da == 0.0 {
            return Some(a);
        }
        if da.signum() != db.signum() {
            let mut fa = da;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = d(m);
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            return Some(0.5 * (a + b));
        }
    }
    None
}

pub fn stationary_phase_check(case: &StationaryPhaseCase) -> Result<SpResult> {
    case.validate()?;
    let sigma_c = critical_energy(case.v0z, case.tau);
    if !case.amplitude.contains(sigma_c) || case.amplitude.eval(sigma_c) <= 0.0 {
        return Err(Error::NoStationaryPoint { sigma: sigma_c });
    }
    let a = case.amplitude;
    let peak_sigma = locate_stationary_point(|s| case.phase(s), a.lo, a.hi)
        .ok_or(Error::NoStationaryPoint { sigma: sigma_c })?;
    let h = 1e-4;
    let hessian_numeric =
        (case.phase(peak_sigma + h) - 2.0 * case.phase(peak_sigma) + case.phase(peak_sigma - h)) / (h * h);
    let hessian_expected = -2.0 * case.tau.powi(3);
    let dt = 1e-5;
    let envelope_derivative = (psi(case.v0z, case.tau + dt) - psi(case.v0z, case.tau - dt)) / (2.0 * dt);
    let psi_c = psi(case.v0z, case.tau);
    let amp_c = a.eval(sigma_c);
    let expected = expected_prefactor();

    let samples: Vec<SpSample> = case
        .x_list
        .par_iter()
        .map(|&x| -> Result<SpSample> {
            let (integral, error_estimate) = case.integral(x)?;
            let base = Complex::from_polar(x.sqrt() * case.tau.powf(-1.5) * amp_c, psi_c / x);
            let prefactor = integral / base;
            Ok(SpSample {
                x,
                integral,
                error_estimate,
                prefactor,
                prefactor_mod: prefactor.norm(),
                prefactor_phase: prefactor.arg(),
                deviation: (prefactor - expected).norm(),
            })
        })
        .collect::<Result<_>>()?;
    let (lx, ld): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|s| s.deviation > 0.0).map(|s| (s.x.ln(), s.deviation.ln())).unzip();
    let fitted_order = if lx.len() >= 2 { fit_slope(&lx, &ld) } else { None };
    Ok(SpResult {
        sigma_c,
        psi: psi_c,
        peak_sigma,
        hessian_numeric,
        hessian_expected,
        envelope_derivative,
        expected,
        samples,
        fitted_order,
    })
}

/// Phase difference wrapped into `(-pi, pi]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        2.0 * PI - d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Rational, Scalar};

    #[test]
    fn zero_phase_is_plain_integral() {
        let (v, _) = oscillatory_quadrature(|s| s * s, |_| 0.0, |_| 0.0, 0.0, 1.0, 1.0, 1e-12).unwrap();
        assert!((v.re - 1.0 / 3.0).abs() < 1e-13 && v.im.abs() < 1e-15);
    }

    #[test]
    fn gaussian_fourier_transform() {
        // int exp(-s^2/2) exp(i w s) ds = sqrt(2 pi) exp(-w^2/2), w = 1/x
        let x = 0.5;
        let (v, _) = oscillatory_quadrature(|s| (-0.5 * s * s).exp(), |s| s, |_| 1.0, -12.0, 12.0, x, 1e-13).unwrap();
        let exact = (2.0 * PI).sqrt() * (-0.5 / (x * x)).exp();
        assert!((v.re - exact).abs() < 1e-8 && v.im.abs() < 1e-8);
    }

    #[test]
    fn hessian_identity_exact() {
        for (p, q) in [(1, 2), (3, 7), (5, 3)] {
            let tau = Rational::new(p.into(), q.into());
            let w = Rational::new(1.into(), 4.into()) / (tau.clone() * tau.clone());
            let root = w.try_sqrt().unwrap();
            let lhs = Rational::new(1.into(), 4.into()) / (w * root);
            assert_eq!(lhs, Rational::from_integer(2.into()) * tau.clone() * tau.clone() * tau);
        }
    }

    #[test]
    fn energy_equation_and_envelope() {
        for tau in [0.4, 0.5, 0.7, 1.0, 1.3] {
            let case = StationaryPhaseCase::gaussian(0.2, tau, vec![1e-2]);
            let r = stationary_phase_check(&case).unwrap();
            assert!((r.peak_sigma - r.sigma_c).abs() < 1e-6);
            assert!((r.hessian_numeric / r.hessian_expected - 1.0).abs() < 1e-6);
            assert!((r.envelope_derivative + r.sigma_c).abs() < 1e-8);
        }
    }

    #[test]
    fn prefactor_converges_to_constant() {
        let case = StationaryPhaseCase::gaussian(0.0, 0.5, vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4]);
        let r = stationary_phase_check(&case).unwrap();
        assert!((r.sigma_c - 1.0).abs() < 1e-15);
        let at = r.samples.iter().find(|s| s.x == 1e-3).unwrap();
        assert!((at.prefactor_mod / 0.28209479177387814 - 1.0).abs() < 0.05, "{}", at.prefactor_mod);
        assert!(phase_distance(at.prefactor_phase, -0.75 * PI) < 0.05, "{}", at.prefactor_phase);
        let m = r.fitted_order.unwrap();
        assert!((0.8..=1.2).contains(&m), "order {m}");
    }

    #[test]
    fn no_critical_point_in_support() {
        let mut case = StationaryPhaseCase::gaussian(0.0, 0.5, vec![1e-2]);
        case.tau = 0.2; // sigma_c = 6.25
        assert!(matches!(stationary_phase_check(&case), Err(Error::NoStationaryPoint { .. })));
        let small: Vec<f64> = [2e-2, 1e-2, 5e-3].iter().map(|&x| case.integral(x).unwrap().0.norm()).collect();
        // faster than x^3 over a factor four in x
        assert!(small[2] < small[0] * 0.25f64.powi(3), "{small:?}");
    }
}
