use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{flow, OdeOptions};

/// Nonlinear part `X1` added to the linear field `X0 = A x`, cut off smoothly
/// outside `|x| <= 2 R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Perturbation {
    Zero,
    /// `c |x|^{k-1} x chi(|x| / R)`.
    Monomial { coeff: f64, power: u32 },
    /// `c exp(-1/|x|^2) x chi(|x| / R)`, flat at the origin.
    Flat { coeff: f64 },
}

fn psi(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff equal to one on `[0, 1]` and zero on `[2, inf)`.
pub fn cutoff(u: f64) -> f64 {
    let a = psi(2.0 - u);
    let b = psi(u - 1.0);
    a / (a + b)
}

impl Perturbation {
    fn scale(&self, norm: f64) -> f64 {
        match *self {
            Perturbation::Zero => 0.0,
            Perturbation::Monomial { coeff, power } => coeff * norm.powi(power as i32 - 1),
            Perturbation::Flat { coeff } => {
                if norm == 0.0 {
                    0.0
                } else {
                    coeff * (-1.0 / (norm * norm)).exp()
                }
            }
        }
    }
}

/// Linear field with a perturbation vanishing at the origin, an invariant
/// contracting subspace `E` and sample points in `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct NelsonCase {
    pub a: DMatrix<f64>,
    pub perturbation: Perturbation,
    pub cutoff_radius: f64,
    /// Columns span `E`.
    pub subspace: DMatrix<f64>,
    pub samples: Vec<DVector<f64>>,
    pub t_max: f64,
    pub dt: f64,
    pub rtol: f64,
}

impl NelsonCase {
    /// One-dimensional contracting case `X0 = -x d/dx`.
    pub fn one_dimensional(perturbation: Perturbation, samples: &[f64]) -> Self {
        Self {
            a: DMatrix::from_element(1, 1, -1.0),
            perturbation,
            cutoff_radius: 1.0,
            subspace: DMatrix::from_element(1, 1, 1.0),
            samples: samples.iter().map(|&x| DVector::from_element(1, x)).collect(),
            t_max: 12.0,
            dt: 0.25,
            rtol: 1e-12,
        }
    }

    pub fn field(&self, x: &[f64], out: &mut [f64]) {
        let v = DVector::from_column_slice(x);
        let lin = &self.a * &v;
        let norm = v.norm();
        let s = self.perturbation.scale(norm) * cutoff(norm / self.cutoff_radius);
        for i in 0..x.len() {
            out[i] = lin[i] + s * x[i];
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.a.nrows();
        if self.a.ncols() != d || self.subspace.nrows() != d || self.subspace.ncols() == 0 {
            return Err(Error::InvalidInput("matrix and subspace dimensions disagree".into()));
        }
        if self.a.complex_eigenvalues().iter().any(|z| z.re.abs() < 1e-12) {
            return Err(Error::InvalidInput("linear part has an eigenvalue on the imaginary axis".into()));
        }
        let basis = &self.subspace;
        let gram = basis.transpose() * basis;
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("subspace basis is degenerate".into()))?;
        let project = |w: &DMatrix<f64>| basis * (&gram_inv * (basis.transpose() * w));
        let image = &self.a * basis;
        if (&image - project(&image)).amax() > 1e-9 * (1.0 + image.amax()) {
            return Err(Error::InvalidInput("subspace is not invariant under the linear part".into()));
        }
        let restricted = &gram_inv * (basis.transpose() * image);
        if restricted.complex_eigenvalues().iter().any(|z| z.re >= 0.0) {
            return Err(Error::InvalidInput("linear part does not contract the subspace".into()));
        }
        for x in &self.samples {
            let xm = DMatrix::from_column_slice(d, 1, x.as_slice());
            if (&xm - project(&xm)).amax() > 1e-9 * (1.0 + x.amax()) {
                return Err(Error::InvalidInput("sample point outside the subspace".into()));
            }
        }
        if !(self.dt > 0.0 && self.t_max > self.dt) {
            return Err(Error::InvalidInput("need 0 < dt < t_max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NelsonSample {
    pub x: Vec<f64>,
    /// `U(-T) U0(T) x` at the final time.
    pub limit: Vec<f64>,
    /// `|limit - x|`.
    pub deviation: f64,
    /// `(t_k, |Z(t_{k+1}) x - Z(t_k) x|)`.
    pub cauchy: Vec<(f64, f64)>,
    /// Fitted exponential decay rate of the leading Cauchy differences above
    /// the integration floor; `None` when fewer than three qualify.
    pub rate: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NelsonResult {
    pub samples: Vec<NelsonSample>,
    /// Slope of `log |W(x) - x|` against `log |x|` over samples above the floor.
    pub fitted_power: Option<f64>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

const FLOOR: f64 = 1e-13;

/// Numerical limit of `U(-t) U0(t) x` as `t -> infinity` for every sample.
pub fn nelson_limit(case: &NelsonCase) -> Result<NelsonResult> {
    case.validate()?;
    let opts = OdeOptions { rtol: case.rtol, atol: case.rtol * 1e-3, h0: 1e-3, ..Default::default() };
    let steps = (case.t_max / case.dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * case.dt).collect();
    let samples: Vec<NelsonSample> = case
        .samples
        .par_iter()
        .map(|x| -> Result<NelsonSample> {
            let mut path = Vec::with_capacity(times.len());
            for &t in &times {
                let z0 = (&case.a * t).exp() * x;
                let z = flow(|y, d| case.field(y, d), z0.as_slice(), -t, &opts)?;
                path.push(DVector::from_vec(z));
            }
            let cauchy: Vec<(f64, f64)> = path
                .windows(2)
                .zip(&times)
                .map(|(w, &t)| (t, (&w[1] - &w[0]).norm()))
                .collect();
            let scale = x.norm().max(1.0);
            let floor = (1e3 * case.rtol).max(FLOOR) * scale;
            let (ts, ls): (Vec<f64>, Vec<f64>) = cauchy
                .iter()
                .take_while(|(_, d)| *d > floor)
                .map(|(t, d)| (*t, d.ln()))
                .unzip();
            let rate = if ts.len() >= 3 { fit_slope(&ts, &ls).map(|s| -s) } else { None };
            let limit = path.last().cloned().unwrap_or_else(|| x.clone());
            let tail = cauchy.last().map(|c| c.1).unwrap_or(0.0);
            Ok(NelsonSample {
                x: x.as_slice().to_vec(),
                limit: limit.as_slice().to_vec(),
                deviation: (&limit - x).norm(),
                cauchy,
                rate,
                converged: tail <= 1e-9 * scale,
            })
        })
        .collect::<Result<_>>()?;
    let (lx, ld): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.deviation > 1e3 * FLOOR)
        .map(|s| (DVector::from_column_slice(&s.x).norm().ln(), s.deviation.ln()))
        .unzip();
    let fitted_power = if lx.len() >= 2 { fit_slope(&lx, &ld) } else { None };
    Ok(NelsonResult { samples, fitted_power })
}

/// Decay rate of `|U0(t) x|` measured by integrating the linear field.
pub fn linear_decay_rate(a: &DMatrix<f64>, x: &DVector<f64>, t_max: f64, samples: usize) -> Result<f64> {
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-16, ..Default::default() };
    let mut ts = Vec::new();
    let mut ls = Vec::new();
    for k in 0..=samples {
        let t = t_max * k as f64 / samples as f64;
        let y = flow(
            |y, d| {
                let v = a * DVector::from_column_slice(y);
                d.copy_from_slice(v.as_slice());
            },
            x.as_slice(),
            t,
            &opts,
        )?;
        ts.push(t);
        ls.push(DVector::from_vec(y).norm().ln());
    }
    fit_slope(&ts, &ls).map(|s| -s).ok_or_else(|| Error::NonConvergence("rate fit needs two samples".into()))
}
