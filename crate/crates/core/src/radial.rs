//! Radial points over critical points of the potential and their linearization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{complex_to_f64, real, Scalar};
use crate::symalg::{Block, ModelQuadratic, VariableLayout};

/// Critical point of `V0` with its value and Hessian eigenvalues `2 a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPointSpec<T: Scalar> {
    pub label: String,
    pub value: T,
    pub hessian: Vec<T>,
}

impl<T: Scalar> CriticalPointSpec<T> {
    pub fn new(label: impl Into<String>, value: T, hessian: Vec<T>) -> Result<Self> {
        if hessian.is_empty() {
            return Err(Error::InvalidInput("a critical point needs at least one Hessian eigenvalue".into()));
        }
        if hessian.iter().any(|h| h.is_zero()) {
            return Err(Error::InvalidInput("Hessian eigenvalues must be nonzero (Morse)".into()));
        }
        Ok(Self { label: label.into(), value, hessian })
    }

    /// Number of negative Hessian eigenvalues.
    pub fn morse_index(&self) -> usize {
        self.hessian.iter().filter(|h| h.is_negative()).count()
    }

    pub fn n(&self) -> usize {
        self.hessian.len() + 1
    }

    pub fn to_f64(&self) -> CriticalPointSpec<f64> {
        CriticalPointSpec {
            label: self.label.clone(),
            value: self.value.as_f64(),
            hessian: self.hessian.iter().map(Scalar::as_f64).collect(),
        }
    }
}

/// Sign of `nu` at a radial point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RadialClass {
    SourceSink,
    Saddle,
}

/// Radial point over a critical point at a fixed energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPoint<T: Scalar> {
    pub cp: CriticalPointSpec<T>,
    pub sigma: T,
    pub sign: Sign,
    pub nu: T,
    pub lambda: T,
    /// `r_j` sorted by real part, then imaginary part.
    pub r: Vec<Complex<T>>,
    /// `order[j]` is the Hessian index of the `j`-th sorted coordinate.
    pub order: Vec<usize>,
    pub layout: VariableLayout,
    pub hessian_threshold: bool,
}

impl<T: Scalar> RadialPoint<T> {
    pub fn outgoing(&self) -> bool {
        self.lambda.is_negative()
    }

    /// Hessian eigenvalue `2 a_j` of the `j`-th sorted coordinate.
    pub fn hessian_sorted(&self, j: usize) -> &T {
        &self.cp.hessian[self.order[j]]
    }

    pub fn r_in(&self, block: Block) -> Vec<Complex<T>> {
        let range = match block {
            Block::Prime => self.layout.prime(),
            Block::DoublePrime => self.layout.double_prime(),
            Block::TriplePrime => self.layout.triple_prime(),
        };
        self.r[range].to_vec()
    }

    pub fn ensure_regular(&self) -> Result<()> {
        if self.hessian_threshold {
            Err(Error::HessianThreshold { sigma: self.sigma.as_f64() })
        } else {
            Ok(())
        }
    }

    /// The model quadratic `p0` (canonical blocks on `y'''`).
    pub fn model(&self) -> Result<ModelQuadratic<T>> {
        self.ensure_regular()?;
        ModelQuadratic::from_eigenvalues(self.layout, self.lambda.clone(), self.r.clone())
    }

    pub fn classify(&self) -> RadialClass {
        classify_radial(self)
    }

    pub fn to_f64(&self) -> RadialPoint<f64> {
        RadialPoint {
            cp: self.cp.to_f64(),
            sigma: self.sigma.as_f64(),
            sign: self.sign,
            nu: self.nu.as_f64(),
            lambda: self.lambda.as_f64(),
            r: self.r.iter().map(complex_to_f64).collect(),
            order: self.order.clone(),
            layout: self.layout,
            hessian_threshold: self.hessian_threshold,
        }
    }
}

/// Threshold tolerance on `|r - 1/2|` in floating mode.
pub const THRESHOLD_TOL: f64 = 1e-12;

/// `r = 1/2 - sqrt(1/4 - a/(sigma - V0))` per Hessian direction, with
/// `lambda = -2 nu` and `nu = sign sqrt(sigma - V0)`.
pub fn linearization_spectrum<T: Scalar>(cp: &CriticalPointSpec<T>, sigma: &T, sign: Sign) -> Result<RadialPoint<T>> {
    let w = sigma.clone() - cp.value.clone();
    if w <= T::zero() {
        return Err(Error::NoRealRadialPoint { sigma: sigma.as_f64(), value: cp.value.as_f64() });
    }
    let root = w.try_sqrt().ok_or_else(|| Error::InexactRoot(w.to_repr()))?;
    let nu = if sign == Sign::Plus { root } else { -root };
    let two = T::from_u8(2).unwrap();
    let lambda = -(two.clone() * nu.clone());
    let quarter = T::ratio(1, 4);

    let mut order: Vec<usize> = (0..cp.hessian.len()).collect();
    order.sort_by(|&i, &j| crate::scalar::cmp_scalar(&cp.hessian[i], &cp.hessian[j]));

    let mut r = Vec::with_capacity(order.len());
    let mut threshold = false;
    let (mut n_neg, mut n_real) = (0, 0);
    for &i in &order {
        let a = cp.hessian[i].clone() / two.clone();
        let disc = quarter.clone() - a.clone() / w.clone();
        let at_threshold = if T::EXACT { disc.is_zero() } else { disc.abs().as_f64().sqrt() < THRESHOLD_TOL };
        let rj = if at_threshold {
            threshold = true;
            real(T::half())
        } else if disc.is_positive() {
            let s = disc.try_sqrt().ok_or_else(|| Error::InexactRoot(disc.to_repr()))?;
            real(T::half() - s)
        } else {
            let d = -disc;
            let s = d.try_sqrt().ok_or_else(|| Error::InexactRoot(d.to_repr()))?;
            Complex::new(T::half(), s)
        };
        if a.is_negative() {
            n_neg += 1;
        }
        if rj.im.is_zero() {
            n_real += 1;
        }
        r.push(rj);
    }
    let n = cp.n();
    let layout = VariableLayout::new(n, n_neg + 1, n_real + 1)?;
    Ok(RadialPoint {
        cp: cp.clone(),
        sigma: sigma.clone(),
        sign,
        nu,
        lambda,
        r,
        order,
        layout,
        hessian_threshold: threshold,
    })
}

/// Both radial points over `cp` at energy `sigma`.
pub fn radial_pair<T: Scalar>(cp: &CriticalPointSpec<T>, sigma: &T) -> Result<[RadialPoint<T>; 2]> {
    Ok([linearization_spectrum(cp, sigma, Sign::Plus)?, linearization_spectrum(cp, sigma, Sign::Minus)?])
}

pub fn classify_radial<T: Scalar>(rp: &RadialPoint<T>) -> RadialClass {
    if rp.layout.prime().is_empty() {
        RadialClass::SourceSink
    } else {
        RadialClass::Saddle
    }
}

/// Energies `V0 + 4 a_j` for `a_j > 0`, ascending.
pub fn hessian_thresholds<T: Scalar>(cp: &CriticalPointSpec<T>) -> Vec<T> {
    let two = T::from_u8(2).unwrap();
    let mut out: Vec<T> = cp
        .hessian
        .iter()
        .filter(|h| h.is_positive())
        .map(|h| cp.value.clone() + two.clone() * h.clone())
        .collect();
    out.sort_by(crate::scalar::cmp_scalar);
    out.dedup();
    out
}

/// A linear form `c_y dy_j + c_mu dmu_j` with its eigenvalue under the linearization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenForm {
    pub index: usize,
    pub dy: Complex<f64>,
    pub dmu: Complex<f64>,
    pub eigenvalue: Complex<f64>,
}

/// Linearization of the boundary flow on `T_q Sigma` in coordinates
/// `(y_1.., mu_1..)` ordered as the sorted eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationData {
    pub lambda: f64,
    pub matrix_a: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    /// `e~_j` (eigenvalue `lambda r_j`).
    pub e_forms: Vec<EigenForm>,
    /// `f~_j` (eigenvalue `lambda (1 - r_j)`).
    pub f_forms: Vec<EigenForm>,
}

impl LinearizationData {
    pub fn dim(&self) -> usize {
        self.matrix_a.nrows() / 2
    }

    /// `omega(v, w) = sum_j (v_mu_j w_y_j - v_y_j w_mu_j)`.
    pub fn omega_form(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * &self.omega * w)[(0, 0)]
    }

    /// `S = A - (lambda/2) Id`.
    pub fn s_matrix(&self) -> DMatrix<f64> {
        let n = self.matrix_a.nrows();
        &self.matrix_a - DMatrix::identity(n, n) * (self.lambda / 2.0)
    }

    /// `max |omega(Sv, w) + omega(v, Sw)|` over basis pairs.
    pub fn symplectic_defect(&self) -> f64 {
        let s = self.s_matrix();
        let m = s.transpose() * &self.omega + &self.omega * &s;
        m.amax()
    }

    /// `max |A^T l - t l|` over all returned forms.
    pub fn eigen_residual(&self) -> f64 {
        let d = self.dim();
        let at = self.matrix_a.transpose().map(|x| Complex::new(x, 0.0));
        let mut worst: f64 = 0.0;
        for f in self.e_forms.iter().chain(&self.f_forms) {
            let mut l = DVector::from_element(2 * d, Complex::new(0.0, 0.0));
            l[f.index] = f.dy;
            l[d + f.index] = f.dmu;
            let res = &at * &l - &l * f.eigenvalue;
            worst = worst.max(res.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        worst
    }

    /// Eigenvalues of `A`, sorted by real then imaginary part.
    pub fn spectrum(&self) -> Vec<Complex<f64>> {
        let mut ev: Vec<Complex<f64>> = self.matrix_a.complex_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    }
}

/// Jacobian of the flow `y' = 2 mu`, `mu' = lambda mu - 2 a y` and its eigen-forms.
///
/// The forms are `e~ = -(lambda/2)(1 - r) dy + dmu` and
/// `f~ = -(lambda/2) r dy + dmu`, left eigenvectors of the Jacobian.
pub fn linearization_eigenvectors<T: Scalar>(rp: &RadialPoint<T>) -> Result<LinearizationData> {
    if rp.hessian_threshold {
        return Err(Error::Degenerate(format!("Hessian threshold at energy {}", rp.sigma.as_f64())));
    }
    let rp = rp.to_f64();
    let d = rp.r.len();
    let lambda = rp.lambda;
    let mut a = DMatrix::zeros(2 * d, 2 * d);
    let mut omega = DMatrix::zeros(2 * d, 2 * d);
    let mut e_forms = Vec::with_capacity(d);
    let mut f_forms = Vec::with_capacity(d);
    for j in 0..d {
        let aj = rp.hessian_sorted(j) / 2.0;
        a[(j, d + j)] = 2.0;
        a[(d + j, j)] = -2.0 * aj;
        a[(d + j, d + j)] = lambda;
        omega[(d + j, j)] = 1.0;
        omega[(j, d + j)] = -1.0;
        let r = rp.r[j];
        let one = Complex::new(1.0, 0.0);
        e_forms.push(EigenForm {
            index: j,
            dy: -(one - r) * (lambda / 2.0),
            dmu: one,
            eigenvalue: r * lambda,
        });
        f_forms.push(EigenForm { index: j, dy: -r * (lambda / 2.0), dmu: one, eigenvalue: (one - r) * lambda });
    }
    Ok(LinearizationData { lambda, matrix_a: a, omega, e_forms, f_forms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(p: i64, r: i64) -> Rational {
        Rational::ratio(p, r)
    }

    #[test]
    fn quarter_eigenvalue_exact() {
        let cp = CriticalPointSpec::new("min", q(0, 1), vec![q(3, 8)]).unwrap();
        let rp = linearization_spectrum(&cp, &q(1, 1), Sign::Plus).unwrap();
        assert_eq!(rp.r, vec![real(q(1, 4))]);
        assert_eq!(rp.lambda, q(-2, 1));
        assert!(rp.outgoing());
        assert_eq!(rp.layout, VariableLayout::new(2, 1, 2).unwrap());
    }

    #[test]
    fn maximum_gives_minus_one() {
        let cp = CriticalPointSpec::new("max", q(0, 1), vec![q(-4, 1)]).unwrap();
        let rp = linearization_spectrum(&cp, &q(1, 1), Sign::Minus).unwrap();
        assert_eq!(rp.r, vec![real(q(-1, 1))]);
        assert_eq!(classify_radial(&rp), RadialClass::Saddle);
        assert!(!rp.outgoing());
    }

    #[test]
    fn threshold_is_flagged() {
        let cp = CriticalPointSpec::new("min", q(0, 1), vec![q(1, 2)]).unwrap();
        let rp = linearization_spectrum(&cp, &q(1, 1), Sign::Plus).unwrap();
        assert!(rp.hessian_threshold);
        assert!(rp.model().is_err());
        assert!(linearization_eigenvectors(&rp).is_err());
        let below = linearization_spectrum(&cp, &q(0, 1), Sign::Plus);
        assert!(matches!(below, Err(Error::NoRealRadialPoint { .. })));
    }

    #[test]
    fn thresholds_list() {
        let cp = CriticalPointSpec::new("min", q(0, 1), vec![q(2, 1), q(1, 2)]).unwrap();
        assert_eq!(hessian_thresholds(&cp), vec![q(1, 1), q(4, 1)]);
        let cp = CriticalPointSpec::new("max", q(0, 1), vec![q(-2, 1)]).unwrap();
        assert!(hessian_thresholds(&cp).is_empty());
        let cp = CriticalPointSpec::new("min", q(3, 1), vec![q(1, 1)]).unwrap();
        assert_eq!(hessian_thresholds(&cp), vec![q(5, 1)]);
    }

    #[test]
    fn eigenforms_match_jacobian() {
        let cp = CriticalPointSpec::new("max", 0.0, vec![-4.0]).unwrap();
        let rp = linearization_spectrum(&cp, &1.0, Sign::Plus).unwrap();
        let lin = linearization_eigenvectors(&rp).unwrap();
        assert!(lin.eigen_residual() < 1e-12);
        let f = &lin.f_forms[0];
        assert!((f.eigenvalue - Complex::new(-4.0, 0.0)).norm() < 1e-12);
        assert!((f.dy - Complex::new(-1.0, 0.0)).norm() < 1e-12);
        let e = &lin.e_forms[0];
        assert!((e.eigenvalue - Complex::new(2.0, 0.0)).norm() < 1e-12);
        assert!((e.dy - Complex::new(2.0, 0.0)).norm() < 1e-12);
        assert!(lin.symplectic_defect() < 1e-12);
    }

    #[test]
    fn complex_pair() {
        // r = 1/2 + i/2 at lambda = -2 needs a/(sigma - V0) = 1/2
        let cp = CriticalPointSpec::new("min", 0.0, vec![1.0]).unwrap();
        let rp = linearization_spectrum(&cp, &1.0, Sign::Plus).unwrap();
        assert!((rp.r[0] - Complex::new(0.5, 0.5)).norm() < 1e-14);
        let lin = linearization_eigenvectors(&rp).unwrap();
        let spec = lin.spectrum();
        assert!((spec[0] - Complex::new(-1.0, -1.0)).norm() < 1e-12);
        assert!((spec[1] - Complex::new(-1.0, 1.0)).norm() < 1e-12);
        assert!(lin.eigen_residual() < 1e-12);
    }
}
