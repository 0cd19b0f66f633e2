use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::One;

use super::layout::{Block, Exponents, VariableLayout};
use super::polynomial::WeightedPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{from_u32, real, Scalar};

/// Elliptic quadratic `Q(y, mu) = p mu^2 + 2 q y mu + c y^2` attached to a
/// `y'''` index.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadBlock<T: Scalar> {
    pub p: T,
    pub q: T,
    pub c: T,
}

impl<T: Scalar> QuadBlock<T> {
    pub fn new(p: T, q: T, c: T) -> Self {
        Self { p, q, c }
    }

    /// The block with `p = 1`, `q = 0` whose linearization has eigenvalue `r`.
    pub fn canonical(r: &Complex<T>) -> Self {
        let d = r.clone() * (Complex::<T>::one() - r.clone());
        let four = T::from_u8(4).unwrap();
        Self { p: T::one(), q: T::zero(), c: d.re / four }
    }

    /// `4pc - 4q^2 + 2q`, which equals `r(1 - r)`.
    pub fn discriminant(&self) -> T {
        let four = T::from_u8(4).unwrap();
        let two = T::from_u8(2).unwrap();
        four.clone() * self.p.clone() * self.c.clone() - four * self.q.clone() * self.q.clone() + two * self.q.clone()
    }

    pub fn is_elliptic(&self) -> bool {
        self.p.clone() * self.c.clone() - self.q.clone() * self.q.clone() > T::zero()
    }

    /// The eigenvalue `1/2 + i sqrt(D - 1/4)`.
    pub fn eigenvalue(&self) -> Result<Complex<T>> {
        let quarter = T::ratio(1, 4);
        let d = self.discriminant() - quarter;
        if d <= T::zero() {
            return Err(Error::InvalidInput(format!(
                "quadratic block with 4pc - 4q^2 + 2q = {} has real linearization eigenvalues",
                (d + T::ratio(1, 4)).to_repr()
            )));
        }
        let im = d.try_sqrt().ok_or_else(|| Error::InexactRoot(d.to_repr()))?;
        Ok(Complex::new(T::half(), im))
    }

    fn poly(&self, layout: VariableLayout, j: usize) -> WeightedPolynomial<T> {
        let y = WeightedPolynomial::y(layout, j);
        let mu = WeightedPolynomial::mu(layout, j);
        let two = T::from_u8(2).unwrap();
        &(&(&mu * &mu).scale_real(&self.p) + &(&y * &mu).scale_real(&(two * self.q.clone())))
            + &(&y * &y).scale_real(&self.c)
    }
}

/// Model quadratic `p0 = lambda (-nu + sum_real r_j y_j mu_j + sum Q_j(y_j, mu_j))`
/// together with the linear change to eigen-coordinates.
///
/// In eigen-coordinates the monomial `P^a E^alpha F^beta` (with `P = p0`
/// when quadratic blocks are present and `P = nu` otherwise) is an exact
/// eigenvector of `{{p0, .}}` with eigenvalue `R_{a, alpha, beta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelQuadratic<T: Scalar> {
    layout: VariableLayout,
    lambda: T,
    r: Vec<Complex<T>>,
    quad: BTreeMap<usize, QuadBlock<T>>,
}

impl<T: Scalar> ModelQuadratic<T> {
    /// Builds a model from real eigenvalues on the `y'`, `y''` indices and
    /// quadratic blocks on the `y'''` indices (in index order).
    pub fn new(layout: VariableLayout, lambda: T, real_r: Vec<T>, quad: Vec<QuadBlock<T>>) -> Result<Self> {
        let n_real = layout.m() - 1;
        if real_r.len() != n_real || quad.len() != layout.triple_prime().len() {
            return Err(Error::InvalidInput(format!(
                "expected {} real eigenvalues and {} quadratic blocks, got {} and {}",
                n_real,
                layout.triple_prime().len(),
                real_r.len(),
                quad.len()
            )));
        }
        let mut r: Vec<Complex<T>> = real_r.into_iter().map(real).collect();
        let mut blocks = BTreeMap::new();
        for (j, qb) in layout.triple_prime().zip(quad) {
            if !qb.is_elliptic() {
                return Err(Error::InvalidInput(format!("quadratic block at index {} is not elliptic", j + 1)));
            }
            r.push(qb.eigenvalue()?);
            blocks.insert(j, qb);
        }
        Self::validated(layout, lambda, r, blocks)
    }

    /// Builds a model from the full eigenvalue list; complex entries get
    /// the canonical quadratic block.
    pub fn from_eigenvalues(layout: VariableLayout, lambda: T, r: Vec<Complex<T>>) -> Result<Self> {
        if r.len() != layout.dim() {
            return Err(Error::InvalidInput(format!("expected {} eigenvalues, got {}", layout.dim(), r.len())));
        }
        let blocks = layout.triple_prime().map(|j| (j, QuadBlock::canonical(&r[j]))).collect();
        Self::validated(layout, lambda, r, blocks)
    }

    /// Real-block model with the given real `r_j` on the layout.
    pub fn real(layout: VariableLayout, lambda: T, r: Vec<T>) -> Result<Self> {
        Self::new(layout, lambda, r, Vec::new())
    }

    fn validated(layout: VariableLayout, lambda: T, r: Vec<Complex<T>>, quad: BTreeMap<usize, QuadBlock<T>>) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::InvalidInput("lambda must be nonzero".into()));
        }
        let half = T::half();
        for (j, rj) in r.iter().enumerate() {
            let ok = match layout.block_of(j) {
                Block::Prime => rj.im.is_zero() && rj.re < T::zero(),
                Block::DoublePrime => rj.im.is_zero() && rj.re > T::zero() && rj.re <= half,
                Block::TriplePrime => rj.im > T::zero() && rj.re == half,
            };
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "eigenvalue r_{} = {} + {}i does not fit the {:?} block",
                    j + 1,
                    rj.re.to_repr(),
                    rj.im.to_repr(),
                    layout.block_of(j)
                )));
            }
        }
        Ok(Self { layout, lambda, r, quad })
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }
    pub fn lambda(&self) -> &T {
        &self.lambda
    }
    pub fn r(&self) -> &[Complex<T>] {
        &self.r
    }
    pub fn quad_blocks(&self) -> &BTreeMap<usize, QuadBlock<T>> {
        &self.quad
    }

    /// Whether `nu` itself is an eigen-coordinate (no quadratic blocks).
    pub fn uses_nu_basis(&self) -> bool {
        self.quad.is_empty()
    }

    /// Same model with `lambda` replaced.
    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::validated(self.layout, lambda, self.r.clone(), self.quad.clone())
    }

    /// `p0` as a polynomial in `(nu, y, mu)`.
    pub fn p0(&self) -> WeightedPolynomial<T> {
        let l = self.layout;
        let mut inner = -&WeightedPolynomial::nu(l);
        for j in 0..l.dim() {
            inner = match self.quad.get(&j) {
                Some(qb) => &inner + &qb.poly(l, j),
                None => &inner + &(&WeightedPolynomial::y(l, j) * &WeightedPolynomial::mu(l, j)).scale(&self.r[j]),
            };
        }
        inner.scale_real(&self.lambda)
    }

    /// `R_{a, alpha, beta} = lambda (a - 1 + sum alpha_j r_j + sum beta_j (1 - r_j))`.
    pub fn eigenvalue(&self, e: &Exponents) -> Complex<T> {
        let mut s: Complex<T> = real(from_u32::<T>(e.a) - T::one());
        for j in 0..e.dim() {
            let rj = &self.r[j];
            s = s + rj.clone() * from_u32::<T>(e.alpha[j]) + (Complex::<T>::one() - rj.clone()) * from_u32::<T>(e.beta[j]);
        }
        s * self.lambda.clone()
    }

    /// `R / lambda`, the scale-free eigenvalue used for resonance tests.
    pub fn normalized_eigenvalue(&self, e: &Exponents) -> Complex<T> {
        self.eigenvalue(e) / self.lambda.clone()
    }

    pub fn is_resonant(&self, e: &Exponents, tol: f64) -> bool {
        crate::scalar::complex_approx_zero(&self.normalized_eigenvalue(e), tol)
    }

    /// Coefficients `(u, v)` of the eigen-forms `E = u_e y + v mu`, `F = u_f y + v mu`
    /// for a quadratic block; returns `(u_e, u_f, v)`.
    fn block_frame(&self, j: usize) -> (Complex<T>, Complex<T>, Complex<T>) {
        let qb = &self.quad[&j];
        let two = T::from_u8(2).unwrap();
        let r = self.r[j].clone();
        let tq = real(two.clone() * qb.q.clone());
        let u_e = r.clone() - Complex::one() + tq.clone();
        let u_f = tq - r;
        (u_e, u_f, real(two * qb.p.clone()))
    }

    /// Rewrites a polynomial in `(nu, y, mu)` as a polynomial in the
    /// eigen-coordinates `(P, E, F)`, stored in the same ring.
    pub fn to_eigen(&self, poly: &WeightedPolynomial<T>) -> Result<WeightedPolynomial<T>> {
        self.to_eigen_with(poly, !self.uses_nu_basis())
    }

    /// As [`ModelQuadratic::to_eigen`], optionally forcing `P = p0` as the
    /// first eigen-coordinate even for real-block models.
    pub fn to_eigen_with(&self, poly: &WeightedPolynomial<T>, p_basis: bool) -> Result<WeightedPolynomial<T>> {
        if poly.layout() != &self.layout {
            return Err(Error::LayoutMismatch);
        }
        if !p_basis {
            return Ok(poly.clone());
        }
        let l = self.layout;
        let mut ys = Vec::with_capacity(l.dim());
        let mut mus = Vec::with_capacity(l.dim());
        for j in 0..l.dim() {
            let (e, f) = (WeightedPolynomial::y(l, j), WeightedPolynomial::mu(l, j));
            if self.quad.contains_key(&j) {
                let (u_e, u_f, v) = self.block_frame(j);
                let y = (&e - &f).scale(&(Complex::<T>::one() / (u_e.clone() - u_f)));
                let mu = (&e - &y.scale(&u_e)).scale(&(Complex::<T>::one() / v));
                ys.push(y);
                mus.push(mu);
            } else {
                ys.push(e);
                mus.push(f);
            }
        }
        // nu = sum r y mu + sum Q - P / lambda, written in eigen-coordinates
        let mut nu = WeightedPolynomial::nu(l).scale_real(&(-T::one() / self.lambda.clone()));
        for j in 0..l.dim() {
            nu = match self.quad.get(&j) {
                Some(qb) => {
                    let two = T::from_u8(2).unwrap();
                    let term = &(&(&mus[j] * &mus[j]).scale_real(&qb.p) + &(&ys[j] * &mus[j]).scale_real(&(two * qb.q.clone())))
                        + &(&ys[j] * &ys[j]).scale_real(&qb.c);
                    &nu + &term
                }
                None => &nu + &(&ys[j] * &mus[j]).scale(&self.r[j]),
            };
        }
        Ok(poly.substitute(l, &nu, &ys, &mus))
    }

    /// Inverse of [`ModelQuadratic::to_eigen`].
    pub fn from_eigen(&self, poly: &WeightedPolynomial<T>) -> Result<WeightedPolynomial<T>> {
        self.from_eigen_with(poly, !self.uses_nu_basis())
    }

    pub fn from_eigen_with(&self, poly: &WeightedPolynomial<T>, p_basis: bool) -> Result<WeightedPolynomial<T>> {
        if poly.layout() != &self.layout {
            return Err(Error::LayoutMismatch);
        }
        if !p_basis {
            return Ok(poly.clone());
        }
        let l = self.layout;
        let mut es = Vec::with_capacity(l.dim());
        let mut fs = Vec::with_capacity(l.dim());
        for j in 0..l.dim() {
            let (y, mu) = (WeightedPolynomial::y(l, j), WeightedPolynomial::mu(l, j));
            if self.quad.contains_key(&j) {
                let (u_e, u_f, v) = self.block_frame(j);
                es.push(&y.scale(&u_e) + &mu.scale(&v));
                fs.push(&y.scale(&u_f) + &mu.scale(&v));
            } else {
                es.push(y);
                fs.push(mu);
            }
        }
        Ok(poly.substitute(l, &self.p0(), &es, &fs))
    }

    /// Eigenvalue of every eigen-monomial with grade in `-2..=max_grade`.
    pub fn eigen_action_table(&self, max_grade: i64) -> BTreeMap<Exponents, Complex<T>> {
        let hi = (max_grade + 2).max(0) as u32;
        Exponents::all_in_weights(self.layout.dim(), 0, hi)
            .into_iter()
            .map(|e| {
                let r = self.eigenvalue(&e);
                (e, r)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::bracket::bracket;
    use crate::Rational;
    use num_traits::Zero;

    fn rq(p: i64, q: i64) -> Rational {
        Rational::ratio(p, q)
    }

    #[test]
    fn table_examples() {
        let l = VariableLayout::from_block_sizes(1, 0, 0).unwrap();
        let m = ModelQuadratic::real(l, rq(1, 1), vec![rq(-1, 1)]).unwrap();
        assert!(m.eigenvalue(&Exponents::new(1, vec![2], vec![1])).is_zero());
        assert!(m.eigenvalue(&Exponents::new(1, vec![0], vec![0])).is_zero());
        let l2 = VariableLayout::all_double_prime(2).unwrap();
        let m2 = ModelQuadratic::real(l2, rq(1, 1), vec![rq(1, 4)]).unwrap();
        assert_eq!(m2.eigenvalue(&Exponents::new(0, vec![3], vec![0])), real(rq(-1, 4)));
    }

    #[test]
    fn block_validation() {
        let l = VariableLayout::all_double_prime(2).unwrap();
        assert!(ModelQuadratic::real(l, rq(1, 1), vec![rq(-1, 1)]).is_err());
        assert!(ModelQuadratic::real(l, rq(0, 1), vec![rq(1, 4)]).is_err());
    }

    #[test]
    fn quadratic_block_eigenframe() {
        let l = VariableLayout::from_block_sizes(0, 0, 1).unwrap();
        let qb = QuadBlock::new(1.0, 0.1, 0.7);
        let m = ModelQuadratic::new(l, -2.0, vec![], vec![qb]).unwrap();
        let p0 = m.p0();
        let e = m.from_eigen(&WeightedPolynomial::y(l, 0)).unwrap();
        let f = m.from_eigen(&WeightedPolynomial::mu(l, 0)).unwrap();
        let r = m.r()[0];
        let lam = -2.0;
        let be = bracket(&p0, &e).unwrap();
        let bf = bracket(&p0, &f).unwrap();
        assert!((&be - &e.scale(&(Complex::new(lam, 0.0) * (r - 1.0)))).l1_norm() < 1e-12);
        assert!((&bf - &f.scale(&(Complex::new(lam, 0.0) * (-r)))).l1_norm() < 1e-12);
        let back = m.to_eigen(&m.from_eigen(&p0).unwrap()).unwrap();
        assert!((&back - &p0).prune(1e-13).is_zero());
    }
}
