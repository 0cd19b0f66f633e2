use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use super::layout::{Exponents, VariableLayout};
use crate::error::{Error, Result};
use crate::scalar::{complex_approx_zero, from_u32, Scalar};

/// Polynomial in `(nu, y_1..y_{n-1}, mu_1..mu_{n-1})` with complex
/// coefficients over the scalar field `T`, graded with `nu` of weight two.
#[derive(Clone, PartialEq)]
pub struct WeightedPolynomial<T: Scalar> {
    layout: VariableLayout,
    terms: BTreeMap<Exponents, Complex<T>>,
}

/// One variable of the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Nu,
    Y(usize),
    Mu(usize),
}

impl<T: Scalar> WeightedPolynomial<T> {
    pub fn zero(layout: VariableLayout) -> Self {
        Self { layout, terms: BTreeMap::new() }
    }

    pub fn constant(layout: VariableLayout, c: Complex<T>) -> Self {
        Self::monomial(layout, Exponents::zero(layout.dim()), c)
    }

    pub fn monomial(layout: VariableLayout, exps: Exponents, c: Complex<T>) -> Self {
        assert_eq!(exps.dim(), layout.dim(), "exponent length must match the layout");
        let mut p = Self::zero(layout);
        p.add_term(exps, c);
        p
    }

    pub fn var(layout: VariableLayout, v: Var) -> Self {
        let mut e = Exponents::zero(layout.dim());
        match v {
            Var::Nu => e.a = 1,
            Var::Y(j) => e.alpha[j] = 1,
            Var::Mu(j) => e.beta[j] = 1,
        }
        Self::monomial(layout, e, Complex::one())
    }

    pub fn nu(layout: VariableLayout) -> Self {
        Self::var(layout, Var::Nu)
    }
    pub fn y(layout: VariableLayout, j: usize) -> Self {
        Self::var(layout, Var::Y(j))
    }
    pub fn mu(layout: VariableLayout, j: usize) -> Self {
        Self::var(layout, Var::Mu(j))
    }

    pub fn from_terms<I>(layout: VariableLayout, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponents, Complex<T>)>,
    {
        let mut p = Self::zero(layout);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Adds `c * monomial(e)` in place, keeping the no-zero-coefficient invariant.
    pub fn add_term(&mut self, e: Exponents, c: Complex<T>) {
        assert_eq!(e.dim(), self.layout.dim(), "exponent length must match the layout");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Exponents, Complex<T>> {
        self.terms
    }

    pub fn coeff(&self, e: &Exponents) -> Complex<T> {
        self.terms.get(e).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn check_layout(&self, other: &Self) -> Result<()> {
        if self.layout == other.layout {
            Ok(())
        } else {
            Err(Error::LayoutMismatch)
        }
    }

    pub fn scale(&self, c: &Complex<T>) -> Self {
        Self::from_terms(self.layout, self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())))
    }

    pub fn scale_real(&self, c: &T) -> Self {
        self.scale(&Complex::new(c.clone(), T::zero()))
    }

    /// Keeps only the terms selected by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Exponents) -> bool) -> Self {
        Self {
            layout: self.layout,
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    pub fn min_grade(&self) -> Option<i64> {
        self.terms.keys().map(Exponents::grade).min()
    }

    pub fn max_grade(&self) -> Option<i64> {
        self.terms.keys().map(Exponents::grade).max()
    }

    /// The grade of a nonzero weighted-homogeneous polynomial.
    pub fn homogeneous_grade(&self) -> Option<i64> {
        let g = self.min_grade()?;
        (self.max_grade() == Some(g)).then_some(g)
    }

    pub fn component(&self, grade: i64) -> Self {
        self.filter(|e| e.grade() == grade)
    }

    /// Drops every term above `max_grade`.
    pub fn truncate(&self, max_grade: i64) -> Self {
        self.filter(|e| e.grade() <= max_grade)
    }

    /// Splits into weighted-homogeneous components keyed by grade.
    pub fn grade_components(&self) -> BTreeMap<i64, Self> {
        let mut out: BTreeMap<i64, Self> = BTreeMap::new();
        for (e, c) in &self.terms {
            out.entry(e.grade())
                .or_insert_with(|| Self::zero(self.layout))
                .terms
                .insert(e.clone(), c.clone());
        }
        out
    }

    /// Removes coefficients whose real and imaginary parts are within `tol`
    /// of zero (a no-op for exact scalars).
    pub fn prune(&self, tol: f64) -> Self {
        if T::EXACT {
            return self.clone();
        }
        self.filter(|e| !complex_approx_zero(&self.terms[e], tol))
    }

    pub fn d_nu(&self) -> Self {
        let mut out = Self::zero(self.layout);
        for (e, c) in &self.terms {
            if e.a > 0 {
                let mut f = e.clone();
                f.a -= 1;
                out.add_term(f, c.clone() * real_u32::<T>(e.a));
            }
        }
        out
    }

    pub fn d_y(&self, j: usize) -> Self {
        let mut out = Self::zero(self.layout);
        for (e, c) in &self.terms {
            let k = e.alpha[j];
            if k > 0 {
                let mut f = e.clone();
                f.alpha[j] -= 1;
                out.add_term(f, c.clone() * real_u32::<T>(k));
            }
        }
        out
    }

    pub fn d_mu(&self, j: usize) -> Self {
        let mut out = Self::zero(self.layout);
        for (e, c) in &self.terms {
            let k = e.beta[j];
            if k > 0 {
                let mut f = e.clone();
                f.beta[j] -= 1;
                out.add_term(f, c.clone() * real_u32::<T>(k));
            }
        }
        out
    }

    /// Euler operator `mu . d/dmu`, i.e. multiplication of each term by `|beta|`.
    pub fn euler_mu(&self) -> Self {
        Self::from_terms(
            self.layout,
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone() * real_u32::<T>(e.beta_abs()))),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.layout, Complex::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Replaces every variable by a polynomial (images in the order
    /// `nu, y_1.., mu_1..`) on the target layout.
    pub fn substitute(&self, target: VariableLayout, nu: &Self, y: &[Self], mu: &[Self]) -> Self {
        let dim = self.layout.dim();
        assert!(y.len() == dim && mu.len() == dim);
        let mut cache: BTreeMap<(u8, usize, u32), Self> = BTreeMap::new();
        let mut power = |tag: u8, j: usize, k: u32, base: &Self| -> Self {
            cache.entry((tag, j, k)).or_insert_with(|| base.pow(k)).clone()
        };
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            if e.a > 0 {
                t = &t * &power(0, 0, e.a, nu);
            }
            for j in 0..dim {
                if e.alpha[j] > 0 {
                    t = &t * &power(1, j, e.alpha[j], &y[j]);
                }
                if e.beta[j] > 0 {
                    t = &t * &power(2, j, e.beta[j], &mu[j]);
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Evaluates at a point.
    pub fn eval(&self, nu: &Complex<T>, y: &[Complex<T>], mu: &[Complex<T>]) -> Complex<T> {
        let mut acc = Complex::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            t = t * crate::scalar::powi(nu, e.a);
            for j in 0..e.dim() {
                t = t * crate::scalar::powi(&y[j], e.alpha[j]) * crate::scalar::powi(&mu[j], e.beta[j]);
            }
            acc = acc + t;
        }
        acc
    }

    /// Sum of absolute values of coefficients (as `f64`).
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.re.as_f64().abs() + c.im.as_f64().abs()).sum()
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> WeightedPolynomial<U> {
        WeightedPolynomial::from_terms(
            self.layout,
            self.terms.iter().map(|(e, c)| (e.clone(), Complex::new(f(&c.re), f(&c.im)))),
        )
    }
}

fn real_u32<T: Scalar>(k: u32) -> Complex<T> {
    Complex::new(from_u32(k), T::zero())
}

impl<'a, T: Scalar> Add<&'a WeightedPolynomial<T>> for &'a WeightedPolynomial<T> {
    type Output = WeightedPolynomial<T>;
    fn add(self, rhs: &'a WeightedPolynomial<T>) -> WeightedPolynomial<T> {
        assert_eq!(self.layout, rhs.layout, "layout mismatch in addition");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a, T: Scalar> Sub<&'a WeightedPolynomial<T>> for &'a WeightedPolynomial<T> {
    type Output = WeightedPolynomial<T>;
    fn sub(self, rhs: &'a WeightedPolynomial<T>) -> WeightedPolynomial<T> {
        assert_eq!(self.layout, rhs.layout, "layout mismatch in subtraction");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a, T: Scalar> Mul<&'a WeightedPolynomial<T>> for &'a WeightedPolynomial<T> {
    type Output = WeightedPolynomial<T>;
    fn mul(self, rhs: &'a WeightedPolynomial<T>) -> WeightedPolynomial<T> {
        assert_eq!(self.layout, rhs.layout, "layout mismatch in multiplication");
        let mut out = WeightedPolynomial::zero(self.layout);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1.mul(e2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<T: Scalar> Neg for &WeightedPolynomial<T> {
    type Output = WeightedPolynomial<T>;
    fn neg(self) -> WeightedPolynomial<T> {
        WeightedPolynomial {
            layout: self.layout,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

impl<T: Scalar> Add for WeightedPolynomial<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<T: Scalar> Sub for WeightedPolynomial<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<T: Scalar> Mul for WeightedPolynomial<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<T: Scalar> Neg for WeightedPolynomial<T> {
    type Output = Self;
    fn neg(self) -> Self {
        -&self
    }
}

impl<T: Scalar> fmt::Debug for WeightedPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<T: Scalar> fmt::Display for WeightedPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im.is_zero() {
                write!(f, "({})", c.re.to_repr())?;
            } else {
                write!(f, "({} + {}i)", c.re.to_repr(), c.im.to_repr())?;
            }
            if e.a > 0 {
                write!(f, "*nu^{}", e.a)?;
            }
            for (j, k) in e.alpha.iter().enumerate() {
                if *k > 0 {
                    write!(f, "*y{}^{}", j + 1, k)?;
                }
            }
            for (j, k) in e.beta.iter().enumerate() {
                if *k > 0 {
                    write!(f, "*mu{}^{}", j + 1, k)?;
                }
            }
        }
        Ok(())
    }
}
