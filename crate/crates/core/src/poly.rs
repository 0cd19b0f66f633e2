//! Sparse multivariate polynomials over a generic coefficient ring.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparsePoly<C> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

impl<C: Clone + Num> SparsePoly<C> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, C::one())
    }

    pub fn monomial(exps: Vec<u32>, c: C) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
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

    pub fn add_term(&mut self, exps: Vec<u32>, c: C) {
        assert_eq!(exps.len(), self.nvars, "exponent length mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, C::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Variables with a nonzero exponent somewhere.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.degree_in(i) > 0).collect()
    }

    pub fn derivative(&self, i: usize) -> Self
    where
        C: FromPrimitive,
    {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, v.clone() * C::from_u32(e[i]).unwrap());
            }
        }
        out
    }

    /// Antiderivative in variable `i` vanishing at `x_i = 0`.
    pub fn integrate(&self, i: usize) -> Self
    where
        C: FromPrimitive,
    {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            let mut f = e.clone();
            f[i] += 1;
            let k = C::from_u32(f[i]).unwrap();
            out.add_term(f, v.clone() / k);
        }
        out
    }

    /// Replaces variable `i` by `subs[i]`; all `subs` share one variable count.
    pub fn substitute(&self, subs: &[SparsePoly<C>]) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::InvalidInput(format!("expected {} substitutions, got {}", self.nvars, subs.len())));
        }
        let target = subs.first().map(|s| s.nvars).unwrap_or(0);
        if subs.iter().any(|s| s.nvars != target) {
            return Err(Error::InvalidInput("substitutions live in different rings".into()));
        }
        let mut cache: Vec<Vec<SparsePoly<C>>> = subs.iter().map(|s| vec![Self::constant(target, C::one()), s.clone()]).collect();
        let mut out = Self::zero(target);
        for (e, v) in &self.terms {
            let mut term = Self::constant(target, v.clone());
            for (i, &k) in e.iter().enumerate() {
                while cache[i].len() <= k as usize {
                    let next = cache[i].last().unwrap() * &subs[i];
                    cache[i].push(next);
                }
                term = &term * &cache[i][k as usize];
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Same polynomial in a ring with `nvars` variables; extra variables are appended.
    pub fn extend(&self, nvars: usize) -> Self {
        assert!(nvars >= self.nvars);
        let mut out = Self::zero(nvars);
        for (e, v) in &self.terms {
            let mut f = e.clone();
            f.resize(nvars, 0);
            out.add_term(f, v.clone());
        }
        out
    }

    pub fn map_coeffs<D: Clone + Num>(&self, f: impl Fn(&C) -> D) -> SparsePoly<D> {
        let mut out = SparsePoly::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), f(v));
        }
        out
    }
}

impl<'a, C: Clone + Num> Add for &'a SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn add(self, rhs: Self) -> SparsePoly<C> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, v) in &rhs.terms {
            out.add_term(e.clone(), v.clone());
        }
        out
    }
}

impl<'a, C: Clone + Num> Sub for &'a SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn sub(self, rhs: Self) -> SparsePoly<C> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, v) in &rhs.terms {
            out.add_term(e.clone(), C::zero() - v.clone());
        }
        out
    }
}

impl<'a, C: Clone + Num> Mul for &'a SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn mul(self, rhs: Self) -> SparsePoly<C> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = SparsePoly::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                let e = a.iter().zip(b).map(|(i, j)| i + j).collect();
                out.add_term(e, x.clone() * y.clone());
            }
        }
        out
    }
}

impl<'a, C: Clone + Num> Neg for &'a SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn neg(self) -> SparsePoly<C> {
        self.scale(&(C::zero() - C::one()))
    }
}

impl<C: Clone + Num + fmt::Display> fmt::Display for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, v)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({v})")?;
            for (i, p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{p}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::One;
    use proptest::prelude::*;

    type P = SparsePoly<BigRational>;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn poly_strategy() -> impl Strategy<Value = P> {
        prop::collection::vec(((0u32..3, 0u32..3), -5i64..=5), 0..5).prop_map(|ts| {
            let mut p = P::zero(2);
            for ((a, b), c) in ts {
                p.add_term(vec![a, b], q(c, 1));
            }
            p
        })
    }

    #[test]
    fn integrate_inverts_derivative() {
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        let p = &(&x.pow(3) * &y) + &y.scale(&q(2, 3));
        assert_eq!(p.integrate(0).derivative(0), p);
        assert_eq!(x.pow(2).integrate(0), x.pow(3).scale(&q(1, 3)));
    }

    #[test]
    fn substitution_composes() {
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        let p = &x * &y;
        let s = p.substitute(&[&x + &y, y.clone()]).unwrap();
        assert_eq!(s, &(&x * &y) + &y.pow(2));
        assert!(p.substitute(&[x]).is_err());
    }

    proptest! {
        #[test]
        fn ring_laws(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
            let one = P::constant(2, BigRational::one());
            prop_assert_eq!(&a * &one, a.clone());
        }

        #[test]
        fn product_rule(a in poly_strategy(), b in poly_strategy()) {
            let lhs = (&a * &b).derivative(1);
            let rhs = &(&a.derivative(1) * &b) + &(&a * &b.derivative(1));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
