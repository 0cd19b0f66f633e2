use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::SparsePoly;
use crate::scalar::Scalar;
use crate::symalg::{VariableLayout, WeightedPolynomial};
use crate::Complex;

/// Polynomial in the real-block coordinates (and, for outputs, `t = log x`
/// as the last variable).
pub type LogPoly<T> = SparsePoly<Complex<T>>;

/// Resonant coefficients `P_j` of `V = x D_x + sum (r_j y_j + P_j(y)) D_{y_j}`
/// over the real coordinates `y', y''`, plus the order-zero term `P_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogInput<T: Scalar> {
    /// `r_j` of the real coordinates, in layout order.
    pub r: Vec<T>,
    /// Number of `y'` coordinates at the front of `r`.
    pub n_prime: usize,
    pub p: BTreeMap<usize, LogPoly<T>>,
    pub p0: Option<LogPoly<T>>,
}

impl<T: Scalar> LogInput<T> {
    pub fn new(r: Vec<T>, n_prime: usize) -> Self {
        Self { r, n_prime, p: BTreeMap::new(), p0: None }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    /// `y''` ascending, then `y'` descending.
    pub fn dependency_order(&self) -> Vec<usize> {
        (self.n_prime..self.dim()).chain((0..self.n_prime).rev()).collect()
    }

    fn weight(&self, e: &[u32]) -> T {
        e.iter().zip(&self.r).fold(T::zero(), |acc, (k, r)| acc + T::from_u32(*k).unwrap() * r.clone())
    }

    fn check_homogeneous(&self, poly: &LogPoly<T>, degree: &T, what: &str, tol: f64) -> Result<()> {
        if poly.nvars() != self.dim() {
            return Err(Error::InvalidInput(format!("{what}: expected {} variables", self.dim())));
        }
        for (e, _) in poly.terms() {
            let w = self.weight(e) - degree.clone();
            if !w.approx_zero(tol) {
                return Err(Error::InvalidInput(format!("{what} is not homogeneous of weighted degree {}", degree.to_repr())));
            }
        }
        Ok(())
    }
}

/// Collects `P_j` and `P_0` from the effectively resonant part of a normal
/// form in the `nu`-basis: a term `c y^alpha mu_j` adds `(c / lambda) y^alpha`
/// to `P_j`, a term `c y^alpha` adds `(c / lambda) y^alpha` to `P_0`.
/// Only real-block terms without `nu` enter.
pub fn log_input_from_normal_form<T: Scalar>(
    layout: VariableLayout,
    lambda: &T,
    r: &[Complex<T>],
    eff_r: &WeightedPolynomial<T>,
) -> Result<LogInput<T>> {
    let real = layout.prime().end.max(layout.double_prime().end);
    let rr: Vec<T> = r[..real].iter().map(|z| z.re.clone()).collect();
    let mut input = LogInput::new(rr, layout.prime().len());
    let inv = Complex::new(T::one() / lambda.clone(), T::zero());
    for (e, c) in eff_r.terms() {
        if e.a != 0 || e.alpha[real..].iter().any(|k| *k != 0) || e.beta[real..].iter().any(|k| *k != 0) {
            continue;
        }
        let mono = e.alpha[..real].to_vec();
        let coeff = c.clone() * inv.clone();
        let nb: u32 = e.beta.iter().sum();
        if nb == 0 {
            input.p0.get_or_insert_with(|| SparsePoly::zero(real)).add_term(mono, coeff);
        } else if nb == 1 {
            let j = e.beta.iter().position(|k| *k == 1).unwrap();
            input.p.entry(j).or_insert_with(|| SparsePoly::zero(real)).add_term(mono, coeff);
        }
    }
    input.p.retain(|_, v| !v.is_zero());
    Ok(input)
}

/// Blown-up log variables `Y_j = y_j x^{-r_j} - P#_j(Y, t)` and `P#_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogVariableSet<T: Scalar> {
    pub input: LogInput<T>,
    /// `P#_j(Y, t)` with variables `(Y_1..Y_d, t)`.
    pub p_sharp: Vec<LogPoly<T>>,
    pub p0_sharp: Option<LogPoly<T>>,
    /// `Y_j` as polynomials in `(y~_1..y~_d, t)`, `y~_k = y_k x^{-r_k}`.
    pub y_vars: Vec<LogPoly<T>>,
    pub certificate: LogCertificate,
}

impl<T: Scalar> LogVariableSet<T> {
    /// Highest power of `log x` in any `P#`.
    pub fn max_log_power(&self) -> u32 {
        let t = self.input.dim();
        self.p_sharp.iter().chain(&self.p0_sharp).map(|p| p.degree_in(t)).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LogCertificate {
    /// `V(Y_j) = 0` as an exact polynomial identity, per coordinate.
    pub annihilated: Vec<bool>,
    /// `V(P#_0) = P_0(y~)` holds identically.
    pub order_zero: Option<bool>,
}

impl LogCertificate {
    pub fn holds(&self) -> bool {
        self.annihilated.iter().all(|b| *b) && self.order_zero.unwrap_or(true)
    }
}

fn is_zero_poly<T: Scalar>(p: &LogPoly<T>, tol: f64) -> bool {
    p.terms().all(|(_, c)| c.re.approx_zero(tol) && c.im.approx_zero(tol))
}

/// Builds `P#_j = int_0^t P_j(Y + P#(Y, t')) dt'` in dependency order and
/// certifies `V(Y_j) = 0` by expanding each `Y_j` in `(y~, t)`.
pub fn log_variable_recursion<T: Scalar>(input: &LogInput<T>, tol: f64) -> Result<LogVariableSet<T>> {
    let d = input.dim();
    if input.n_prime > d {
        return Err(Error::InvalidInput("more y' coordinates than real coordinates".into()));
    }
    for (j, pj) in &input.p {
        if *j >= d {
            return Err(Error::InvalidInput(format!("P_{j} refers to a missing coordinate")));
        }
        input.check_homogeneous(pj, &input.r[*j], &format!("P_{j}"), tol)?;
    }
    if let Some(p0) = &input.p0 {
        input.check_homogeneous(p0, &T::one(), "P_0", tol)?;
    }
    let order = input.dependency_order();
    let pos: Vec<usize> = {
        let mut v = vec![0; d];
        for (k, j) in order.iter().enumerate() {
            v[*j] = k;
        }
        v
    };
    for (j, pj) in &input.p {
        if pj.support().iter().any(|k| pos[*k] >= pos[*j]) {
            return Err(Error::InvalidInput(format!("P_{j} depends on a coordinate that is not resolved before it")));
        }
    }

    let nv = d + 1;
    let t = d;
    let ring_var = |i: usize| LogPoly::<T>::var(nv, i);
    let mut p_sharp = vec![LogPoly::<T>::zero(nv); d];
    // Y-bar_k = Y_k + P#_k(Y, t)
    let mut y_bar: Vec<LogPoly<T>> = (0..d).map(ring_var).collect();
    for &j in &order {
        if let Some(pj) = input.p.get(&j) {
            let integrand = pj.substitute(&y_bar)?;
            p_sharp[j] = integrand.integrate(t);
            y_bar[j] = &ring_var(j) + &p_sharp[j];
        }
    }
    let p0_sharp = match &input.p0 {
        Some(p0) => Some(p0.substitute(&y_bar)?.integrate(t)),
        None => None,
    };

    // Y_j in (y~, t): Y_j = y~_j - P#_j(Y, t), resolved in dependency order
    let mut y_vars: Vec<LogPoly<T>> = (0..d).map(ring_var).collect();
    for &j in &order {
        let mut subs = y_vars.clone();
        subs.push(ring_var(t));
        let ps = p_sharp[j].substitute(&subs)?;
        y_vars[j] = &ring_var(j) - &ps;
    }
    // V = d/dt + sum P_k(y~) d/dy~_k on polynomials in (y~, t)
    let vector_field: Vec<Option<LogPoly<T>>> = (0..d).map(|k| input.p.get(&k).map(|pk| pk.extend(nv))).collect();
    let apply_v = |f: &LogPoly<T>| {
        let mut out = f.derivative(t);
        for (k, pk) in vector_field.iter().enumerate() {
            if let Some(pk) = pk {
                out = &out + &(pk * &f.derivative(k));
            }
        }
        out
    };
    let annihilated = y_vars.iter().map(|y| is_zero_poly(&apply_v(y), tol)).collect();
    let order_zero = match (&input.p0, &p0_sharp) {
        (Some(p0), Some(ps)) => {
            let mut subs = y_vars.clone();
            subs.push(ring_var(t));
            let lhs = apply_v(&ps.substitute(&subs)?);
            Some(is_zero_poly(&(&lhs - &p0.extend(nv)), tol))
        }
        _ => None,
    };
    Ok(LogVariableSet {
        input: input.clone(),
        p_sharp,
        p0_sharp,
        y_vars,
        certificate: LogCertificate { annihilated, order_zero },
    })
}

/// Convenience for exact inputs: `c` as a complex rational.
pub fn real_coeff<T: Scalar>(c: T) -> Complex<T> {
    Complex::new(c, T::zero())
}

/// `Complex` one, for building inputs.
pub fn unit<T: Scalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn fifth_and_two_fifths() {
        let mut input = LogInput::new(vec![q(1, 5), q(2, 5)], 0);
        let c = real_coeff(q(3, 7));
        input.p.insert(1, LogPoly::monomial(vec![2, 0], c.clone()));
        let set = log_variable_recursion(&input, 0.0).unwrap();
        assert!(set.certificate.holds());
        // P#_2 = c Y_1^2 t
        assert_eq!(set.p_sharp[1], LogPoly::monomial(vec![2, 0, 1], c));
        assert!(set.p_sharp[0].is_zero());
        assert_eq!(set.max_log_power(), 1);
    }

    #[test]
    fn trivial_input_gives_plain_variables() {
        let input = LogInput::new(vec![q(1, 3), q(1, 2)], 0);
        let set = log_variable_recursion(&input, 0.0).unwrap();
        for (j, y) in set.y_vars.iter().enumerate() {
            assert_eq!(*y, LogPoly::var(3, j));
        }
        assert!(set.certificate.holds());
    }

    #[test]
    fn order_zero_term() {
        let mut input = LogInput::new(vec![q(1, 3)], 0);
        let c = real_coeff(q(-2, 1));
        input.p0 = Some(LogPoly::monomial(vec![3], c.clone()));
        let set = log_variable_recursion(&input, 0.0).unwrap();
        assert_eq!(set.p0_sharp.clone().unwrap(), LogPoly::monomial(vec![3, 1], c));
        assert_eq!(set.certificate.order_zero, Some(true));
    }

    #[test]
    fn chained_logs_raise_the_power() {
        // r = (1/4, 1/2, 1): P_2 = Y_1^2, P_3 = Y_2^2 gives t^3 in P#_3
        let mut input = LogInput::new(vec![q(1, 4), q(1, 2), q(1, 1)], 0);
        input.p.insert(1, LogPoly::monomial(vec![2, 0, 0], unit()));
        input.p.insert(2, LogPoly::monomial(vec![0, 2, 0], unit()));
        let set = log_variable_recursion(&input, 0.0).unwrap();
        assert!(set.certificate.holds());
        assert_eq!(set.max_log_power(), 3);
    }

    #[test]
    fn saddle_coordinates_resolved_descending() {
        // y' with r = (-2, -1), y'' with r = 1: P on y'_1 (r=-2) uses y'_2^2
        let mut input = LogInput::new(vec![q(-2, 1), q(-1, 1), q(1, 1)], 2);
        input.p.insert(0, LogPoly::monomial(vec![0, 2, 0], unit()));
        assert_eq!(input.dependency_order(), vec![2, 1, 0]);
        let set = log_variable_recursion(&input, 0.0).unwrap();
        assert!(set.certificate.holds());
    }

    #[test]
    fn rejects_inhomogeneous_and_cyclic() {
        let mut input = LogInput::new(vec![q(1, 5), q(2, 5)], 0);
        input.p.insert(1, LogPoly::monomial(vec![1, 0], unit()));
        assert!(log_variable_recursion(&input, 0.0).is_err());
        let mut input = LogInput::new(vec![q(1, 5), q(1, 5)], 0);
        input.p.insert(0, LogPoly::monomial(vec![0, 1], unit()));
        assert!(log_variable_recursion(&input, 0.0).is_err());
    }
}
