//! Grade-by-grade reduction of a weighted symbol to its normal form.

mod family;
mod nelson;


pub use family::{family_normal_form, fixed_index_set, FamilyCoefficients, FamilyOptions, SmoothnessEntry};
pub use nelson::{cutoff, fit_slope, linear_decay_rate, nelson_limit, NelsonCase, NelsonResult, NelsonSample, Perturbation};


use num_complex::Complex;

use crate::error::{Error, Result};
use crate::resonance::{class_of, ResonanceClass};
use crate::scalar::{complex_approx_zero, Scalar};
use crate::symalg::{ad_exponential, Exponents, ModelQuadratic, WeightedPolynomial};

/// Splits `e` (weighted-homogeneous, grade >= 1) as `{{p0, b}} + residual`,
/// with the residual supported on resonant eigen-monomials and `b` free of them.
pub fn solve_homological<T: Scalar>(
    model: &ModelQuadratic<T>,
    e: &WeightedPolynomial<T>,
    tol: f64,
) -> Result<(WeightedPolynomial<T>, WeightedPolynomial<T>)> {
    solve_homological_keeping(model, e, tol, |_| false)
}

/// As [`solve_homological`], additionally leaving every eigen-monomial
/// selected by `keep` in the residual.
pub fn solve_homological_keeping<T: Scalar>(
    model: &ModelQuadratic<T>,
    e: &WeightedPolynomial<T>,
    tol: f64,
    keep: impl Fn(&Exponents) -> bool,
) -> Result<(WeightedPolynomial<T>, WeightedPolynomial<T>)> {
    let layout = *model.layout();
    if e.is_zero() {
        return Ok((WeightedPolynomial::zero(layout), WeightedPolynomial::zero(layout)));
    }
    match e.homogeneous_grade() {
        Some(l) if l >= 1 => {}
        _ => return Err(Error::InvalidInput("homological right-hand side must be homogeneous of grade >= 1".into())),
    }
    let eig = model.to_eigen(e)?;
    let mut b = WeightedPolynomial::zero(layout);
    let mut residual = WeightedPolynomial::zero(layout);
    for (idx, c) in eig.terms() {
        let r = model.eigenvalue(idx);
        if keep(idx) || complex_approx_zero(&(r.clone() / model.lambda().clone()), tol) {
            residual.add_term(idx.clone(), c.clone());
        } else {
            b.add_term(idx.clone(), c.clone() / r);
        }
    }
    Ok((model.from_eigen(&b)?.prune(tol), model.from_eigen(&residual)?.prune(tol)))
}

/// Outcome of the finite-order reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormResult<T: Scalar> {
    pub model: ModelQuadratic<T>,
    pub p_norm: WeightedPolynomial<T>,
    /// `(grade, b_l)` for every stage with a nonzero generator; each stage
    /// solves `{{p0, b_l}} = -(nonresonant grade-l part)`.
    pub generators: Vec<(i64, WeightedPolynomial<T>)>,
    pub r_eff_r: WeightedPolynomial<T>,
    pub r_eff_nr: WeightedPolynomial<T>,
    pub residual_grade: i64,
}

impl<T: Scalar> NormalFormResult<T> {
    /// Applies the inverse transformation to `p_norm`.
    pub fn invert(&self) -> Result<WeightedPolynomial<T>> {
        invert_transformation(&self.generators, &self.p_norm, self.residual_grade)
    }
}

/// `exp(ad_{-b_1}) ... exp(ad_{-b_N}) q`, undoing the reduction stages.
pub fn invert_transformation<T: Scalar>(
    generators: &[(i64, WeightedPolynomial<T>)],
    q: &WeightedPolynomial<T>,
    max_grade: i64,
) -> Result<WeightedPolynomial<T>> {
    let mut cur = q.truncate(max_grade);
    for (_, b) in generators.iter().rev() {
        cur = ad_exponential(&-b, &cur, max_grade)?;
    }
    Ok(cur)
}

fn check_model<T: Scalar>(p: &WeightedPolynomial<T>, model: &ModelQuadratic<T>, tol: f64) -> Result<()> {
    if p.layout() != model.layout() {
        return Err(Error::LayoutMismatch);
    }
    if p.min_grade().is_some_and(|g| g < 0) {
        return Err(Error::ModelMismatch);
    }
    if !(&p.component(0) - &model.p0()).prune(tol).is_zero() {
        return Err(Error::ModelMismatch);
    }
    Ok(())
}

/// Removes every nonresonant term of grade `1..=n` from `p`.
pub fn reduce_to_normal_form<T: Scalar>(
    p: &WeightedPolynomial<T>,
    model: &ModelQuadratic<T>,
    n: i64,
    tol: f64,
) -> Result<NormalFormResult<T>> {
    reduce_keeping(p, model, n, tol, |_| false)
}

/// Reduction that leaves the eigen-monomials selected by `keep` in place.
pub fn reduce_keeping<T: Scalar>(
    p: &WeightedPolynomial<T>,
    model: &ModelQuadratic<T>,
    n: i64,
    tol: f64,
    keep: impl Fn(&Exponents) -> bool,
) -> Result<NormalFormResult<T>> {
    if n < 1 {
        return Err(Error::InvalidInput(format!("maximal grade {n} must be at least 1")));
    }
    check_model(p, model, tol)?;
    let mut cur = p.truncate(n);
    let mut generators = Vec::new();
    for l in 1..=n {
        let comp = cur.component(l);
        let (b, _) = solve_homological_keeping(model, &comp, tol, &keep)?;
        if b.is_zero() {
            continue;
        }
        let b = -&b;
        cur = ad_exponential(&b, &cur, n)?.prune(tol);
        generators.push((l, b));
    }

    let rest = model.to_eigen(&(&cur - &model.p0()))?;
    let layout = *model.layout();
    let mut eff_r = WeightedPolynomial::zero(layout);
    let mut eff_nr = WeightedPolynomial::zero(layout);
    for (idx, c) in rest.terms() {
        match class_of(idx, model, tol) {
            ResonanceClass::EffR1 | ResonanceClass::EffR2 => eff_r.add_term(idx.clone(), c.clone()),
            _ => eff_nr.add_term(idx.clone(), c.clone()),
        }
    }
    Ok(NormalFormResult {
        model: model.clone(),
        p_norm: cur,
        generators,
        r_eff_r: model.from_eigen(&eff_r)?.prune(tol),
        r_eff_nr: model.from_eigen(&eff_nr)?.prune(tol),
        residual_grade: n,
    })
}

/// Coefficients of the eigen-expansion of `p - p0`, divided by `lambda`.
pub fn normalized_coefficients<T: Scalar>(
    p: &WeightedPolynomial<T>,
    model: &ModelQuadratic<T>,
) -> Result<Vec<(Exponents, Complex<T>)>> {
    let rest = model.to_eigen(&(p - &model.p0()))?;
    Ok(rest.terms().map(|(e, c)| (e.clone(), c.clone() / model.lambda().clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::{bracket, VariableLayout};
    use crate::Rational;

    fn q(p: i64, r: i64) -> Complex<Rational> {
        Complex::new(Rational::ratio(p, r), Rational::ratio(0, 1))
    }

    fn quarter() -> ModelQuadratic<Rational> {
        let l = VariableLayout::all_double_prime(2).unwrap();
        ModelQuadratic::real(l, Rational::ratio(1, 1), vec![Rational::ratio(1, 4)]).unwrap()
    }

    #[test]
    fn homological_examples() {
        let m = quarter();
        let l = *m.layout();
        let y = WeightedPolynomial::<Rational>::y(l, 0);
        let (b, res) = solve_homological(&m, &y.pow(3), 0.0).unwrap();
        assert_eq!(b, y.pow(3).scale(&q(-4, 1)));
        assert!(res.is_zero());
        let (b, res) = solve_homological(&m, &y.pow(4), 0.0).unwrap();
        assert!(b.is_zero());
        assert_eq!(res, y.pow(4));
        let (b, res) = solve_homological(&m, &WeightedPolynomial::zero(l), 0.0).unwrap();
        assert!(b.is_zero() && res.is_zero());
    }

    #[test]
    fn homological_identity_holds() {
        let m = quarter();
        let l = *m.layout();
        let y = WeightedPolynomial::<Rational>::y(l, 0);
        let mu = WeightedPolynomial::<Rational>::mu(l, 0);
        let nu = WeightedPolynomial::<Rational>::nu(l);
        let e = &(&(&nu * &y.pow(2)) + &y.pow(4).scale(&q(2, 3))) + &(&mu * &y.pow(3));
        let (b, res) = solve_homological(&m, &e, 0.0).unwrap();
        assert_eq!(&bracket(&m.p0(), &b).unwrap() + &res, e);
    }

    #[test]
    fn cubic_is_removed_exactly() {
        let m = quarter();
        let l = *m.layout();
        let y = WeightedPolynomial::<Rational>::y(l, 0);
        let p = &m.p0() + &y.pow(3);
        let nf = reduce_to_normal_form(&p, &m, 6, 0.0).unwrap();
        assert_eq!(nf.p_norm, m.p0());
        assert_eq!(nf.invert().unwrap(), p);
        assert!(nf.r_eff_r.is_zero() && nf.r_eff_nr.is_zero());
    }

    #[test]
    fn model_only_is_fixed() {
        let m = quarter();
        let nf = reduce_to_normal_form(&m.p0(), &m, 4, 0.0).unwrap();
        assert!(nf.generators.is_empty());
        assert_eq!(nf.p_norm, m.p0());
    }

    #[test]
    fn quartic_is_effectively_resonant() {
        let m = quarter();
        let l = *m.layout();
        let y = WeightedPolynomial::<Rational>::y(l, 0);
        let nf = reduce_to_normal_form(&(&m.p0() + &y.pow(4)), &m, 6, 0.0).unwrap();
        assert_eq!(nf.r_eff_r, y.pow(4));
        assert!(nf.r_eff_nr.is_zero());
    }

    #[test]
    fn grade_zero_mismatch() {
        let m = quarter();
        let l = *m.layout();
        let p = &m.p0() + &WeightedPolynomial::<Rational>::nu(l);
        assert!(matches!(reduce_to_normal_form(&p, &m, 3, 0.0), Err(Error::ModelMismatch)));
    }
}
