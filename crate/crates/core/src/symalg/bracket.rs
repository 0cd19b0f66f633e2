use num_complex::Complex;

use super::polynomial::WeightedPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{from_u32, Scalar};

/// Applies the Legendre field of `a`,
/// `W_a = -(d_nu a)(mu . d_mu) + (mu . d_mu a - a) d_nu + sum_j (d_mu_j a d_y_j - d_y_j a d_mu_j)`,
/// to `b`.
pub fn legendre_field<T: Scalar>(a: &WeightedPolynomial<T>, b: &WeightedPolynomial<T>) -> Result<WeightedPolynomial<T>> {
    a.check_layout(b)?;
    let dim = a.layout().dim();
    let a_nu = a.d_nu();
    let mut out = -&(&a_nu * &b.euler_mu());
    out = &out + &(&(&a.euler_mu() - a) * &b.d_nu());
    for j in 0..dim {
        out = &out + &(&a.d_mu(j) * &b.d_y(j));
        out = &out - &(&a.d_y(j) * &b.d_mu(j));
    }
    Ok(out)
}

/// The rescaled bracket `{{a, b}} = W_a(b) + (d_nu a) b`.
pub fn bracket<T: Scalar>(a: &WeightedPolynomial<T>, b: &WeightedPolynomial<T>) -> Result<WeightedPolynomial<T>> {
    let w = legendre_field(a, b)?;
    Ok(&w + &(&a.d_nu() * b))
}

/// `sum_k ad_b^k(p) / k!` truncated above grade `max_grade`, with
/// `ad_b(q) = {{q, b}}`.
pub fn ad_exponential<T: Scalar>(
    b: &WeightedPolynomial<T>,
    p: &WeightedPolynomial<T>,
    max_grade: i64,
) -> Result<WeightedPolynomial<T>> {
    b.check_layout(p)?;
    if b.is_zero() {
        return Ok(p.truncate(max_grade));
    }
    match b.homogeneous_grade() {
        Some(l) if l >= 1 => {}
        Some(l) => {
            return Err(Error::InvalidInput(format!("generator has grade {l}; the series needs grade >= 1")));
        }
        None => return Err(Error::InvalidInput("generator is not weighted-homogeneous".into())),
    }
    let mut term = p.truncate(max_grade);
    let mut acc = term.clone();
    let mut k = 1u32;
    while !term.is_zero() {
        let inv_k = Complex::new(T::one() / from_u32::<T>(k), T::zero());
        term = bracket(&term, b)?.truncate(max_grade).scale(&inv_k);
        acc = &acc + &term;
        k += 1;
    }
    Ok(acc)
}
