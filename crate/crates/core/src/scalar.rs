//! Scalar abstraction shared by the exact (rational) and floating code paths.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// A real scalar field usable by the symbolic and spectral code.
///
/// Exact types answer zero tests exactly and ignore tolerances; floating
/// types compare against the tolerance supplied by the caller.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// `"exact"` or `"floating"`, used in serialized data.
    const MODE: &'static str;
    const EXACT: bool;

    /// Square root if it is representable in this type.
    fn try_sqrt(&self) -> Option<Self>;
    fn approx_zero(&self, tol: f64) -> bool;
    fn as_f64(&self) -> f64;
    fn from_f64_approx(x: f64) -> Self;
    fn ratio(p: i64, q: i64) -> Self;
    /// Lossless text form (`"p/q"` for rationals, shortest round-trip decimal for floats).
    fn to_repr(&self) -> String;
    fn parse_repr(s: &str) -> Option<Self>;

    fn half() -> Self {
        Self::ratio(1, 2)
    }
}

impl Scalar for f64 {
    const MODE: &'static str = "floating";
    const EXACT: bool = false;

    fn try_sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
    fn approx_zero(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn from_f64_approx(x: f64) -> Self {
        x
    }
    fn ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }
    fn to_repr(&self) -> String {
        format!("{self:?}")
    }
    fn parse_repr(s: &str) -> Option<Self> {
        if let Some((p, q)) = s.split_once('/') {
            return Some(p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?);
        }
        s.trim().parse().ok()
    }
}

impl Scalar for f32 {
    const MODE: &'static str = "floating";
    const EXACT: bool = false;

    fn try_sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
    fn approx_zero(&self, tol: f64) -> bool {
        (self.abs() as f64) <= tol
    }
    fn as_f64(&self) -> f64 {
        *self as f64
    }
    fn from_f64_approx(x: f64) -> Self {
        x as f32
    }
    fn ratio(p: i64, q: i64) -> Self {
        (p as f64 / q as f64) as f32
    }
    fn to_repr(&self) -> String {
        format!("{self:?}")
    }
    fn parse_repr(s: &str) -> Option<Self> {
        f64::parse_repr(s).map(|x| x as f32)
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// `[-]digits[.digits][e[-]digits]` as an exact rational.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int}{frac}");
    if frac.chars().any(|c| !c.is_ascii_digit()) || !digits.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    let num: BigInt = digits.parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10u8);
    Some(if shift >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-shift) as usize))
    })
}

impl Scalar for BigRational {
    const MODE: &'static str = "exact";
    const EXACT: bool = true;

    fn try_sqrt(&self) -> Option<Self> {
        let num = exact_isqrt(self.numer())?;
        let den = exact_isqrt(self.denom())?;
        Some(BigRational::new(num, den))
    }
    fn approx_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn from_f64_approx(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }
    fn ratio(p: i64, q: i64) -> Self {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }
    fn to_repr(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
    fn parse_repr(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let q: BigInt = q.trim().parse().ok()?;
                if q.is_zero() {
                    return None;
                }
                Some(BigRational::new(p.trim().parse().ok()?, q))
            }
            None => parse_decimal(s),
        }
    }
}

/// Complex helpers on top of [`Scalar`].
pub fn cplx<T: Scalar>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub fn real<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub fn complex_approx_zero<T: Scalar>(z: &Complex<T>, tol: f64) -> bool {
    z.re.approx_zero(tol) && z.im.approx_zero(tol)
}

pub fn complex_to_f64<T: Scalar>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

/// Integer power for any ring element.
pub fn powi<R: Clone + One + std::ops::Mul<Output = R>>(x: &R, k: u32) -> R {
    let mut acc = R::one();
    for _ in 0..k {
        acc = acc * x.clone();
    }
    acc
}

/// Ordering helper for real scalars that may be NaN-free floats or rationals.
pub fn cmp_scalar<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}


pub(crate) fn from_u32<T: Scalar>(k: u32) -> T {
    T::from_u32(k).expect("integer fits scalar")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sqrt_is_exact_or_none() {
        let q = BigRational::ratio(9, 16);
        assert_eq!(q.try_sqrt(), Some(BigRational::ratio(3, 4)));
        assert_eq!(BigRational::ratio(2, 1).try_sqrt(), None);
        assert_eq!(BigRational::ratio(-1, 4).try_sqrt(), None);
    }

    #[test]
    fn repr_round_trip() {
        let q = BigRational::ratio(-7, 12);
        assert_eq!(q.to_repr(), "-7/12");
        assert_eq!(BigRational::parse_repr("-7/12"), Some(q));
        assert_eq!(BigRational::parse_repr("3"), Some(BigRational::ratio(3, 1)));
        assert_eq!(BigRational::parse_repr("0.375"), Some(BigRational::ratio(3, 8)));
        assert_eq!(BigRational::parse_repr("-.5"), Some(BigRational::ratio(-1, 2)));
        assert_eq!(BigRational::parse_repr("1e-5"), Some(BigRational::ratio(1, 100_000)));
        assert_eq!(BigRational::parse_repr("2.5E2"), Some(BigRational::ratio(250, 1)));
        assert_eq!(BigRational::parse_repr("-"), None);
        assert_eq!(BigRational::parse_repr("1.x"), None);
        let x = 0.1f64 + 0.2;
        assert_eq!(f64::parse_repr(&x.to_repr()), Some(x));
    }

    #[test]
    fn tolerance_only_affects_floats() {
        assert!(1e-13f64.approx_zero(1e-12));
        assert!(!BigRational::ratio(1, 1_000_000_000_000_000).approx_zero(1.0));
    }
}
