use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::layout::{Exponents, VariableLayout};
use super::polynomial::WeightedPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Serialized polynomial: `{mode, n, blocks: [s, m], terms: [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialData {
    pub mode: String,
    pub n: usize,
    pub blocks: [usize; 2],
    pub terms: Vec<TermData>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermData {
    pub a: u32,
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub re: String,
    pub im: String,
}

impl<T: Scalar> WeightedPolynomial<T> {
    pub fn to_data(&self) -> PolynomialData {
        let l = self.layout();
        PolynomialData {
            mode: T::MODE.to_string(),
            n: l.n(),
            blocks: [l.s(), l.m()],
            terms: self
                .terms()
                .map(|(e, c)| TermData {
                    a: e.a,
                    alpha: e.alpha.clone(),
                    beta: e.beta.clone(),
                    re: c.re.to_repr(),
                    im: c.im.to_repr(),
                })
                .collect(),
        }
    }

    pub fn from_data(data: &PolynomialData) -> Result<Self> {
        if data.mode != T::MODE {
            return Err(Error::Serialization(format!("expected mode {}, found {}", T::MODE, data.mode)));
        }
        let layout = VariableLayout::new(data.n, data.blocks[0], data.blocks[1])?;
        let mut out = Self::zero(layout);
        for t in &data.terms {
            if t.alpha.len() != layout.dim() || t.beta.len() != layout.dim() {
                return Err(Error::Serialization(format!("term exponent length differs from n - 1 = {}", layout.dim())));
            }
            let parse = |s: &str| T::parse_repr(s).ok_or_else(|| Error::Serialization(format!("bad number {s:?}")));
            out.add_term(
                Exponents::new(t.a, t.alpha.clone(), t.beta.clone()),
                Complex::new(parse(&t.re)?, parse(&t.im)?),
            );
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_data()).expect("polynomial data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let data: PolynomialData = serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        Self::from_data(&data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn exact_round_trip() {
        let l = VariableLayout::new(3, 2, 3).unwrap();
        let p = WeightedPolynomial::<Rational>::from_terms(
            l,
            vec![
                (Exponents::new(1, vec![0, 2], vec![1, 0]), Complex::new(Rational::ratio(-7, 3), Rational::ratio(1, 9))),
                (Exponents::new(0, vec![1, 0], vec![0, 0]), Complex::new(Rational::ratio(5, 1), Rational::ratio(0, 1))),
            ],
        );
        let s = p.to_json();
        assert!(s.contains("\"-7/3\""));
        assert_eq!(WeightedPolynomial::<Rational>::from_json(&s).unwrap(), p);
        assert!(WeightedPolynomial::<f64>::from_json(&s).is_err());
    }
}
