//! Asymptotic-expansion templates at outgoing radial points.

mod logvar;
mod oscillator;

pub use logvar::{
    log_input_from_normal_form, log_variable_recursion, real_coeff, unit, LogCertificate, LogInput, LogPoly,
    LogVariableSet,
};
pub use oscillator::{
    extrapolated_spectrum, finite_difference_spectrum, oscillator_spectrum, OscillatorSpec,
};

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial::{RadialClass, RadialPoint};
use crate::symalg::{bounded_multiindices, Block};

/// Oscillator multiindex with its summed eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaEntry {
    pub k: Vec<u32>,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaExponent {
    pub beta_prime: Vec<u32>,
    pub a: Complex<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExponentData {
    pub class: RadialClass,
    pub b_tilde: Complex<f64>,
    pub big_b: f64,
    pub d: f64,
    pub im_b_tilde: f64,
    /// Per `y'''` block: `kappa_0..kappa_K`.
    pub block_kappas: Vec<Vec<f64>>,
    /// All `k` with `|k| <= K`, sorted by `kappa` then `k`.
    pub kappas: Vec<KappaEntry>,
    pub a_beta: Vec<BetaExponent>,
}

/// Exponents at `rp` for a user-supplied `Re b`.
///
/// `oscillators` carries one spec per `y'''` coordinate.
pub fn exponent_data(
    rp: &RadialPoint<f64>,
    re_b: f64,
    oscillators: &[OscillatorSpec],
    k_max: usize,
    max_beta_prime: u32,
) -> Result<ExponentData> {
    rp.ensure_regular()?;
    let layout = rp.layout;
    let n = layout.n() as f64;
    let m = layout.m() as f64;
    let triple = layout.triple_prime().len();
    if oscillators.len() != triple {
        return Err(Error::InvalidInput(format!(
            "expected {triple} oscillator specs for the y''' block, got {}",
            oscillators.len()
        )));
    }
    let r2: f64 = rp.r_in(Block::DoublePrime).iter().map(|z| z.re).sum();
    let r1: Vec<f64> = rp.r_in(Block::Prime).iter().map(|z| z.re).collect();
    let big_b = (n - 1.0) / 2.0 - 0.5 * r2 - (n - m) / 4.0;
    let d = -0.5 * r1.iter().sum::<f64>();
    let class = rp.classify();
    let im_b_tilde = match class {
        RadialClass::SourceSink => big_b,
        RadialClass::Saddle => big_b + d,
    };
    let b_tilde = Complex::new(re_b, im_b_tilde);

    let block_kappas: Vec<Vec<f64>> =
        oscillators.iter().map(|o| oscillator_spectrum(o, k_max)).collect::<Result<_>>()?;
    let mut kappas: Vec<KappaEntry> = bounded_multiindices(triple, k_max as u32)
        .into_iter()
        .map(|k| {
            let kappa = k.iter().enumerate().map(|(j, kj)| block_kappas[j][*kj as usize]).sum();
            KappaEntry { k, kappa }
        })
        .collect();
    kappas.sort_by(|a, b| a.kappa.total_cmp(&b.kappa).then_with(|| a.k.cmp(&b.k)));

    let minus_i_b = Complex::new(0.0, -1.0) * b_tilde;
    let a_beta = bounded_multiindices(r1.len(), max_beta_prime)
        .into_iter()
        .map(|beta| {
            let shift: f64 = beta.iter().zip(&r1).map(|(b, r)| -(*b as f64) * r).sum();
            BetaExponent { a: minus_i_b + shift, beta_prime: beta }
        })
        .collect();
    Ok(ExponentData { class, b_tilde, big_b, d, im_b_tilde, block_kappas, kappas, a_beta })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionTerm {
    pub exponent: Complex<f64>,
    pub log_power: u32,
    pub beta_prime: Vec<u32>,
    pub k: Vec<u32>,
    pub profile: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionTemplate {
    pub class: RadialClass,
    pub terms: Vec<ExpansionTerm>,
    /// Outgoing solutions at a saddle lie in `x^{-1/2 + eps} L^2`.
    pub saddle_decay: bool,
    pub effectively_resonant: bool,
    pub log_certificate: Option<LogCertificate>,
}

fn index_label(v: &[u32]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Terms `x^{exponent} (log x)^{<= log_power} (y')^{beta'} w(...) v_k(Y''')`
/// sorted by real part of the exponent, then `sum |r'_j| beta'_j`, then `kappa`.
pub fn expansion_template<T: crate::Scalar>(
    rp: &RadialPoint<f64>,
    exponents: &ExponentData,
    effr: Option<&LogVariableSet<T>>,
) -> Result<ExpansionTemplate> {
    let effectively_resonant = effr.is_some();
    let log_power = effr.map(|s| s.max_log_power()).unwrap_or(0);
    let (prefix, args) = if effectively_resonant { ("exp(-i P#_0) ", "Y~'',log x") } else { ("", "Y''") };
    let r1: Vec<f64> = rp.r_in(Block::Prime).iter().map(|z| z.re).collect();
    let minus_i = Complex::new(0.0, -1.0);
    let mut keyed: Vec<(f64, f64, f64, ExpansionTerm)> = Vec::new();
    match exponents.class {
        RadialClass::SourceSink => {
            for ke in &exponents.kappas {
                let exponent = minus_i * exponents.b_tilde + minus_i * ke.kappa;
                let term = ExpansionTerm {
                    exponent,
                    log_power,
                    beta_prime: vec![0; r1.len()],
                    k: ke.k.clone(),
                    profile: format!("{prefix}w_{}({args}) v_{}(Y''')", index_label(&ke.k), index_label(&ke.k)),
                };
                keyed.push((exponent.re, 0.0, ke.kappa, term));
            }
        }
        RadialClass::Saddle => {
            for ab in &exponents.a_beta {
                let weight: f64 = ab.beta_prime.iter().zip(&r1).map(|(b, r)| *b as f64 * r.abs()).sum();
                for ke in &exponents.kappas {
                    let exponent = ab.a + minus_i * ke.kappa;
                    let term = ExpansionTerm {
                        exponent,
                        log_power,
                        beta_prime: ab.beta_prime.clone(),
                        k: ke.k.clone(),
                        profile: format!(
                            "{prefix}(y')^{} w_{},{}({args}) v_{}(Y''')",
                            index_label(&ab.beta_prime),
                            index_label(&ab.beta_prime),
                            index_label(&ke.k),
                            index_label(&ke.k)
                        ),
                    };
                    keyed.push((exponent.re, weight, ke.kappa, term));
                }
            }
        }
    }
    keyed.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then_with(|| a.3.beta_prime.cmp(&b.3.beta_prime))
            .then_with(|| a.3.k.cmp(&b.3.k))
    });
    Ok(ExpansionTemplate {
        class: exponents.class,
        terms: keyed.into_iter().map(|k| k.3).collect(),
        saddle_decay: exponents.class == RadialClass::Saddle,
        effectively_resonant,
        log_certificate: effr.map(|s| s.certificate.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{linearization_spectrum, CriticalPointSpec, Sign};
    use crate::Rational;

    fn rp(value: f64, hessian: Vec<f64>, sigma: f64) -> RadialPoint<f64> {
        let cp = CriticalPointSpec::new("z", value, hessian).unwrap();
        linearization_spectrum(&cp, &sigma, Sign::Plus).unwrap()
    }

    #[test]
    fn single_minimum_quarter() {
        // 2a = 3/8 at sigma = 1: r = 1/4
        let p = rp(0.0, vec![0.375], 1.0);
        assert!((p.r[0].re - 0.25).abs() < 1e-15);
        let e = exponent_data(&p, 0.3, &[], 2, 2).unwrap();
        assert!((e.big_b - 0.375).abs() < 1e-15);
        assert_eq!(e.d, 0.0);
        assert_eq!(e.im_b_tilde, e.big_b);
        assert_eq!(e.a_beta.len(), 1);
        assert_eq!(e.a_beta[0].a, Complex::new(0.0, -1.0) * e.b_tilde);
        let t = expansion_template::<f64>(&p, &e, None).unwrap();
        assert_eq!(t.terms.len(), 1);
        assert_eq!(t.terms[0].log_power, 0);
        assert!(!t.saddle_decay);
    }

    #[test]
    fn saddle_exponents() {
        // r' = -1 at sigma - V0 = 1: a/w = -2, hessian -4
        let p = rp(0.0, vec![-4.0], 1.0);
        assert!((p.r[0].re + 1.0).abs() < 1e-15);
        let e = exponent_data(&p, 0.0, &[], 0, 2).unwrap();
        assert!((e.d - 0.5).abs() < 1e-15);
        assert!((e.im_b_tilde - (e.big_b + 0.5)).abs() < 1e-15);
        let ib = Complex::new(0.0, -1.0) * e.b_tilde;
        for (k, ab) in e.a_beta.iter().enumerate() {
            assert_eq!(ab.beta_prime, vec![k as u32]);
            assert!((ab.a - (ib + k as f64)).norm() < 1e-15);
            assert!((ab.a.im + e.b_tilde.re).abs() < 1e-15);
        }
        let t = expansion_template::<f64>(&p, &e, None).unwrap();
        assert!(t.saddle_decay);
        let re: Vec<f64> = t.terms.iter().map(|x| x.exponent.re).collect();
        assert!(re.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn oscillator_block_template() {
        // complex r: 2a = 4 at sigma = 2 gives r = 1/2 + i sqrt(3/4)
        let p = rp(0.0, vec![4.0], 2.0);
        assert_eq!(p.layout.triple_prime().len(), 1);
        let osc = OscillatorSpec::new(1.0, 0.0, 1.0).unwrap();
        let e = exponent_data(&p, 0.0, &[osc], 2, 0).unwrap();
        // n = 2, m = 1: B = 1/2 - 0 - 1/4
        assert!((e.big_b - 0.25).abs() < 1e-15);
        let t = expansion_template::<f64>(&p, &e, None).unwrap();
        assert_eq!(t.terms.len(), 3);
        for (k, term) in t.terms.iter().enumerate() {
            assert_eq!(term.k, vec![k as u32]);
            let expect = Complex::new(0.0, -1.0) * e.b_tilde - Complex::new(0.0, e.block_kappas[0][k]);
            assert!((term.exponent - expect).norm() < 1e-15);
        }
        assert!(exponent_data(&p, 0.0, &[], 2, 0).is_err());
    }

    #[test]
    fn effectively_resonant_template_carries_logs() {
        let p = rp(0.0, vec![0.375], 1.0);
        let e = exponent_data(&p, 0.0, &[], 0, 0).unwrap();
        let mut input = LogInput::<Rational>::new(vec![Rational::new(1.into(), 4.into())], 0);
        input.p0 = Some(LogPoly::monomial(vec![4], unit()));
        let set = log_variable_recursion(&input, 0.0).unwrap();
        let t = expansion_template(&p, &e, Some(&set)).unwrap();
        assert!(t.effectively_resonant);
        assert_eq!(t.terms[0].log_power, 1);
        assert!(t.terms[0].profile.starts_with("exp(-i P#_0)"));
        assert!(t.log_certificate.unwrap().holds());
    }

    #[test]
    fn threshold_refused() {
        // a/w = 1/4 exactly
        let p = rp(0.0, vec![0.5], 1.0);
        assert!(p.hessian_threshold);
        assert!(exponent_data(&p, 0.0, &[], 0, 0).is_err());
    }
}
