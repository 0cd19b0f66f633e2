use num_complex::Complex;
use serde::Serialize;

use crate::error::Result;
use crate::radial::RadialPoint;
use crate::scalar::{from_u32, Scalar};
use crate::symalg::{bracket, bounded_multiindices, Exponents, ModelQuadratic, WeightedPolynomial};

/// Principal symbol behind a test-module generator, in eigen-coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GeneratorKind {
    /// `x^{-1} f'_j`
    FPrime(usize),
    /// `x^{-r''_j} e''_j`
    EDouble(usize),
    /// `x^{-(1 - r''_j)} f''_j`
    FDouble(usize),
    /// `x^{-1/2} e'''_j`
    ETriple(usize),
    /// `x^{-1/2} f'''_j`
    FTriple(usize),
    /// `x^{-1} p0`
    P0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleGenerator<T: Scalar> {
    pub kind: GeneratorKind,
    /// Normalized eigenvalue `sigma_i` of the symbol.
    pub sigma: Complex<T>,
    /// `s_i = min(1, Re sigma_i)`.
    pub order: T,
}

/// Generators of the test module with their orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleOrderRecord<T: Scalar> {
    pub generators: Vec<ModuleGenerator<T>>,
}

fn min_one<T: Scalar>(x: T) -> T {
    if x > T::one() {
        T::one()
    } else {
        x
    }
}

impl<T: Scalar> ModuleOrderRecord<T> {
    pub fn for_model(model: &ModelQuadratic<T>) -> Self {
        let l = model.layout();
        let one = Complex::<T>::new(T::one(), T::zero());
        let mut generators = Vec::new();
        let mut push = |kind, sigma: Complex<T>| {
            let order = min_one(sigma.re.clone());
            generators.push(ModuleGenerator { kind, sigma, order });
        };
        for j in l.prime() {
            push(GeneratorKind::FPrime(j), one.clone() - model.r()[j].clone());
        }
        for j in l.double_prime() {
            push(GeneratorKind::EDouble(j), model.r()[j].clone());
            push(GeneratorKind::FDouble(j), one.clone() - model.r()[j].clone());
        }
        for j in l.triple_prime() {
            push(GeneratorKind::ETriple(j), model.r()[j].clone());
            push(GeneratorKind::FTriple(j), one.clone() - model.r()[j].clone());
        }
        push(GeneratorKind::P0, one);
        Self { generators }
    }

    /// Module containing only the identity.
    pub fn trivial() -> Self {
        Self { generators: Vec::new() }
    }

    /// `(s(alpha), s~(alpha))` with `s = min(sum s_i alpha_i, 1)`.
    pub fn s_alpha(&self, alpha: &[u32]) -> (T, T) {
        let total = self
            .generators
            .iter()
            .zip(alpha)
            .fold(T::zero(), |acc, (g, k)| acc + g.order.clone() * from_u32::<T>(*k));
        let s = min_one(total.clone());
        let rest = total - s.clone();
        (s, rest)
    }

    /// Generator multiindex of an eigen-monomial `P^a E^alpha F^beta`;
    /// `e'` factors are order-zero coefficients and are dropped.
    pub fn generator_exponents(&self, e: &Exponents) -> Vec<u32> {
        self.generators
            .iter()
            .map(|g| match g.kind {
                GeneratorKind::FPrime(j) | GeneratorKind::FDouble(j) | GeneratorKind::FTriple(j) => e.beta[j],
                GeneratorKind::EDouble(j) | GeneratorKind::ETriple(j) => e.alpha[j],
                GeneratorKind::P0 => e.a,
            })
            .collect()
    }

    /// Untruncated module order `sum_i s_i gamma_i` induced by an eigen-monomial.
    pub fn induced_order(&self, e: &Exponents) -> T {
        let g = self.generator_exponents(e);
        self.generators
            .iter()
            .zip(&g)
            .fold(T::zero(), |acc, (gen, k)| acc + gen.order.clone() * from_u32::<T>(*k))
    }

    fn symbol(&self, alpha: &[u32], dim: usize) -> Exponents {
        let mut e = Exponents::zero(dim);
        for (g, k) in self.generators.iter().zip(alpha) {
            match g.kind {
                GeneratorKind::FPrime(j) | GeneratorKind::FDouble(j) | GeneratorKind::FTriple(j) => e.beta[j] += k,
                GeneratorKind::EDouble(j) | GeneratorKind::ETriple(j) => e.alpha[j] += k,
                GeneratorKind::P0 => e.a += k,
            }
        }
        e
    }
}

pub fn module_order<T: Scalar>(rp: &RadialPoint<T>) -> Result<ModuleOrderRecord<T>> {
    Ok(ModuleOrderRecord::for_model(&rp.model()?))
}

/// A bracket term whose coefficient would need a negative power of `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureViolation {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub gamma: Vec<u32>,
    /// Power of `x` left on the coefficient of `x^{s~(gamma)} A^gamma`.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    pub pairs_checked: usize,
    pub terms_checked: usize,
    /// `min over terms of s~(alpha) + s~(beta) - s~(gamma)`.
    pub min_margin: Option<f64>,
    pub violations: Vec<ClosureViolation>,
}

impl ClosureReport {
    pub fn closed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Brackets `{{B^alpha, B^beta}}` of generator products with
/// `|alpha| + |beta| <= max_degree`, re-expanded in eigen-monomials.
///
/// The term `gamma` of `[x^{s~(alpha)} A^alpha, x^{s~(beta)} A^beta]` carries
/// `x^{E} x^{s~(gamma)} A^gamma` with
/// `E = s~(alpha) + s~(beta) - s~(gamma) + 1 - sum s alpha - sum s beta + sum s gamma`;
/// the module is closed when `E >= 0` for every term.
pub fn module_closure_check<T: Scalar>(
    model: &ModelQuadratic<T>,
    record: &ModuleOrderRecord<T>,
    max_degree: u32,
    tol: f64,
) -> Result<ClosureReport> {
    let n_gen = record.generators.len();
    let dim = model.layout().dim();
    let layout = *model.layout();
    let mut report = ClosureReport { pairs_checked: 0, terms_checked: 0, min_margin: None, violations: Vec::new() };
    if n_gen == 0 {
        return Ok(report);
    }
    let products: Vec<Vec<u32>> = bounded_multiindices(n_gen, max_degree.saturating_sub(1))
        .into_iter()
        .filter(|a| a.iter().sum::<u32>() >= 1)
        .collect();
    let one = Complex::<T>::new(T::one(), T::zero());
    for (ia, alpha) in products.iter().enumerate() {
        for beta in &products[ia..] {
            if alpha.iter().sum::<u32>() + beta.iter().sum::<u32>() > max_degree {
                continue;
            }
            report.pairs_checked += 1;
            let pa = model.from_eigen_with(&WeightedPolynomial::monomial(layout, record.symbol(alpha, dim), one.clone()), true)?;
            let pb = model.from_eigen_with(&WeightedPolynomial::monomial(layout, record.symbol(beta, dim), one.clone()), true)?;
            let br = model.to_eigen_with(&bracket(&pa, &pb)?, true)?.prune(tol);
            let (sa, ta) = record.s_alpha(alpha);
            let (sb, tb) = record.s_alpha(beta);
            let sum_a = sa + ta.clone();
            let sum_b = sb + tb.clone();
            for (e, _) in br.terms() {
                report.terms_checked += 1;
                let gamma = record.generator_exponents(e);
                let (sg, tg) = record.s_alpha(&gamma);
                let margin = ta.clone() + tb.clone() - tg.clone();
                let excess = margin.clone() + T::one() - sum_a.clone() - sum_b.clone() + sg + tg;
                let m = margin.as_f64();
                report.min_margin = Some(report.min_margin.map_or(m, |x: f64| x.min(m)));
                if excess.is_negative() && !excess.approx_zero(tol) {
                    report.violations.push(ClosureViolation {
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                        gamma,
                        excess: excess.as_f64(),
                    });
                }
            }
        }
    }
    Ok(report)
}
