//! Resonant multiindices, their effective classification, energy scans and
//! test-module order bookkeeping.

mod module;
mod scan;

pub use module::{
    module_closure_check, module_order, ClosureReport, ClosureViolation, GeneratorKind, ModuleGenerator,
    ModuleOrderRecord,
};
pub use scan::{scan_effectively_resonant_energies, EnergyScanResult, RootKind, ScanOptions, ScanRoot};

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial::RadialPoint;
use crate::scalar::{complex_approx_zero, from_u32, Scalar};
use crate::symalg::{bounded_multiindices, Block, Exponents, ModelQuadratic};

/// Classification of a multiindex relative to a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ResonanceClass {
    /// Effectively resonant, first kind: `a = 0`, only `y'` powers and one `mu'`.
    EffR1,
    /// Effectively resonant, second kind: `a = 0`, only `y''`/`mu''` powers.
    EffR2,
    /// Resonant but effectively nonresonant.
    EffNonres,
    Nonresonant,
}

impl ResonanceClass {
    pub fn is_effectively_resonant(self) -> bool {
        matches!(self, ResonanceClass::EffR1 | ResonanceClass::EffR2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceRecord<T: Scalar> {
    pub idx: Exponents,
    pub eigenvalue: Complex<T>,
    pub class: ResonanceClass,
}

fn check_degree(max_degree: u32) -> Result<()> {
    if max_degree < 3 {
        return Err(Error::InvalidInput(format!("maximal degree {max_degree} must be at least 3")));
    }
    Ok(())
}

/// All resonant `(a, alpha, beta)` with weighted degree in `3..=max_degree`.
pub fn enumerate_resonances_for<T: Scalar>(
    model: &ModelQuadratic<T>,
    max_degree: u32,
    tol: f64,
) -> Result<Vec<ResonanceRecord<T>>> {
    check_degree(max_degree)?;
    let mut out = Vec::new();
    for idx in Exponents::all_in_weights(model.layout().dim(), 3, max_degree) {
        let eigenvalue = model.eigenvalue(&idx);
        if complex_approx_zero(&(eigenvalue.clone() / model.lambda().clone()), tol) {
            let class = structural_class(&idx, model);
            out.push(ResonanceRecord { idx, eigenvalue, class });
        }
    }
    Ok(out)
}

pub fn enumerate_resonances<T: Scalar>(rp: &RadialPoint<T>, max_degree: u32, tol: f64) -> Result<Vec<ResonanceRecord<T>>> {
    enumerate_resonances_for(&rp.model()?, max_degree, tol)
}

/// Multiindices with `tol < |R / lambda| <= 10 tol` (always empty for exact scalars).
pub fn near_resonances<T: Scalar>(
    model: &ModelQuadratic<T>,
    max_degree: u32,
    tol: f64,
) -> Result<Vec<ResonanceRecord<T>>> {
    check_degree(max_degree)?;
    if T::EXACT {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for idx in Exponents::all_in_weights(model.layout().dim(), 3, max_degree) {
        let eigenvalue = model.eigenvalue(&idx);
        let nz = eigenvalue.clone() / model.lambda().clone();
        if !complex_approx_zero(&nz, tol) && complex_approx_zero(&nz, 10.0 * tol) {
            out.push(ResonanceRecord { idx, eigenvalue, class: ResonanceClass::Nonresonant });
        }
    }
    Ok(out)
}

/// Effective class of a multiindex known to be resonant.
fn structural_class<T: Scalar>(idx: &Exponents, model: &ModelQuadratic<T>) -> ResonanceClass {
    let l = model.layout();
    let (ap, bp) = idx.block_degrees(l, Block::Prime);
    let (add, bdd) = idx.block_degrees(l, Block::DoublePrime);
    let (at, bt) = idx.block_degrees(l, Block::TriplePrime);
    if idx.a != 0 || at != 0 || bt != 0 {
        return ResonanceClass::EffNonres;
    }
    if add == 0 && bdd == 0 && bp == 1 {
        return ResonanceClass::EffR1;
    }
    if ap == 0 && bp == 0 {
        return ResonanceClass::EffR2;
    }
    ResonanceClass::EffNonres
}

/// Classifies an index; `Nonresonant` indices are rejected with `NotResonant`.
pub fn classify_resonance_for<T: Scalar>(idx: &Exponents, model: &ModelQuadratic<T>, tol: f64) -> Result<ResonanceClass> {
    if idx.dim() != model.layout().dim() {
        return Err(Error::LayoutMismatch);
    }
    if !model.is_resonant(idx, tol) {
        return Err(Error::NotResonant(idx.to_string()));
    }
    Ok(structural_class(idx, model))
}

pub fn classify_resonance<T: Scalar>(idx: &Exponents, rp: &RadialPoint<T>, tol: f64) -> Result<ResonanceClass> {
    classify_resonance_for(idx, &rp.model()?, tol)
}

/// Class of any index: `Nonresonant` when `R` does not vanish.
pub fn class_of<T: Scalar>(idx: &Exponents, model: &ModelQuadratic<T>, tol: f64) -> ResonanceClass {
    if model.is_resonant(idx, tol) {
        structural_class(idx, model)
    } else {
        ResonanceClass::Nonresonant
    }
}

/// Entry of the second index set: `sum r'' alpha'' + (1 - r'') beta''` in `(1, 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondIndex<T: Scalar> {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub value: T,
}

/// The finite set `J''` for the `y''` block of `rp`.
pub fn second_index_set<T: Scalar>(rp: &RadialPoint<T>, tol: f64) -> Result<Vec<SecondIndex<T>>> {
    rp.ensure_regular()?;
    let r: Vec<T> = rp.r_in(Block::DoublePrime).into_iter().map(|c| c.re).collect();
    Ok(second_index_set_for(&r, tol))
}

pub fn second_index_set_for<T: Scalar>(r: &[T], tol: f64) -> Vec<SecondIndex<T>> {
    let k = r.len();
    if k == 0 {
        return Vec::new();
    }
    let min_r = r.iter().cloned().fold(r[0].clone(), |m, x| if x < m { x } else { m });
    let bound = (2.0 / min_r.as_f64()).floor() as u32;
    let one = T::one();
    let two = T::from_u8(2).unwrap();
    let mut out = Vec::new();
    for v in bounded_multiindices(2 * k, bound) {
        let (alpha, beta) = v.split_at(k);
        let mut s = T::zero();
        for j in 0..k {
            s = s + r[j].clone() * from_u32::<T>(alpha[j]) + (one.clone() - r[j].clone()) * from_u32::<T>(beta[j]);
        }
        let lo = s.clone() - one.clone();
        let hi = two.clone() - s.clone();
        if lo.is_positive() && !lo.approx_zero(tol) && hi.is_positive() && !hi.approx_zero(tol) {
            out.push(SecondIndex { alpha: alpha.to_vec(), beta: beta.to_vec(), value: s });
        }
    }
    out
}
