use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::{normalized_coefficients, reduce_keeping};
use crate::error::{Error, Result};
use crate::radial::{linearization_spectrum, CriticalPointSpec, Sign};
use crate::resonance::{enumerate_resonances_for, scan_effectively_resonant_energies, ResonanceClass, RootKind, ScanOptions};
use crate::symalg::{Block, Exponents, ModelQuadratic, VariableLayout, WeightedPolynomial};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyOptions {
    pub sign: Sign,
    pub max_grade: i64,
    pub grid_size: usize,
    pub tol: f64,
    pub scan: ScanOptions,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self { sign: Sign::Plus, max_grade: 4, grid_size: 41, tol: 1e-12, scan: ScanOptions::default() }
    }
}

/// Divided-difference summary of one coefficient curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessEntry {
    pub idx: Exponents,
    #[serde(rename = "maxAbs")]
    pub max_abs: f64,
    #[serde(rename = "maxFirstDifference")]
    pub max_first_difference: f64,
    #[serde(rename = "maxSecondDifference")]
    pub max_second_difference: f64,
}

/// Normal-form coefficients `c_{a alpha beta}(sigma)` on a fixed index set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCoefficients {
    #[serde(rename = "sigmaGrid")]
    pub sigma_grid: Vec<f64>,
    /// The index set `I'` kept at every energy.
    #[serde(rename = "fixedIndexSet")]
    pub fixed_index_set: Vec<Exponents>,
    /// Indices of `I'` whose coefficient is nonzero somewhere on the grid.
    pub active: Vec<Exponents>,
    /// `coeffs[i][k]`: coefficient of `active[k]` at `sigma_grid[i]`.
    pub coeffs: Vec<Vec<Complex<f64>>>,
    pub smoothness: Vec<SmoothnessEntry>,
}

/// `sum alpha'' r'' + beta'' (1 - r'')` of an index.
fn s_double(e: &Exponents, layout: &VariableLayout, r: &[Complex<f64>]) -> f64 {
    layout
        .double_prime()
        .map(|j| e.alpha[j] as f64 * r[j].re + e.beta[j] as f64 * (1.0 - r[j].re))
        .sum()
}

/// The complement of `I'` consists of the removable indices; everything else
/// of weight `3..=max_weight` is kept.
pub fn fixed_index_set(layout: &VariableLayout, r_grid: &[Vec<Complex<f64>>], max_weight: u32) -> Vec<Exponents> {
    Exponents::all_in_weights(layout.dim(), 3, max_weight)
        .into_iter()
        .filter(|e| !in_complement(e, layout, r_grid))
        .collect()
}

fn in_complement(e: &Exponents, layout: &VariableLayout, r_grid: &[Vec<Complex<f64>>]) -> bool {
    let (_, bp) = e.block_degrees(layout, Block::Prime);
    let (add, bdd) = e.block_degrees(layout, Block::DoublePrime);
    let (at, bt) = e.block_degrees(layout, Block::TriplePrime);
    let case1 = e.a + bp == 1 && add == 0 && bdd == 0 && at == 0 && bt == 0;
    let case2 = at >= 1 && bt == 0;
    let case3 = bt >= 1 && at == 0;
    let case4 = e.a == 0 && bp == 0 && at + bt == 2 && add == 0 && bdd == 0;
    let case5 = e.a == 0
        && bp == 0
        && at == 0
        && bt == 0
        && !r_grid.is_empty()
        && r_grid.iter().all(|r| s_double(e, layout, r) < 1.0);
    case1 || case2 || case3 || case4 || case5
}

fn sigma_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Normal forms along `sigma` in `[lo, hi]` with one index set `I'` for the
/// whole interval. `symbol(sigma, model)` supplies the full symbol at each energy.
pub fn family_normal_form<F>(
    cp: &CriticalPointSpec<f64>,
    interval: (f64, f64),
    options: &FamilyOptions,
    symbol: F,
) -> Result<FamilyCoefficients>
where
    F: Fn(f64, &ModelQuadratic<f64>) -> Result<WeightedPolynomial<f64>> + Sync,
{
    let (lo, hi) = interval;
    if lo < hi {
        let scan = scan_effectively_resonant_energies(cp, interval, options.sign, options.scan)?;
        if let Some(root) = scan.roots.first() {
            let kind = match &root.kind {
                RootKind::EffRes { witness } => format!("effectively resonant, witness {witness}"),
                RootKind::Threshold { hessian_index } => format!("Hessian threshold of eigenvalue {}", hessian_index + 1),
            };
            return Err(Error::ForbiddenEnergy { sigma: root.sigma, kind });
        }
    } else if lo > hi {
        return Err(Error::InvalidInterval { lo, hi, reason: "bounds must be increasing".into() });
    }

    let grid = sigma_grid(lo, hi, options.grid_size);
    let models: Vec<ModelQuadratic<f64>> = grid
        .iter()
        .map(|s| linearization_spectrum(cp, s, options.sign).and_then(|rp| rp.model()))
        .collect::<Result<_>>()?;
    let layout = *models[0].layout();
    if models.iter().any(|m| m.layout() != &layout) {
        return Err(Error::InvalidInput("block structure changes inside the interval".into()));
    }
    let max_weight = (options.max_grade + 2) as u32;
    let r_grid: Vec<Vec<Complex<f64>>> = models.iter().map(|m| m.r().to_vec()).collect();
    let kept = fixed_index_set(&layout, &r_grid, max_weight);
    let kept_set: BTreeSet<Exponents> = kept.iter().cloned().collect();

    let per_sigma: Vec<BTreeMap<Exponents, Complex<f64>>> = grid
        .par_iter()
        .zip(models.par_iter())
        .map(|(&sigma, model)| -> Result<BTreeMap<Exponents, Complex<f64>>> {
            for rec in enumerate_resonances_for(model, max_weight.max(3), options.tol)? {
                if !kept_set.contains(&rec.idx) {
                    return Err(Error::ForbiddenEnergy {
                        sigma,
                        kind: format!("resonant index {} outside the fixed set", rec.idx),
                    });
                }
                if rec.class != ResonanceClass::EffNonres && lo == hi {
                    return Err(Error::ForbiddenEnergy { sigma, kind: format!("effectively resonant, witness {}", rec.idx) });
                }
            }
            let p = symbol(sigma, model)?;
            let nf = reduce_keeping(&p, model, options.max_grade, options.tol, |e| kept_set.contains(e))?;
            Ok(normalized_coefficients(&nf.p_norm, model)?.into_iter().collect())
        })
        .collect::<Result<_>>()?;

    let active: Vec<Exponents> = kept
        .iter()
        .filter(|e| per_sigma.iter().any(|m| m.get(*e).is_some_and(|c| c.norm() > options.tol)))
        .cloned()
        .collect();
    let coeffs: Vec<Vec<Complex<f64>>> = per_sigma
        .iter()
        .map(|m| active.iter().map(|e| m.get(e).copied().unwrap_or_default()).collect())
        .collect();
    let smoothness = active
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let curve: Vec<Complex<f64>> = coeffs.iter().map(|row| row[k]).collect();
            smoothness_entry(e.clone(), &grid, &curve)
        })
        .collect();
    Ok(FamilyCoefficients { sigma_grid: grid, fixed_index_set: kept, active, coeffs, smoothness })
}

fn smoothness_entry(idx: Exponents, grid: &[f64], curve: &[Complex<f64>]) -> SmoothnessEntry {
    let max_abs = curve.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let first: Vec<Complex<f64>> = (1..curve.len())
        .map(|i| (curve[i] - curve[i - 1]) / (grid[i] - grid[i - 1]))
        .collect();
    let second: Vec<Complex<f64>> = (1..first.len())
        .map(|i| (first[i] - first[i - 1]) / (0.5 * (grid[i + 1] - grid[i - 1])))
        .collect();
    SmoothnessEntry {
        idx,
        max_abs,
        max_first_difference: first.iter().map(|c| c.norm()).fold(0.0, f64::max),
        max_second_difference: second.iter().map(|c| c.norm()).fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalform::reduce_to_normal_form;

    fn cubic(model: &ModelQuadratic<f64>) -> WeightedPolynomial<f64> {
        let y = WeightedPolynomial::y(*model.layout(), 0);
        &model.p0() + &y.pow(3)
    }

    #[test]
    fn nonresonant_interval_has_zero_coefficients() {
        let cp = CriticalPointSpec::new("min", 0.0, vec![0.3]).unwrap();
        let opts = FamilyOptions { grid_size: 7, ..Default::default() };
        let fam = family_normal_form(&cp, (0.82, 0.92), &opts, |_, m| Ok(m.p0())).unwrap();
        assert!(fam.active.is_empty());
        assert!(!fam.fixed_index_set.is_empty());
    }

    #[test]
    fn non_effective_resonance_gives_continuous_curve() {
        // r = -1 at sigma = 1 for Hessian -4; nu y^2 mu is resonant there only
        let cp = CriticalPointSpec::new("max", 0.0, vec![-4.0]).unwrap();
        let opts = FamilyOptions { grid_size: 21, max_grade: 3, ..Default::default() };
        let fam = family_normal_form(&cp, (0.8, 1.2), &opts, |_, m| {
            let l = *m.layout();
            let t = &(&WeightedPolynomial::nu(l) * &WeightedPolynomial::y(l, 0).pow(2)) * &WeightedPolynomial::mu(l, 0);
            Ok(&m.p0() + &t)
        })
        .unwrap();
        let target = Exponents::new(1, vec![2], vec![1]);
        let k = fam.active.iter().position(|e| *e == target).unwrap();
        assert!(fam.coeffs.iter().all(|row| row[k].norm() > 1e-3));
        assert!(fam.smoothness[k].max_second_difference.is_finite());
        assert!(fam.smoothness[k].max_first_difference < 10.0);
    }

    #[test]
    fn single_point_matches_full_reduction() {
        let cp = CriticalPointSpec::new("min", 0.0, vec![3.0 / 8.0]).unwrap();
        let opts = FamilyOptions { grid_size: 1, ..Default::default() };
        let fam = family_normal_form(&cp, (1.1, 1.1), &opts, |_, m| Ok(cubic(m))).unwrap();
        let rp = linearization_spectrum(&cp, &1.1, Sign::Plus).unwrap();
        let m = rp.model().unwrap();
        let nf = reduce_to_normal_form(&cubic(&m), &m, 4, 1e-12).unwrap();
        assert!((&nf.p_norm - &m.p0()).prune(1e-12).is_zero());
        assert!(fam.active.is_empty());
        assert_eq!(fam.sigma_grid, vec![1.1]);
    }

    #[test]
    fn forbidden_interval_is_refused() {
        let cp = CriticalPointSpec::new("saddle", 0.0, vec![-12.0, -4.0]).unwrap();
        let err = family_normal_form(&cp, (0.5, 2.0), &FamilyOptions::default(), |_, m| Ok(m.p0())).unwrap_err();
        match err {
            Error::ForbiddenEnergy { sigma, .. } => assert!((sigma - 1.0).abs() < 1e-8),
            other => panic!("unexpected {other:?}"),
        }
    }
}
