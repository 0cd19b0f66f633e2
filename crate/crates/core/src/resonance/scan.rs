use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{hessian_thresholds, CriticalPointSpec, Sign};
use crate::symalg::{bounded_multiindices, compositions, Exponents};

/// Grid density and bisection tolerance for the energy scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub grid: usize,
    pub bisection_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { grid: 10_000, bisection_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum RootKind {
    #[serde(rename = "effres")]
    EffRes { witness: Exponents },
    #[serde(rename = "threshold")]
    Threshold {
        #[serde(rename = "hessianIndex")]
        hessian_index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRoot {
    pub sigma: f64,
    #[serde(flatten)]
    pub kind: RootKind,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyScanResult {
    pub interval: [f64; 2],
    pub sign: Sign,
    pub options: ScanOptions,
    pub roots: Vec<ScanRoot>,
    /// Smallest distance between distinct reported energies.
    #[serde(rename = "minGap")]
    pub min_gap: Option<f64>,
}

impl EnergyScanResult {
    pub fn effectively_resonant(&self) -> impl Iterator<Item = (&f64, &Exponents)> {
        self.roots.iter().filter_map(|r| match &r.kind {
            RootKind::EffRes { witness } => Some((&r.sigma, witness)),
            RootKind::Threshold { .. } => None,
        })
    }

    pub fn thresholds(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().filter(|r| matches!(r.kind, RootKind::Threshold { .. })).map(|r| r.sigma)
    }

    /// All forbidden energies, ascending and without repeats.
    pub fn energies(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.roots.iter().map(|r| r.sigma).collect();
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        out
    }
}

/// Resonance functions whose zeros are effectively resonant energies.
#[derive(Debug, Clone)]
enum Family {
    /// `sum_j alpha_j r'_j - r'_k` (sorted indices of the `y'` block).
    First { alpha: Vec<u32>, k: usize },
    /// `sum alpha_j r''_j + beta_j (1 - r''_j) - 1` over the given sorted indices.
    Second { idx: Vec<usize>, alpha: Vec<u32>, beta: Vec<u32> },
}

struct Setup {
    v0: f64,
    /// `a_j` in ascending order.
    a: Vec<f64>,
    n_prime: usize,
}

impl Setup {
    fn r(&self, j: usize, sigma: f64) -> f64 {
        0.5 - (0.25 - self.a[j] / (sigma - self.v0)).sqrt()
    }

    fn eval(&self, f: &Family, sigma: f64) -> f64 {
        match f {
            Family::First { alpha, k } => {
                alpha.iter().enumerate().map(|(j, &c)| c as f64 * self.r(j, sigma)).sum::<f64>() - self.r(*k, sigma)
            }
            Family::Second { idx, alpha, beta } => {
                let mut s = -1.0;
                for (t, &j) in idx.iter().enumerate() {
                    let r = self.r(j, sigma);
                    s += alpha[t] as f64 * r + beta[t] as f64 * (1.0 - r);
                }
                s
            }
        }
    }

    fn witness(&self, f: &Family) -> Exponents {
        let d = self.a.len();
        let mut e = Exponents::zero(d);
        match f {
            Family::First { alpha, k } => {
                e.alpha[..alpha.len()].copy_from_slice(alpha);
                e.beta[*k] = 1;
            }
            Family::Second { idx, alpha, beta } => {
                for (t, &j) in idx.iter().enumerate() {
                    e.alpha[j] = alpha[t];
                    e.beta[j] = beta[t];
                }
            }
        }
        e
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn families(setup: &Setup, lo: f64, hi: f64, points: &[f64]) -> Vec<Family> {
    let mut out = Vec::new();
    let p = setup.n_prime;
    if p > 0 {
        let ratio = points
            .iter()
            .map(|&s| {
                let rs: Vec<f64> = (0..p).map(|j| setup.r(j, s).abs()).collect();
                rs.iter().cloned().fold(0.0, f64::max) / rs.iter().cloned().fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        let bound = ratio.floor() as u32;
        for k in 0..p {
            for total in 2..=bound {
                for alpha in compositions(p, total) {
                    if alpha[k] == 0 {
                        out.push(Family::First { alpha, k });
                    }
                }
            }
        }
    }
    let mid = 0.5 * (lo + hi);
    let idx: Vec<usize> = (p..setup.a.len()).filter(|&j| 4.0 * setup.a[j] < mid - setup.v0).collect();
    if !idx.is_empty() {
        let min_r = points
            .iter()
            .flat_map(|&s| idx.iter().map(move |&j| (j, s)))
            .map(|(j, s)| setup.r(j, s))
            .fold(f64::INFINITY, f64::min);
        let bound = (1.0 / min_r).floor() as u32;
        let d = idx.len();
        let mut betas = vec![vec![0u32; d]];
        for j in 0..d {
            let mut b = vec![0u32; d];
            b[j] = 1;
            betas.push(b);
        }
        for beta in &betas {
            let nb: u32 = beta.iter().sum();
            for alpha in bounded_multiindices(d, bound) {
                if alpha.iter().sum::<u32>() + nb >= 3 {
                    out.push(Family::Second { idx: idx.clone(), alpha, beta: beta.clone() });
                }
            }
        }
    }
    out
}

fn bisect(setup: &Setup, f: &Family, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = setup.eval(f, a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = setup.eval(f, m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Effectively resonant energies and Hessian thresholds of `cp` in `[lo, hi]`.
pub fn scan_effectively_resonant_energies(
    cp: &CriticalPointSpec<f64>,
    interval: (f64, f64),
    sign: Sign,
    options: ScanOptions,
) -> Result<EnergyScanResult> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInterval { lo, hi, reason: "bounds must be finite and increasing".into() });
    }
    if lo <= cp.value {
        return Err(Error::InvalidInterval {
            lo,
            hi,
            reason: format!("interval must lie above the critical value {}", cp.value),
        });
    }
    let mut order: Vec<usize> = (0..cp.hessian.len()).collect();
    order.sort_by(|&i, &j| cp.hessian[i].total_cmp(&cp.hessian[j]));
    let setup = Setup {
        v0: cp.value,
        a: order.iter().map(|&i| cp.hessian[i] / 2.0).collect(),
        n_prime: cp.morse_index(),
    };

    let mut roots = Vec::new();
    let mut cuts = vec![lo];
    for (i, h) in cp.hessian.iter().enumerate() {
        if *h > 0.0 {
            let t = cp.value + 2.0 * h;
            if t >= lo && t <= hi {
                roots.push(ScanRoot { sigma: t, kind: RootKind::Threshold { hessian_index: i }, residual: 0.0 });
            }
        }
    }
    for t in hessian_thresholds(cp) {
        if t > lo && t < hi {
            cuts.push(t);
        }
    }
    cuts.push(hi);
    cuts.dedup();

    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let points = grid(a, b, options.grid);
        let fams = families(&setup, a, b, &points);
        let found: Vec<ScanRoot> = fams
            .par_iter()
            .flat_map_iter(|f| {
                let vals: Vec<f64> = points.iter().map(|&s| setup.eval(f, s)).collect();
                let mut hits = Vec::new();
                for i in 0..points.len() {
                    if vals[i] == 0.0 {
                        hits.push(points[i]);
                    } else if i + 1 < points.len() && vals[i + 1] != 0.0 && (vals[i] < 0.0) != (vals[i + 1] < 0.0) {
                        hits.push(bisect(&setup, f, points[i], points[i + 1], options.bisection_tol));
                    }
                }
                let witness = setup.witness(f);
                hits.into_iter()
                    .map(|s| ScanRoot {
                        sigma: s,
                        kind: RootKind::EffRes { witness: witness.clone() },
                        residual: setup.eval(f, s).abs(),
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        roots.extend(found);
    }

    roots.sort_by(|x, y| {
        x.sigma.total_cmp(&y.sigma).then_with(|| match (&x.kind, &y.kind) {
            (RootKind::Threshold { hessian_index: i }, RootKind::Threshold { hessian_index: j }) => i.cmp(j),
            (RootKind::Threshold { .. }, _) => std::cmp::Ordering::Less,
            (_, RootKind::Threshold { .. }) => std::cmp::Ordering::Greater,
            (RootKind::EffRes { witness: a }, RootKind::EffRes { witness: b }) => a.cmp(b),
        })
    });
    roots.dedup_by(|x, y| x.kind == y.kind && (x.sigma - y.sigma).abs() < 1e-9);

    let mut result = EnergyScanResult { interval: [lo, hi], sign, options, roots, min_gap: None };
    let energies = result.energies();
    result.min_gap = energies.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
    Ok(result)
}
