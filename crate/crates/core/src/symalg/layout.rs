use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the three coordinate blocks an index belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    /// `y'`: real negative `r`.
    Prime,
    /// `y''`: real `r` in `(0, 1/2]`.
    DoublePrime,
    /// `y'''`: complex `r` with real part one half.
    TriplePrime,
}

/// Dimension of `X` and the split of the boundary indices `1..n-1` into
/// `y' = 1..s-1`, `y'' = s..m-1`, `y''' = m..n-1`.
///
/// Indices are stored 0-based in all slices; `s` and `m` keep their
/// 1-based meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableLayout {
    n: usize,
    s: usize,
    m: usize,
}

impl VariableLayout {
    pub fn new(n: usize, s: usize, m: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("dimension n = {n} must be at least 2")));
        }
        if !(1 <= s && s <= m && m <= n) {
            return Err(Error::InvalidInput(format!(
                "block bounds must satisfy 1 <= s <= m <= n, got s = {s}, m = {m}, n = {n}"
            )));
        }
        Ok(Self { n, s, m })
    }

    /// Layout with all `n - 1` indices in the `y''` block.
    pub fn all_double_prime(n: usize) -> Result<Self> {
        Self::new(n, 1, n)
    }

    pub fn from_block_sizes(prime: usize, double_prime: usize, triple_prime: usize) -> Result<Self> {
        let n = prime + double_prime + triple_prime + 1;
        Self::new(n, prime + 1, prime + double_prime + 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of `y` (equivalently `mu`) variables.
    pub fn dim(&self) -> usize {
        self.n - 1
    }

    pub fn prime(&self) -> Range<usize> {
        0..self.s - 1
    }
    pub fn double_prime(&self) -> Range<usize> {
        self.s - 1..self.m - 1
    }
    pub fn triple_prime(&self) -> Range<usize> {
        self.m - 1..self.n - 1
    }

    pub fn block_of(&self, j: usize) -> Block {
        if j < self.s - 1 {
            Block::Prime
        } else if j < self.m - 1 {
            Block::DoublePrime
        } else {
            Block::TriplePrime
        }
    }
}

/// Exponent triple `(a, alpha, beta)` of the monomial `nu^a y^alpha mu^beta`.
///
/// Ordered canonically by grade, then `a`, then `alpha` and `beta`
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Exponents {
    pub a: u32,
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl Exponents {
    pub fn new(a: u32, alpha: Vec<u32>, beta: Vec<u32>) -> Self {
        debug_assert_eq!(alpha.len(), beta.len());
        Self { a, alpha, beta }
    }

    pub fn zero(dim: usize) -> Self {
        Self { a: 0, alpha: vec![0; dim], beta: vec![0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Weighted degree `2a + |alpha| + |beta|`.
    pub fn weight(&self) -> u32 {
        2 * self.a + self.alpha.iter().sum::<u32>() + self.beta.iter().sum::<u32>()
    }

    /// Grade `weight - 2`; the model quadratic sits in grade 0.
    pub fn grade(&self) -> i64 {
        self.weight() as i64 - 2
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            a: self.a + other.a,
            alpha: self.alpha.iter().zip(&other.alpha).map(|(x, y)| x + y).collect(),
            beta: self.beta.iter().zip(&other.beta).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn alpha_abs(&self) -> u32 {
        self.alpha.iter().sum()
    }
    pub fn beta_abs(&self) -> u32 {
        self.beta.iter().sum()
    }

    fn sum_over(v: &[u32], r: Range<usize>) -> u32 {
        v[r].iter().sum()
    }

    /// `(|alpha|, |beta|)` restricted to one block.
    pub fn block_degrees(&self, layout: &VariableLayout, block: Block) -> (u32, u32) {
        let r = match block {
            Block::Prime => layout.prime(),
            Block::DoublePrime => layout.double_prime(),
            Block::TriplePrime => layout.triple_prime(),
        };
        (Self::sum_over(&self.alpha, r.clone()), Self::sum_over(&self.beta, r))
    }

    /// Every exponent triple of the given weighted degree, in canonical order.
    pub fn all_of_weight(dim: usize, weight: u32) -> Vec<Self> {
        let mut out = Vec::new();
        for a in 0..=weight / 2 {
            let rest = weight - 2 * a;
            for vec in compositions(2 * dim, rest) {
                out.push(Self {
                    a,
                    alpha: vec[..dim].to_vec(),
                    beta: vec[dim..].to_vec(),
                });
            }
        }
        out.sort();
        out
    }

    /// All triples with weight in `lo..=hi`.
    pub fn all_in_weights(dim: usize, lo: u32, hi: u32) -> Vec<Self> {
        (lo..=hi).flat_map(|w| Self::all_of_weight(dim, w)).collect()
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then(self.a.cmp(&other.a))
            .then_with(|| self.alpha.cmp(&other.alpha))
            .then_with(|| self.beta.cmp(&other.beta))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?}, {:?})", self.a, self.alpha, self.beta)
    }
}

/// All vectors of `len` nonnegative integers summing to `total`.
pub fn compositions(len: usize, total: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; len];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    if len == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// All vectors of `len` nonnegative integers with sum at most `max_total`.
pub fn bounded_multiindices(len: usize, max_total: u32) -> Vec<Vec<u32>> {
    (0..=max_total).flat_map(|t| compositions(len, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_ranges_partition_indices() {
        let l = VariableLayout::new(6, 2, 4).unwrap();
        assert_eq!(l.prime(), 0..1);
        assert_eq!(l.double_prime(), 1..3);
        assert_eq!(l.triple_prime(), 3..5);
        assert_eq!(l.block_of(0), Block::Prime);
        assert_eq!(l.block_of(2), Block::DoublePrime);
        assert_eq!(l.block_of(4), Block::TriplePrime);
        assert!(VariableLayout::new(3, 3, 2).is_err());
        assert!(VariableLayout::new(1, 1, 1).is_err());
    }

    #[test]
    fn weights_and_grades() {
        let e = Exponents::new(1, vec![2], vec![1]);
        assert_eq!(e.weight(), 5);
        assert_eq!(e.grade(), 3);
        assert_eq!(Exponents::zero(2).grade(), -2);
    }

    #[test]
    fn enumeration_counts() {
        // weight 2 in one variable pair: nu, y^2, y mu, mu^2
        assert_eq!(Exponents::all_of_weight(1, 2).len(), 4);
        let all = Exponents::all_of_weight(2, 3);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|e| e.weight() == 3));
        assert_eq!(compositions(3, 2).len(), 6);
    }
}
