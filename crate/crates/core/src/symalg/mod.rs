//! Weighted-graded polynomial algebra with the rescaled bracket.

mod bracket;
mod layout;
mod model;
mod polynomial;
mod serial;

pub use bracket::{ad_exponential, bracket, legendre_field};
pub use layout::{bounded_multiindices, compositions, Block, Exponents, VariableLayout};
pub use model::{ModelQuadratic, QuadBlock};
pub use polynomial::{Var, WeightedPolynomial};
pub use serial::{PolynomialData, TermData};

use std::collections::BTreeMap;

use crate::scalar::Scalar;

/// Splits `p` into its weighted-homogeneous components.
pub fn grade_components<T: Scalar>(p: &WeightedPolynomial<T>) -> BTreeMap<i64, WeightedPolynomial<T>> {
    p.grade_components()
}

/// Eigenvalue `R_{a, alpha, beta}` of every eigen-monomial up to `max_grade`.
pub fn eigen_action_table<T: Scalar>(
    model: &ModelQuadratic<T>,
    max_grade: i64,
) -> BTreeMap<Exponents, num_complex::Complex<T>> {
    model.eigen_action_table(max_grade)
}
