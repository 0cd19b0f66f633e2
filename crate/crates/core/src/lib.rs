//! Radial-point analysis for order-zero potentials: weighted normal forms,
//! resonances, boundary bicharacteristic dynamics, expansion templates and
//! stationary-phase checks.

pub mod dynamics;
pub mod error;
pub mod expansion;
pub mod normalform;
pub mod oscverify;
pub mod ode;
pub mod poly;
pub mod radial;
pub mod resonance;
pub mod scalar;
pub mod symalg;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Complex number over a scalar field.
pub type Complex<T> = num_complex::Complex<T>;
pub type ExactPolynomial = symalg::WeightedPolynomial<Rational>;
pub type FloatPolynomial = symalg::WeightedPolynomial<f64>;
pub type ExactModel = symalg::ModelQuadratic<Rational>;
pub type FloatModel = symalg::ModelQuadratic<f64>;
