use thiserror::Error;

/// Errors raised by the analysis core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomials live on different variable layouts")]
    LayoutMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("energy {sigma} does not exceed the critical value {value}: no real radial point")]
    NoRealRadialPoint { sigma: f64, value: f64 },
    #[error("Hessian threshold at energy {sigma}")]
    HessianThreshold { sigma: f64 },
    #[error("radial point is degenerate: {0}")]
    Degenerate(String),
    #[error("square root of {0} is not exact; use floating mode")]
    InexactRoot(String),
    #[error("grade-0 part of the symbol does not match the model quadratic")]
    ModelMismatch,
    #[error("multiindex {0} is not resonant")]
    NotResonant(String),
    #[error("invalid energy interval [{lo}, {hi}]: {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: String },
    #[error("interval contains a forbidden energy {sigma} ({kind})")]
    ForbiddenEnergy { sigma: f64, kind: String },
    #[error("energy {sigma} is a critical value of the potential")]
    ThresholdEnergy { sigma: f64 },
    #[error("oscillator is not elliptic after the tilde shift (pc - q~^2 = {0})")]
    DegenerateOscillator(f64),
    #[error("stationary point {sigma} lies outside the amplitude support")]
    NoStationaryPoint { sigma: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("cycle detected in the flow-out graph through node {0}")]
    Cycle(usize),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
