use num_complex::Complex64;
use thiserror::Error;

use crate::farey::FareySlope;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a valid cusp parameter: {0} (imaginary part must be positive)")]
    InvalidCuspParameter(Complex64),

    #[error("invalid slope {p}/{q}")]
    InvalidSlope { p: i64, q: i64 },

    #[error("root slope has no parents: {0}")]
    RootSlope(FareySlope),

    #[error("constant trace 2, not polynomial in z")]
    ConstantTrace,

    #[error("slope {slope} exceeds the symbolic denominator cap {cap}")]
    DenominatorTooLarge { slope: FareySlope, cap: i64 },

    #[error("polynomial has degree 0")]
    ConstantPolynomial,

    #[error("root solver did not converge after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        estimates: Vec<Complex64>,
    },

    #[error("no boundary representative found for slope {slope}")]
    NoBoundaryRepresentative { slope: FareySlope, roots: Vec<Complex64> },

    #[error("base point not certified in M+: {0}")]
    BaseNotInside(Complex64),

    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),

    #[error("no rectangle found within search budget")]
    NoRectangle { profile: Vec<(f64, f64)> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
