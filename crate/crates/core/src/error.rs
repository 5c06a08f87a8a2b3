use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the analysis, design, and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("plant is not proper: numerator degree {num} exceeds denominator degree {den}")]
    NotProper { num: usize, den: usize },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("probe at omega = {omega} lies within {distance:e} of the pole at s = {pole}")]
    NearPole {
        omega: f64,
        pole: Complex64,
        distance: f64,
    },

    #[error("not IFP: {0}")]
    NotIfp(String),

    #[error(
        "first residue at d = {0} is not symmetric; add its transpose as a parallel \
         pre-compensator (symmetrize_residue) before designing"
    )]
    AsymmetricResidue(Complex64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Laplacian is not weight-balanced (max |row/column sum| = {0:e})")]
    Unbalanced(f64),

    #[error("zero is not a simple eigenvalue of the Laplacian ({0} eigenvalues near zero)")]
    ZeroNotSimple(usize),

    #[error("not well-posed: I + (sigma L (x) I) D is singular (condition number {cond:e})")]
    NotWellPosed { cond: f64 },

    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
