use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("band limit exceeded: {what} needs degree {needed}, grid supports {supported}")]
    BandLimit {
        what: String,
        needed: usize,
        supported: usize,
    },

    #[error("symbol table does not cover representation {0}")]
    Coverage(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("point {z} lies outside the sector")]
    OutsideSector { z: Complex64 },

    #[error("singular resolvent at representation {label}, z = {z}")]
    SingularResolvent { label: String, z: Complex64 },

    #[error("contour node {node} is within {distance:e} of the spectrum (need >= {required:e})")]
    ResolventProximity {
        node: Complex64,
        distance: f64,
        required: f64,
    },

    #[error("unsupported exponent {0}: contour powers need Re z < 0")]
    UnsupportedExponent(Complex64),

    #[error("singular power: zero eigenvalue at {label} with Re z = {re} < 0")]
    SingularPower { label: String, re: f64 },

    #[error("cannot fit envelope: non-positive value {value:e} at lambda = {lambda}")]
    Unfittable { lambda: f64, value: f64 },

    #[error("unsupported derivative order {0}")]
    UnsupportedOrder(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("argument {t} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("magnitude overflow: lambda * t = {0}")]
    Magnitude(f64),

    #[error("time grid is not mirrored about t = 0")]
    GridSymmetry,

    #[error("gramian condition {cond:e} exceeds {limit:e}; use a smaller subspace or a longer horizon")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("terminal residual {residual:e} above tolerance {tol:e}")]
    Convergence { residual: f64, tol: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
