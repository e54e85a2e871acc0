use thiserror::Error;

use crate::phase::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A material parameter, amplitude or numeric setting is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A pole, time or volume fraction lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The phase models do not form a pair for which closed-form kernels exist.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("degenerate contrast: the two phases have equal Laplace moduli at lambda = {lambda}")]
    DegenerateContrast { lambda: f64 },

    #[error("side mismatch: expected {expected:?} side, found {found:?}")]
    SideMismatch { expected: Side, found: Side },

    /// The microstructural information is internally inconsistent.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    /// Measured data cannot come from any admissible composite.
    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
