use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A symmetric pivot showed the matrix is not positive semidefinite.
    #[error("matrix is not positive semidefinite (violating pivot at index {index})")]
    IndefinitePivot { index: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is not positive semidefinite")]
    NotPsd,

    #[error("affine constraints are inconsistent")]
    InfeasibleProjection,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("invalid rational literal {0:?}")]
    ParseRational(String),

    /// A combination vector has no support outside the rows already in staircase form.
    #[error("combination has no support beyond the first {fixed} equations")]
    DegenerateCombo { fixed: usize },

    #[error("exact validation failed: {0}")]
    ExactValidation(String),

    #[error("invalid instance: {0}")]
    InvalidSystem(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("could not build an instance after {attempts} attempts")]
    ResampleExhausted { attempts: usize },

    #[error("weak infeasibility could not be confirmed")]
    WeaknessUnconfirmed,

    #[error("numerical failure: {0}")]
    NumericFailure(String),
}
