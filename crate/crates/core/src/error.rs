use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds {tol:.3e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has a negative eigenvalue {value:.3e} below -{tol:.3e}")]
    NegativeEigenvalue { value: f64, tol: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("weight formula produced invalid value {value} at index {index}")]
    BadWeight { index: usize, value: f64 },

    #[error("columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("vector is not in the range of the frame operator (residual {residual:.3e})")]
    OutOfRange { residual: f64 },

    #[error("restricted lower frame bound {lower:.3e} does not exceed {tol:.3e}")]
    LowerBoundTooSmall { lower: f64, tol: f64 },

    #[error("norm criterion requires the caller to assert the hypothesis class")]
    HypothesisNotAsserted,

    #[error("quadrature grid too coarse: {0}")]
    QuadratureUnderflow(String),

    #[error("unsupported realization: {0}")]
    UnsupportedRealization(String),

    #[error("vector norm {norm} is not 1")]
    NotUnitVector { norm: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

impl Error {
    /// Short stable name used in CLI diagnostics.
    pub fn invariant_name(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NegativeEigenvalue { .. } => "NegativeEigenvalue",
            Error::NonFinite { .. } => "NonFinite",
            Error::BadWeight { .. } => "BadWeight",
            Error::NotOrthonormal { .. } => "NotOrthonormal",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::LowerBoundTooSmall { .. } => "LowerBoundTooSmall",
            Error::HypothesisNotAsserted => "HypothesisNotAsserted",
            Error::QuadratureUnderflow(_) => "QuadratureUnderflow",
            Error::UnsupportedRealization(_) => "UnsupportedRealization",
            Error::NotUnitVector { .. } => "NotUnitVector",
            Error::InvalidMeasure(_) => "InvalidMeasure",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidLadder(_) => "InvalidLadder",
            Error::InvalidTolerance(_) => "InvalidTolerance",
        }
    }

    /// Errors that stem from malformed input rather than a numeric failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidMeasure(_)
                | Error::InvalidSpec(_)
                | Error::InvalidLadder(_)
                | Error::InvalidTolerance(_)
                | Error::BadWeight { .. }
                | Error::HypothesisNotAsserted
                | Error::UnsupportedRealization(_)
        )
    }
}
