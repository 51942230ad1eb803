use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: residual {residual:e} exceeds {tol:e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("Jacobi diagonalization did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("dimension {dim} exceeds the configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPsd { eigenvalue: f64 },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("Pauli terms have mixed lengths: expected {expected}, found {found}")]
    MixedArity { expected: usize, found: usize },
    #[error("probability {value} is outside [0, 1] ({context})")]
    BadProbability { value: f64, context: &'static str },
    #[error("qubit index {index} is outside 1..={count}")]
    BadIndex { index: usize, count: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("code space has no basis vectors")]
    EmptyCode,
    #[error("invalid code basis: {0}")]
    InvalidCode(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("code conditions violated: {0}")]
    ConditionsViolated(String),
    #[error("unsupported qubit count N = {0}")]
    BadN(usize),
    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },
    #[error("recovery acts on dimension {found}, protocol needs {expected}")]
    RecoveryDimensionMismatch { expected: usize, found: usize },
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures of numerical routines (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::NotPsd { .. } | Error::ConditionsViolated(_) | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
