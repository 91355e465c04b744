use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subsystem dimension {0} is invalid (each subsystem needs dimension >= 2)")]
    BadSubsystemDim(usize),
    #[error("matrix is not Hermitian: max |M - M^dag| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace mismatch: trace {trace} deviates from 1 by {deviation:e}")]
    TraceMismatch { trace: f64, deviation: f64 },
    #[error("state vector is not normalized: |norm^2 - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),
    #[error("partial trace must keep at least one subsystem")]
    EmptyKeep,
    #[error("partial trace keeps every subsystem; use the state itself")]
    FullKeep,
    #[error("subsystem index {index} out of range for {parties} parties")]
    IndexOutOfRange { index: usize, parties: usize },
    #[error("rank {rank} is invalid for total dimension {dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("need at least 2 parties, got {0}")]
    TooFewParties(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("basis is not orthonormal: max |<b_i|b_j> - delta_ij| = {defect:e}")]
    NotOrthonormal { defect: f64 },
    #[error("operation needs exactly 2 parties, state has {0}")]
    NotBipartite(usize),
    #[error("D_p exponent must satisfy p >= 1, got {0}")]
    BadExponent(f64),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown zoo state '{0}'")]
    UnknownName(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("report minima are inconsistent: {0}")]
    Inconsistent(String),
    #[error("validation failed: {0}")]
    Validation(Box<Error>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that mean "input is not a valid state/basis" rather
    /// than a malformed request.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::NotHermitian { .. }
                | Error::NotPositive { .. }
                | Error::TraceMismatch { .. }
                | Error::NotNormalized { .. }
                | Error::NotOrthonormal { .. }
        )
    }
}
