use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis not converged: {0}")]
    BasisNotConverged(String),

    #[error("Floquet matrix dimension {dim} exceeds cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("branch tracking ambiguous near A = {amplitude:e}: {detail}")]
    AmbiguousBranch { amplitude: f64, detail: String },

    #[error("replica truncation not converged: {0}")]
    ReplicaNotConverged(String),

    #[error("finite difference unstable: {0}")]
    DerivativeUnstable(String),

    #[error("near resonance: {0}")]
    NearResonance(String),

    #[error("oracle diagnostics failed: {0}")]
    OracleDiagnostics(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
