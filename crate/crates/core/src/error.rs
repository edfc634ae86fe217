use thiserror::Error;

/// Errors raised by the design, estimation and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("array model does not define polarization {0}")]
    MissingPolarization(crate::array::Polarization),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("basis vector has zero norm at the requested direction")]
    DegenerateDirection,

    #[error("basis matrix is rank deficient (rank {rank} < 4)")]
    RankDeficient { rank: usize },

    #[error("arrays do not satisfy the high-XPR condition at {threshold_db} dB")]
    XprPrecondition { threshold_db: f64 },

    #[error("path amplitude must be positive for amplitude/phase derivatives")]
    DegenerateAmplitude,

    #[error("Fisher information matrix is singular or ill-conditioned (condition {condition:.3e})")]
    SingularFim { condition: f64 },

    #[error("received signal is identically zero")]
    UndefinedEstimate,

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("SNR {0} dB is not part of the report")]
    UnknownSnr(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
