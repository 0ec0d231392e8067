//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode label collision: {0:?}")]
    ModeCollision(String),

    #[error("unknown mode label: {0:?}")]
    UnknownMode(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operators live on different mode systems")]
    SystemMismatch,

    #[error("operator is not Hermitian: max asymmetry {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("density operator trace {trace:.12} is not 1")]
    BadTrace { trace: f64 },

    #[error("state norm {norm:.12} is not 1")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("POM set is incomplete: max deviation from identity {deviation:.3e}")]
    IncompletePom { deviation: f64 },

    #[error("POM element outside the span of the reference set: residual {residual:.3e}")]
    ExpansionResidual { residual: f64 },

    #[error("impossible outcome: click probability {probability:.3e} below threshold")]
    ImpossibleOutcome { probability: f64 },

    #[error("fidelity chain violated: F_r={f_r:.12}, F_c={f_c:.12}, F_o={f_o:.12}")]
    ChainViolation { f_r: f64, f_c: f64, f_o: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}
