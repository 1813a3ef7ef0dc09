//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("{qubits} qubits exceed the dense-backend cap of {max} (4^n memory wall)")]
    TooManyQubits { qubits: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("net too large: {size} members exceed the cap of {cap}; coarsen the grid step or lower beta/accuracy")]
    NetTooLarge { size: u128, cap: u128 },

    #[error("insufficient copies: {copies} copies cannot fill {batches} median-of-means batches")]
    InsufficientCopies { copies: u64, batches: u32 },

    #[error("hamiltonian parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
