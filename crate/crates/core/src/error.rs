use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} requires at most {limit} qubits, got {requested}")]
    QubitBudget { what: &'static str, limit: usize, requested: usize },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("state is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("observable must be traceless (trace {trace:e})")]
    NotTraceless { trace: f64 },

    #[error("N = {total} is not divisible by R*K = {reuse}*{batches}")]
    Divisibility { total: usize, reuse: usize, batches: usize },

    #[error("{len} values cannot be split into {batches} equal batches")]
    BatchSplit { len: usize, batches: usize },

    #[error("Gram matrix is singular for t = {t}, n = {n}")]
    Singular { t: usize, n: usize },

    #[error("Clifford state averages require a stabilizer input state")]
    NonStabilizerInput,

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed circuit descriptor: {0}")]
    Descriptor(String),

    #[error("malformed Pauli string: {0}")]
    PauliParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_qubits(what: &'static str, requested: usize, limit: usize) -> Result<()> {
    if requested > limit {
        Err(Error::QubitBudget { what, limit, requested })
    } else {
        Ok(())
    }
}
