use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },
    #[error("mode index {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("dense oracle capped at {cap} qubits, requested {n}")]
    OracleCap { n: usize, cap: usize },
    #[error("{what} must be Hermitian: {detail}")]
    NonHermitian { what: &'static str, detail: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("exhaustive partition capped at {cap} terms, got {n}")]
    PartitionCap { n: usize, cap: usize },
    #[error("register layout invalid: {0}")]
    Registers(String),
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("circuit contains measurements; unitary semantics unavailable")]
    NotUnitary,
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("dispersive expansion ill-defined: near-degenerate detuning between levels {l_a} and {l_b}")]
    DegenerateDetuning { l_a: usize, l_b: usize },
    #[error("basis-size doubling did not converge: last change {last_change} GHz")]
    NotConverged { last_change: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
