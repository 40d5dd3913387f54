use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("boundary spans are not contained in the cycle span")]
    Containment,
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("unsupported degree tuple {0:?}")]
    UnsupportedDegree((usize, usize, usize)),
    #[error("cochain is not a cocycle")]
    NotACocycle,
    #[error("inconsistent outcomes: {0}")]
    InconsistentOutcome(String),
    #[error("measured pattern is not a coboundary")]
    NontrivialClass,
    #[error("state leaves the code space (leakage {0:.3e})")]
    Subspace(f64),
    #[error("{0} qubits exceed the dense cap of {1}")]
    Size(usize, usize),
    #[error("planner: {0}")]
    Planner(String),
    #[error("pairing between chosen classes is not the identity")]
    Pairing,
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
