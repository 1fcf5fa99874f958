use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register of {0} qubits exceeds the supported maximum of 128")]
    TooManyQubits(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("target Pauli must not be the identity")]
    IdentityTarget,
    #[error("model is not physical: {0}")]
    NotPhysical(String),
    #[error("design matrix rank {rank} falls short of the expected {expected}")]
    RankDeficient { rank: usize, expected: usize, witness: Vec<f64> },
    #[error("residual bound {epsilon} is below the least-squares residual {min_residual}")]
    Infeasible { epsilon: f64, min_residual: f64 },
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
