use thiserror::Error;

#[derive(Debug, Error)]
pub enum RaceError {
    #[error("modulus must be at least 3, got {0}")]
    ModulusTooSmall(u64),
    #[error("{residue} is not a unit modulo {modulus}")]
    NonUnit { residue: u64, modulus: u64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cost guard: {0}")]
    CostGuard(String),
    #[error("matrix not positive semidefinite (jitter escalation exhausted at {max_jitter:e})")]
    NotPsd { max_jitter: f64 },
    #[error("singular matrix")]
    Singular,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RaceError>;
