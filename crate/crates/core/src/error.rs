use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    SizeOutOfRange(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("too large for exact solve: {0}")]
    TooLarge(String),

    #[error("unknown weight function `{0}`")]
    UnknownFunction(String),

    #[error("infeasible bin: {0}")]
    InfeasibleBin(String),

    #[error("invalid generator parameters: {0}")]
    Generator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simulation error: {0}")]
    Simulation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
