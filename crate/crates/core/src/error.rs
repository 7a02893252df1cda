use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid input distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rate not achievable: rate {rate} nats >= capacity {capacity} nats")]
    RateNotAchievable { rate: f64, capacity: f64 },

    #[error("iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("outside closed-form regime: (1 + r_o) * E0 = {0} > 1")]
    OutsideClosedForm(f64),

    #[error("outer code: {0}")]
    OuterCode(String),

    #[error("at N = {n}: {source}")]
    AtLength { n: usize, source: Box<Error> },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
