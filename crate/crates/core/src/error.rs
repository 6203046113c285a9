use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("subcritical speed: lambda_c = {lambda_c} < lambda0 = {lambda0}")]
    Subcritical { lambda_c: f64, lambda0: f64 },

    #[error("input must have zero mean for a singular operator (mean = {mean:e})")]
    NotMeanZero { mean: f64 },

    #[error("interface amplitude {amplitude} exceeds the admissible limit {limit}")]
    AmplitudeGate { amplitude: f64, limit: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("continuation failed; last converged delta = {last_delta}")]
    Continuation { last_delta: f64 },

    #[error("singular point: {0}")]
    Singular(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}
