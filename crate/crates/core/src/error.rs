use thiserror::Error;

pub type Result<T, E = PendulumError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PendulumError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid of {n_points} points cannot resolve |J| = {j} (limit {limit})")]
    Aliasing { n_points: usize, j: i64, limit: i64 },

    #[error("topological index undefined for zeta = 0")]
    UndefinedIndex,

    #[error("symmetric eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("state mixes parity: even-part norm {even:.3e}, odd-part norm {odd:.3e}")]
    MixedParity { even: f64, odd: f64 },

    #[error("state {n} is degenerate with a neighbour (gap {gap:.3e}); derivative branch is ill-defined")]
    DegenerateState { n: usize, gap: f64 },

    #[error(
        "ansatz basis ill-conditioned (condition number {condition:.3e} with ell_max = {ell_max}); \
         try ell_max <= {suggested}"
    )]
    IllConditioned { condition: f64, ell_max: usize, suggested: usize },

    #[error("I_{order}({x}) overflows f64; use an exponentially scaled representation for x > 700")]
    BesselOverflow { order: u32, x: f64 },

    #[error("propagation produced NaN at step {step}")]
    NonFinite { step: usize },

    #[error("state index {n} out of range ({available} states solved)")]
    StateIndex { n: usize, available: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PendulumError {
    fn from(err: std::io::Error) -> Self {
        PendulumError::Io(err.to_string())
    }
}

impl From<serde_json::Error> for PendulumError {
    fn from(err: serde_json::Error) -> Self {
        PendulumError::Config(err.to_string())
    }
}
