use thiserror::Error;

/// Errors produced by design, evaluation and calibration routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rate function undefined at c = {c} for psi_{index}")]
    RateDomain { index: u8, c: f64 },

    #[error("{name} = {value} is outside (0, 1)")]
    Probability { name: &'static str, value: f64 },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid truth parameter: {0}")]
    Truth(String),

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("grid recursion did not converge: ess {coarse} at {coarse_points} points vs {fine} at {fine_points} points")]
    NonConvergent {
        coarse: f64,
        fine: f64,
        coarse_points: usize,
        fine_points: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that a level lies strictly inside (0, 1).
pub(crate) fn check_level(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::Probability { name, value })
    }
}
