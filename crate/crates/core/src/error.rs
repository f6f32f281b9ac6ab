use thiserror::Error;

use crate::moments::Statistic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("transition matrix (p11 = {p11}, p22 = {p22}) is not ergodic: {reason}")]
    NonErgodic { p11: f64, p22: f64, reason: &'static str },

    #[error("AR polynomial is not stationary (smallest root modulus {min_modulus})")]
    NonStationary { min_modulus: f64 },

    #[error("degenerate sample for statistic {statistic}: {reason}")]
    Degenerate { statistic: Statistic, reason: &'static str },

    #[error("regressor matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("no logistic coefficients for sample size {0} and interpolation is disabled")]
    UnsupportedSampleSize(usize),

    #[error("nuisance grid is empty after stationarity filtering; use a smaller box")]
    EmptyGrid,

    #[error("logistic fit did not converge after {iterations} iterations (objective {objective:.3e}, gradient norm {gradient_norm:.3e})")]
    FitFailed { iterations: usize, objective: f64, gradient_norm: f64 },
}
