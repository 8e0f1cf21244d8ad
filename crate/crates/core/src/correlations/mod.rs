//! Monte Carlo pair, auto and multiple correlations, decay fits, the
//! first-moment condition and the telescoping decomposition of block
//! multiple correlations.

mod analysis;
mod estimate;
mod series;
mod telescoping;

use thiserror::Error;

use crate::dynamics::DynamicsError;

pub use analysis::{
    bound_consistency, fit_decay_rate, moment_condition, BoundCheck, DecayFit, MomentCondition,
    SIGNIFICANCE, TAIL_SHARE,
};
pub use estimate::{autocorrelation, multiple_correlation, pair_correlation, MIN_BUDGET};
pub use series::{CorrelationSeries, Estimator, SeriesMetadata};
pub use telescoping::{telescoping_gap, telescoping_gaps, TelescopingReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelationError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("budget: {0}")]
    Budget(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
