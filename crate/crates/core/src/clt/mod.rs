//! Bernstein block schedules and block variables, Green-Kubo variance,
//! variance convergence and Kolmogorov-Smirnov checks of normalized Birkhoff
//! sums.

mod blocks;
mod report;
mod schedule;
mod variance;

use thiserror::Error;

use crate::correlations::CorrelationError;
use crate::dynamics::DynamicsError;

pub use blocks::{
    block_gap, block_statistics, block_sums, block_values, block_variable, BlockContext,
    BlockStatistics, MeanSource, DEGENERACY, MEAN_BUDGET, VAR_BUDGET,
};
pub use report::{clt_test, CltReport, Normalization, KS_THRESHOLD, MODE_AGREEMENT};
pub use schedule::BernsteinSchedule;
pub use variance::{
    estimate_mean, green_kubo_variance, variance_convergence, variance_ratio, ConvergenceRow,
    GreenKubo, VarianceConvergence, NEGATIVE_TOLERANCE,
};

/// Default block exponents `(a, b)`.
pub const DEFAULT_EXPONENTS: (f64, f64) = (0.4, 0.2);
/// Default `t` grid for block-gap scans.
pub const DEFAULT_T_GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CltError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("degenerate observable: {0}")]
    Degenerate(String),
    #[error("inconsistent series: {0}")]
    Inconsistent(String),
    #[error("budget: {0}")]
    Budget(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
