use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::series::CorrelationSeries;
use super::CorrelationError;
use crate::stats::least_squares;

/// Lags whose estimate is within this many standard errors of zero are noise.
pub const SIGNIFICANCE: f64 = 2.0;

/// Share of the partial sum above which the last decade raises the tail flag.
pub const TAIL_SHARE: f64 = 0.05;

/// Exponential fit `|C(n)| ~ prefactor * rate^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate_hat: f64,
    pub prefactor_hat: f64,
    pub window: (usize, usize),
    /// RMS deviation of the fit in natural-log scale.
    pub residual: f64,
    /// Lags that entered the fit.
    pub used_lags: Vec<usize>,
}

/// Least squares of `ln |C(n)|` on `n` over the lags in `window` whose
/// estimate exceeds two standard errors. Needs three such lags.
///
/// A non-negative slope is reported as rate 1.
pub fn fit_decay_rate(
    series: &CorrelationSeries,
    window: RangeInclusive<usize>,
) -> Result<DecayFit, CorrelationError> {
    let (ns, logs): (Vec<f64>, Vec<f64>) = series
        .lags()
        .iter()
        .zip(series.estimates().iter().zip(series.standard_errors()))
        .filter(|(n, (c, e))| window.contains(n) && c.norm() > SIGNIFICANCE * **e && c.norm() > 0.0)
        .map(|(&n, (c, _))| (n as f64, c.norm().ln()))
        .unzip();
    if ns.len() < 3 {
        return Err(CorrelationError::InsufficientData(format!(
            "{} significant lags in {}..={}; the series is at the noise floor",
            ns.len(),
            window.start(),
            window.end()
        )));
    }
    let fit = least_squares(&ns, &logs).expect("distinct lags");
    Ok(DecayFit {
        rate_hat: fit.slope.exp().min(1.0),
        prefactor_hat: fit.intercept.exp(),
        window: (*window.start(), *window.end()),
        residual: fit.rms_residual,
        used_lags: ns.iter().map(|&n| n as usize).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCondition {
    /// `sum_{n=1}^{cutoff} n |C(n)|`.
    pub partial_sum: f64,
    /// Contribution of the last ten lags `cutoff-9..=cutoff`.
    pub last_decade: f64,
    /// Raised when the last decade exceeds 5% of the partial sum.
    pub tail_flag: bool,
}

/// First-moment partial sum of the autocorrelations.
pub fn moment_condition(
    series: &CorrelationSeries,
    cutoff: usize,
) -> Result<MomentCondition, CorrelationError> {
    let mut partial_sum = 0.0;
    let mut last_decade = 0.0;
    for n in 1..=cutoff {
        let (c, _) = series.at(n).ok_or_else(|| {
            CorrelationError::Invalid(format!("series lacks lag {n} needed for cutoff {cutoff}"))
        })?;
        let term = n as f64 * c.norm();
        partial_sum += term;
        if n + 10 > cutoff {
            last_decade += term;
        }
    }
    Ok(MomentCondition {
        partial_sum,
        last_decade,
        tail_flag: last_decade > TAIL_SHARE * partial_sum,
    })
}

/// One lag of a bound-consistency table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lag: usize,
    pub measured: f64,
    pub standard_error: f64,
    pub bound: f64,
    /// The check is decidable when the error is below 10% of the bound.
    pub decidable: bool,
    pub pass: bool,
}

/// Compares `|C(n)|` with `bound(n)` lag by lag. Undecidable lags pass.
pub fn bound_consistency(
    series: &CorrelationSeries,
    bound: impl Fn(usize) -> f64,
) -> Vec<BoundCheck> {
    series
        .lags()
        .iter()
        .zip(series.estimates().iter().zip(series.standard_errors()))
        .map(|(&lag, (c, &e))| {
            let b = bound(lag);
            let decidable = e < 0.1 * b;
            BoundCheck {
                lag,
                measured: c.norm(),
                standard_error: e,
                bound: b,
                decidable,
                pass: !decidable || c.norm() <= b,
            }
        })
        .collect()
}
