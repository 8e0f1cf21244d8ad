use serde::{Deserialize, Serialize};

use super::CorrelationError;
use crate::dynamics::SystemDescriptor;
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Independent starts drawn from the invariant measure.
    Ensemble,
    /// One long orbit.
    TimeAverage,
}

/// Provenance of an estimated series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetadata {
    pub system: SystemDescriptor,
    pub f: String,
    pub g: String,
    pub root_seed: u64,
    pub budget: usize,
}

/// Covariance estimates `<f . g o F^n> - <f><g>` per lag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    lags: Vec<usize>,
    estimates: Vec<Complex64>,
    standard_errors: Vec<f64>,
    sample_count: usize,
    estimator: Estimator,
    metadata: Option<SeriesMetadata>,
}

impl CorrelationSeries {
    pub fn new(
        lags: Vec<usize>,
        estimates: Vec<Complex64>,
        standard_errors: Vec<f64>,
        sample_count: usize,
        estimator: Estimator,
    ) -> Result<Self, CorrelationError> {
        if lags.len() != estimates.len() || lags.len() != standard_errors.len() {
            return Err(CorrelationError::Invalid(format!(
                "lengths differ: {} lags, {} estimates, {} errors",
                lags.len(),
                estimates.len(),
                standard_errors.len()
            )));
        }
        check_lags(&lags)?;
        if standard_errors.iter().any(|s| !(*s >= 0.0)) {
            return Err(CorrelationError::Invalid("standard errors must be >= 0".into()));
        }
        Ok(Self {
            lags,
            estimates,
            standard_errors,
            sample_count,
            estimator,
            metadata: None,
        })
    }

    /// A noise-free series `c(n)` on the given lags.
    pub fn exact(lags: Vec<usize>, c: impl Fn(usize) -> f64) -> Result<Self, CorrelationError> {
        let estimates = lags.iter().map(|&n| Complex64::new(c(n), 0.0)).collect();
        let errors = vec![0.0; lags.len()];
        Self::new(lags, estimates, errors, 0, Estimator::Ensemble)
    }

    pub fn with_metadata(mut self, metadata: SeriesMetadata) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn estimates(&self) -> &[Complex64] {
        &self.estimates
    }

    pub fn standard_errors(&self) -> &[f64] {
        &self.standard_errors
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn metadata(&self) -> Option<&SeriesMetadata> {
        self.metadata.as_ref()
    }

    /// Estimate and error at `lag`, if present.
    pub fn at(&self, lag: usize) -> Option<(Complex64, f64)> {
        self.lags
            .binary_search(&lag)
            .ok()
            .map(|i| (self.estimates[i], self.standard_errors[i]))
    }
}

pub(crate) fn check_lags(lags: &[usize]) -> Result<(), CorrelationError> {
    if lags.is_empty() {
        return Err(CorrelationError::Invalid("no lags".into()));
    }
    if lags.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CorrelationError::Invalid("lags must be strictly ascending".into()));
    }
    Ok(())
}

/// Streaming co-moment of paired complex samples with the bilinear
/// (non-conjugated) product, mergeable in any grouping.
///
/// When every `a` is identical the deviations are exactly zero, so a
/// constant factor yields covariance exactly 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct CoMoment {
    n: f64,
    mean_a: Complex64,
    mean_b: Complex64,
    c: Complex64,
}

impl CoMoment {
    pub fn push(&mut self, a: Complex64, b: Complex64) {
        self.n += 1.0;
        let da = a - self.mean_a;
        self.mean_a += da / self.n;
        self.mean_b += (b - self.mean_b) / self.n;
        self.c += da * (b - self.mean_b);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let da = other.mean_a - self.mean_a;
        let db = other.mean_b - self.mean_b;
        self.c += other.c + da * db * (self.n * other.n / n);
        self.mean_a += da * (other.n / n);
        self.mean_b += db * (other.n / n);
        self.n = n;
    }

    pub fn covariance(&self) -> Complex64 {
        if self.n == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.c / self.n
        }
    }
}
