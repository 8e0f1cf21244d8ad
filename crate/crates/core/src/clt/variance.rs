use serde::{Deserialize, Serialize};

use super::CltError;
use crate::correlations::{moment_condition, CorrelationSeries, MomentCondition, MIN_BUDGET};
use crate::dynamics::{DynamicalSystem, Observable};
use crate::ensemble::{run_batches, BATCHES};
use crate::rng::StreamSeed;
use crate::stats::batch_mean_se;

/// Negative Green-Kubo sums beyond this many standard errors are rejected.
pub const NEGATIVE_TOLERANCE: f64 = 3.0;

/// Streaming mean and second central moment.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn merge(&mut self, o: &Self) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with the `n - 1` denominator.
    pub(crate) fn variance(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            self.m2 / (self.n - 1.0)
        }
    }
}

/// `Var S_n` over an ensemble with its batch-means error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct SumVariance {
    pub variance: f64,
    pub standard_error: f64,
    /// Largest `|f - centre|` seen, a fallback for `sup|f|`.
    pub max_abs_f: f64,
}

/// Ensemble mean of a real observable and its batch-means error.
pub fn estimate_mean<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    budget: usize,
    seed: &StreamSeed,
) -> Result<(f64, f64), CltError> {
    check_budget(budget)?;
    let batches = run_batches(budget, BATCHES, |_, range| {
        let mut w = Welford::default();
        for i in range {
            let x = system.sample_invariant(&mut seed.member(i as u64), 1)?;
            w.push(f.eval_re(&x));
        }
        Ok::<_, CltError>(w)
    })?;
    let mut total = Welford::default();
    for b in &batches {
        total.merge(b);
    }
    let means: Vec<f64> = batches.iter().map(Welford::mean).collect();
    Ok((total.mean(), batch_mean_se(&means).1))
}

/// Variance of `S_n - n centre` over `budget` starts.
pub(crate) fn sum_variance<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    n: usize,
    centre: f64,
    budget: usize,
    seed: &StreamSeed,
) -> Result<SumVariance, CltError> {
    check_budget(budget)?;
    let batches = run_batches(budget, BATCHES, |_, range| {
        let mut w = Welford::default();
        let mut max_abs = 0.0f64;
        for i in range {
            let mut x = system.sample_invariant(&mut seed.member(i as u64), n + 1)?;
            max_abs = max_abs.max((f.eval_re(&x) - centre).abs());
            // Centering each term keeps constants at exactly zero.
            let mut sum = 0.0;
            for _ in 0..n {
                sum += f.eval_re(&x) - centre;
                system.advance(&mut x)?;
            }
            w.push(sum);
        }
        Ok::<_, CltError>((w, max_abs))
    })?;
    let mut total = Welford::default();
    for (b, _) in &batches {
        total.merge(b);
    }
    let vars: Vec<f64> = batches.iter().map(|(b, _)| b.variance()).collect();
    Ok(SumVariance {
        variance: total.variance(),
        standard_error: batch_mean_se(&vars).1,
        max_abs_f: batches.iter().map(|b| b.1).fold(0.0, f64::max),
    })
}

fn check_budget(budget: usize) -> Result<(), CltError> {
    if budget < MIN_BUDGET {
        return Err(CltError::Budget(format!(
            "budget {budget} below the minimum {MIN_BUDGET}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenKubo {
    pub sigma2: f64,
    pub standard_error: f64,
    pub cutoff: usize,
    /// `2 sum` over the last ten lags up to the cutoff.
    pub last_decade: f64,
    pub moment: MomentCondition,
}

/// `sigma^2 = C(0) + 2 sum_{i=1}^{cutoff} C(i)` from an autocorrelation of a
/// real observable. Errors are combined as if the lags were independent.
pub fn green_kubo_variance(
    series: &CorrelationSeries,
    cutoff: usize,
) -> Result<GreenKubo, CltError> {
    let mut sigma2 = 0.0;
    let mut var = 0.0;
    for i in 0..=cutoff {
        let (c, se) = series.at(i).ok_or_else(|| {
            CltError::Invalid(format!("series has no lag {i} (cutoff {cutoff})"))
        })?;
        let w = if i == 0 { 1.0 } else { 2.0 };
        sigma2 += w * c.re;
        var += (w * se).powi(2);
    }
    let standard_error = var.sqrt();
    if sigma2 < -NEGATIVE_TOLERANCE * standard_error {
        return Err(CltError::Inconsistent(format!(
            "Green-Kubo sum {sigma2:e} is negative beyond {NEGATIVE_TOLERANCE} s.e. ({standard_error:e})"
        )));
    }
    let first = cutoff.saturating_sub(9).max(1);
    let last_decade = (first..=cutoff)
        .filter_map(|i| series.at(i))
        .map(|(c, _)| 2.0 * c.re)
        .sum();
    let moment = moment_condition(series, cutoff)?;
    Ok(GreenKubo {
        sigma2,
        standard_error,
        cutoff,
        last_decade,
        moment,
    })
}

/// `Var S_n / n` over `samples` starts with its standard error. Exactly 0 for
/// constant `f`.
pub fn variance_ratio<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    n: usize,
    samples: usize,
    seed: &StreamSeed,
) -> Result<(f64, f64), CltError> {
    if n == 0 {
        return Err(CltError::Invalid("n must be positive".into()));
    }
    // Centering at a provisional f(x_0) only shifts S_n, so the variance is
    // unchanged and constants give exact zeros.
    let centre = f.eval_re(&system.sample_invariant(&mut seed.derive("centre").member(0), 1)?);
    let v = sum_variance(system, f, n, centre, samples, seed)?;
    Ok((v.variance / n as f64, v.standard_error / n as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub samples: usize,
    pub ratio: f64,
    pub standard_error: f64,
    /// `|ratio - sigma2|`
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceConvergence {
    pub sigma2: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Each deviation is at most the previous one plus two combined
    /// standard errors.
    pub monotone_within_errors: bool,
}

/// [`variance_ratio`] at each `(n, samples)` against a reference `sigma2`.
pub fn variance_convergence<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    sigma2: f64,
    plan: &[(usize, usize)],
    seed: &StreamSeed,
) -> Result<VarianceConvergence, CltError> {
    let mut rows = Vec::with_capacity(plan.len());
    for &(n, samples) in plan {
        let (ratio, se) = variance_ratio(system, f, n, samples, &seed.derive(&format!("n={n}")))?;
        rows.push(ConvergenceRow {
            n,
            samples,
            ratio,
            standard_error: se,
            deviation: (ratio - sigma2).abs(),
        });
    }
    let monotone_within_errors = rows.windows(2).all(|w| {
        w[1].deviation <= w[0].deviation + 2.0 * w[0].standard_error.hypot(w[1].standard_error)
    });
    Ok(VarianceConvergence {
        sigma2,
        rows,
        monotone_within_errors,
    })
}
