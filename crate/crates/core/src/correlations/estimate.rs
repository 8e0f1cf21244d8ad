use super::series::{check_lags, CoMoment, CorrelationSeries, Estimator, SeriesMetadata};
use super::CorrelationError;
use crate::dynamics::{DynamicalSystem, Observable};
use crate::ensemble::{batch_ranges, run_batches, BATCHES};
use crate::rng::StreamSeed;
use crate::stats::complex_batch_se;
use crate::Complex64;

/// Smallest accepted sample budget.
pub const MIN_BUDGET: usize = 1000;

fn check_budget(budget: usize) -> Result<(), CorrelationError> {
    if budget < MIN_BUDGET {
        return Err(CorrelationError::Budget(format!(
            "budget {budget} below the minimum {MIN_BUDGET}"
        )));
    }
    Ok(())
}

/// `<f . g o F^n> - <f><g>` for every `n` in `lags` (strictly ascending).
///
/// The covariance uses the bilinear product, so for complex observables it
/// is the correlation of the paired values, not of `f` with `conj(g)`. Both
/// means are estimated from the same samples. Standard errors are
/// batch-means errors over 32 batches.
pub fn pair_correlation<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    g: &Observable<S::Point>,
    lags: &[usize],
    budget: usize,
    seed: &StreamSeed,
    estimator: Estimator,
) -> Result<CorrelationSeries, CorrelationError> {
    check_lags(lags)?;
    check_budget(budget)?;
    let max_lag = *lags.last().expect("nonempty");
    let batches: Vec<Vec<CoMoment>> = match estimator {
        Estimator::Ensemble => run_batches(budget, BATCHES, |_, range| {
            let mut acc = vec![CoMoment::default(); lags.len()];
            for i in range {
                let mut rng = seed.member(i as u64);
                let mut x = system.sample_invariant(&mut rng, max_lag + 1)?;
                let fx = f.eval(&x);
                let mut t = 0;
                for (slot, &lag) in acc.iter_mut().zip(lags) {
                    while t < lag {
                        system.advance(&mut x)?;
                        t += 1;
                    }
                    slot.push(fx, g.eval(&x));
                }
            }
            Ok::<_, CorrelationError>(acc)
        })?,
        Estimator::TimeAverage => {
            let mut rng = seed.member(0);
            let mut x = system.sample_invariant(&mut rng, budget + max_lag + 1)?;
            let mut fs = Vec::with_capacity(budget);
            let mut gs = Vec::with_capacity(budget + max_lag);
            for j in 0..budget + max_lag {
                if j < budget {
                    fs.push(f.eval(&x));
                }
                gs.push(g.eval(&x));
                system.advance(&mut x)?;
            }
            batch_ranges(budget, BATCHES)
                .into_iter()
                .map(|range| {
                    lags.iter()
                        .map(|&lag| {
                            let mut m = CoMoment::default();
                            for j in range.clone() {
                                m.push(fs[j], gs[j + lag]);
                            }
                            m
                        })
                        .collect()
                })
                .collect()
        }
    };
    let mut estimates = Vec::with_capacity(lags.len());
    let mut errors = Vec::with_capacity(lags.len());
    for l in 0..lags.len() {
        let mut total = CoMoment::default();
        for b in &batches {
            total.merge(&b[l]);
        }
        let per_batch: Vec<Complex64> = batches.iter().map(|b| b[l].covariance()).collect();
        estimates.push(total.covariance());
        errors.push(complex_batch_se(&per_batch));
    }
    Ok(
        CorrelationSeries::new(lags.to_vec(), estimates, errors, budget, estimator)?
            .with_metadata(SeriesMetadata {
                system: system.descriptor(),
                f: f.name().to_string(),
                g: g.name().to_string(),
                root_seed: seed.root(),
                budget,
            }),
    )
}

/// `C_f(n) = <f . f o F^n> - <f>^2`.
pub fn autocorrelation<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    lags: &[usize],
    budget: usize,
    seed: &StreamSeed,
    estimator: Estimator,
) -> Result<CorrelationSeries, CorrelationError> {
    pair_correlation(system, f, f, lags, budget, seed, estimator)
}

/// Ensemble estimate of `<prod_j f_j o F^{i_j}> - prod_j <f_j>` with its
/// batch-means error. Offsets must be ascending; each mean is estimated at
/// its own time, which is unbiased by invariance.
pub fn multiple_correlation<S: DynamicalSystem>(
    system: &S,
    factors: &[(Observable<S::Point>, usize)],
    budget: usize,
    seed: &StreamSeed,
) -> Result<(Complex64, f64), CorrelationError> {
    if factors.is_empty() {
        return Err(CorrelationError::Invalid("no factors".into()));
    }
    if factors.windows(2).any(|w| w[0].1 > w[1].1) {
        return Err(CorrelationError::Invalid("offsets must be ascending".into()));
    }
    check_budget(budget)?;
    let horizon = factors.last().expect("nonempty").1 + 1;
    let sums = run_batches(budget, BATCHES, |_, range| {
        let count = range.len() as f64;
        let mut joint = Complex64::new(0.0, 0.0);
        let mut singles = vec![Complex64::new(0.0, 0.0); factors.len()];
        for i in range {
            let mut rng = seed.member(i as u64);
            let mut x = system.sample_invariant(&mut rng, horizon)?;
            let mut t = 0;
            let mut product = Complex64::new(1.0, 0.0);
            for ((f, offset), s) in factors.iter().zip(singles.iter_mut()) {
                while t < *offset {
                    system.advance(&mut x)?;
                    t += 1;
                }
                let v = f.eval(&x);
                product *= v;
                *s += v;
            }
            joint += product;
        }
        Ok::<_, CorrelationError>((count, joint, singles))
    })?;
    let gap = |count: f64, joint: Complex64, singles: &[Complex64]| {
        joint / count - singles.iter().map(|s| s / count).product::<Complex64>()
    };
    let per_batch: Vec<Complex64> = sums
        .iter()
        .filter(|(c, _, _)| *c > 0.0)
        .map(|(c, j, s)| gap(*c, *j, s))
        .collect();
    let count: f64 = sums.iter().map(|s| s.0).sum();
    let joint: Complex64 = sums.iter().map(|s| s.1).sum();
    let singles: Vec<Complex64> = (0..factors.len())
        .map(|j| sums.iter().map(|s| s.2[j]).sum())
        .collect();
    Ok((gap(count, joint, &singles), complex_batch_se(&per_batch)))
}
