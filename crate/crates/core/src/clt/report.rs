use serde::{Deserialize, Serialize};

use super::blocks::{MeanSource, DEGENERACY, MEAN_BUDGET};
use super::variance::{estimate_mean, Welford};
use super::CltError;
use crate::correlations::MIN_BUDGET;
use crate::dynamics::{DynamicalSystem, Observable};
use crate::ensemble::{run_batches, BATCHES};
use crate::rng::StreamSeed;
use crate::stats::{batch_mean_se, ks_critical, ks_statistic, normal_cdf};

/// Desk-scale KS threshold, looser than the i.i.d. critical value to absorb
/// finite-n bias.
pub const KS_THRESHOLD: f64 = 0.03;
/// Largest accepted gap between the KS statistics of the two normalizations.
pub const MODE_AGREEMENT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `sqrt` of the sample `Var S_n`.
    Empirical,
    /// `sqrt(n sigma^2)` with a supplied Green-Kubo `sigma^2`.
    GreenKubo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub samples: usize,
    pub mean: f64,
    pub mean_source: MeanSource,
    pub normalization: Normalization,
    /// KS distance under `normalization`.
    pub ks_statistic: f64,
    pub ks_empirical: f64,
    pub ks_green_kubo: f64,
    pub ks_threshold: f64,
    /// Asymptotic i.i.d. critical value at the 5% level, for reference.
    pub ks_critical_5pct: f64,
    /// `Var S_n / n` from the same samples.
    pub variance_ratio: f64,
    pub variance_ratio_se: f64,
    pub sigma2_green_kubo: f64,
    /// Equal to `variance_ratio`: the empirical estimate of the limit.
    pub sigma2_empirical: f64,
    pub ks_pass: bool,
    pub modes_agree: bool,
}

/// Draws `samples` starts, forms `S_n - n <f>` and tests both normalizations
/// against the standard normal. Returns the report and the normalized sums
/// under `normalization`, sorted.
#[allow(clippy::too_many_arguments)]
pub fn clt_test<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    n: usize,
    samples: usize,
    normalization: Normalization,
    mean: Option<f64>,
    sigma2_green_kubo: f64,
    seed: &StreamSeed,
) -> Result<(CltReport, Vec<f64>), CltError> {
    if !f.is_real() {
        return Err(CltError::Invalid(format!("observable {} is not real", f.name())));
    }
    if n == 0 {
        return Err(CltError::Invalid("n must be positive".into()));
    }
    if samples < MIN_BUDGET {
        return Err(CltError::Budget(format!(
            "{samples} samples below the minimum {MIN_BUDGET}"
        )));
    }
    if !(sigma2_green_kubo > 0.0) {
        return Err(CltError::Degenerate(format!(
            "Green-Kubo variance {sigma2_green_kubo} is not positive"
        )));
    }
    let (mean, mean_source) = match mean {
        Some(m) => (m, MeanSource::Supplied),
        None => {
            let (m, se) = estimate_mean(system, f, MEAN_BUDGET, &seed.derive("mean"))?;
            (
                m,
                MeanSource::Estimated {
                    budget: MEAN_BUDGET,
                    standard_error: se,
                },
            )
        }
    };
    let batches = run_batches(samples, BATCHES, |_, range| {
        let mut sums = Vec::with_capacity(range.len());
        let mut w = Welford::default();
        let mut max_abs = 0.0f64;
        for i in range {
            let mut x = system.sample_invariant(&mut seed.member(i as u64), n + 1)?;
            let mut s = 0.0;
            for _ in 0..n {
                let v = f.eval_re(&x) - mean;
                max_abs = max_abs.max(v.abs());
                s += v;
                system.advance(&mut x)?;
            }
            w.push(s);
            sums.push(s);
        }
        Ok::<_, CltError>((sums, w, max_abs))
    })?;
    let mut total = Welford::default();
    for (_, w, _) in &batches {
        total.merge(w);
    }
    let var_sn = total.variance();
    let sup = f
        .sup_bound()
        .unwrap_or_else(|| batches.iter().map(|b| b.2).fold(0.0, f64::max));
    if var_sn == 0.0 || var_sn < DEGENERACY * n as f64 * sup * sup {
        return Err(CltError::Degenerate(format!(
            "Var S_n = {var_sn:e} for n = {n}"
        )));
    }
    let per_batch: Vec<f64> = batches.iter().map(|b| b.1.variance() / n as f64).collect();
    let sums: Vec<f64> = batches.into_iter().flat_map(|b| b.0).collect();

    let normalize = |scale: f64| -> Vec<f64> { sums.iter().map(|s| s / scale).collect() };
    let mut emp = normalize(var_sn.sqrt());
    let mut gk = normalize((n as f64 * sigma2_green_kubo).sqrt());
    let ks_empirical = ks_statistic(&mut emp, normal_cdf);
    let ks_green_kubo = ks_statistic(&mut gk, normal_cdf);
    let (ks, chosen) = match normalization {
        Normalization::Empirical => (ks_empirical, emp),
        Normalization::GreenKubo => (ks_green_kubo, gk),
    };
    let ratio = var_sn / n as f64;
    Ok((
        CltReport {
            n,
            samples,
            mean,
            mean_source,
            normalization,
            ks_statistic: ks,
            ks_empirical,
            ks_green_kubo,
            ks_threshold: KS_THRESHOLD,
            ks_critical_5pct: ks_critical(samples, 0.05),
            variance_ratio: ratio,
            variance_ratio_se: batch_mean_se(&per_batch).1,
            sigma2_green_kubo,
            sigma2_empirical: ratio,
            ks_pass: ks < KS_THRESHOLD,
            modes_agree: (ks_empirical - ks_green_kubo).abs() < MODE_AGREEMENT,
        },
        chosen,
    ))
}
