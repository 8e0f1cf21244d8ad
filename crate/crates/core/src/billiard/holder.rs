use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::collision::CollisionCoordinate;
use super::geometry::BilliardGeometry;
use super::separation::{separation_time, SeparationOutcome, TimeDirection};
use super::strips::HStripParams;
use super::BilliardError;
use crate::dynamics::{DynamicsError, Observable};
use crate::ensemble::{run_batches, BATCHES};
use crate::rng::StreamSeed;
use crate::stats::{least_squares, quantile_sorted};

/// Envelope quantile per separation-time bin.
pub const ENVELOPE_QUANTILE: f64 = 0.99;
/// Bins with fewer pairs do not enter the envelope fit.
pub const MIN_BIN: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderSettings {
    pub pair_budget: usize,
    /// Separation-time cap; unseparated pairs are binned at the cap.
    pub cap: usize,
    pub direction: TimeDirection,
    pub strips: HStripParams,
    /// Initial distances are log-uniform in `[10^lo, 10^hi]`.
    pub log10_distance: (f64, f64),
}

impl Default for HolderSettings {
    fn default() -> Self {
        Self {
            pair_budget: 10_000,
            cap: 60,
            direction: TimeDirection::Future,
            strips: HStripParams::default(),
            log10_distance: (-8.0, -3.0),
        }
    }
}

/// One sampled pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub separation: usize,
    pub censored: bool,
    pub difference: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeBin {
    pub separation: usize,
    pub count: usize,
    pub quantile: f64,
}

/// Fitted `|f(x) - f(y)| <= K theta^s` envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub k_hat: f64,
    pub theta_hat: f64,
    pub violation_fraction: f64,
    pub pairs_used: usize,
    /// Pairs dropped because an orbit met a tangency or the free-path cap.
    pub pairs_skipped: usize,
    pub censored: usize,
    /// True when every difference vanished; the envelope is then `K = 0`
    /// and `theta_hat` carries no information.
    pub degenerate: bool,
    /// False when the fitted slope was not negative; `theta_hat` is then
    /// clamped below 1.
    pub contracting: bool,
    pub bins: Vec<EnvelopeBin>,
}

/// Fraction of samples with `|f(x) - f(y)| > K theta^s`.
pub fn budget_violation_fraction(samples: &[PairSample], k: f64, theta: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let bad = samples
        .iter()
        .filter(|p| p.difference > k * theta.powi(p.separation as i32) * (1.0 + 1e-12))
        .count();
    bad as f64 / samples.len() as f64
}

/// Nearby pairs `(x, y)` with `x` from the invariant measure and `y` displaced
/// by a log-uniform distance in a uniformly random direction of the `(r, phi)`
/// plane, together with their separation times and observable differences.
pub fn sample_pairs(
    geom: &BilliardGeometry,
    f: &Observable<CollisionCoordinate>,
    settings: &HolderSettings,
    seed: &StreamSeed,
) -> Result<(Vec<PairSample>, usize), BilliardError> {
    let (lo, hi) = settings.log10_distance;
    if !(lo < hi && hi < 0.0) {
        return Err(BilliardError::Settings(format!(
            "distance decades ({lo}, {hi}) must satisfy lo < hi < 0"
        )));
    }
    let batches = run_batches(settings.pair_budget, BATCHES, |_, range| {
        let mut out = Vec::with_capacity(range.len());
        let mut skipped = 0;
        for i in range {
            let mut rng = seed.member(i as u64);
            let x = loop {
                let x = geom.sample_srb(&mut rng);
                if x.phi.abs() < FRAC_PI_2 - 1e-3 {
                    break x;
                }
            };
            let d = 10f64.powf(rng.random_range(lo..hi));
            let psi = rng.random_range(0.0..TAU);
            let perimeter = geom.scatterers()[x.scatterer_id].perimeter();
            let mut r = (x.r + d * psi.cos()).rem_euclid(perimeter);
            if r >= perimeter {
                r = 0.0;
            }
            let y = CollisionCoordinate {
                r,
                phi: x.phi + d * psi.sin(),
                ..x
            };
            match separation_time(geom, &x, &y, settings.direction, settings.strips, settings.cap)
            {
                Ok(outcome) => {
                    let (separation, censored) = match outcome {
                        SeparationOutcome::Separated(s) => (s, false),
                        SeparationOutcome::CapExceeded => (settings.cap, true),
                    };
                    out.push(PairSample {
                        separation,
                        censored,
                        difference: (f.eval(&x) - f.eval(&y)).norm(),
                    });
                }
                Err(DynamicsError::Singular { .. } | DynamicsError::HorizonCap { .. }) => {
                    skipped += 1
                }
                Err(e) => return Err(BilliardError::Dynamics(e)),
            }
        }
        Ok((out, skipped))
    })?;
    let mut samples = Vec::with_capacity(settings.pair_budget);
    let mut skipped = 0;
    for (s, k) in batches {
        samples.extend(s);
        skipped += k;
    }
    Ok((samples, skipped))
}

/// Upper-envelope fit of `ln |f(x) - f(y)|` against the separation time.
///
/// Per separation-time bin the 0.99 quantile of the differences is taken;
/// a least-squares line through the log-quantiles gives `theta_hat`, and the
/// intercept is raised until the line clears every bin quantile. Each fitted
/// bin then has at most 1% of its pairs above the envelope.
pub fn fit_envelope(samples: &[PairSample], skipped: usize) -> Result<HolderEstimate, BilliardError> {
    let censored = samples.iter().filter(|p| p.censored).count();
    let mut by_bin: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for p in samples {
        by_bin.entry(p.separation).or_default().push(p.difference);
    }
    let bins: Vec<EnvelopeBin> = by_bin
        .into_iter()
        .map(|(s, mut v)| {
            v.sort_by(f64::total_cmp);
            EnvelopeBin {
                separation: s,
                count: v.len(),
                quantile: quantile_sorted(&v, ENVELOPE_QUANTILE),
            }
        })
        .collect();
    if samples.iter().all(|p| p.difference == 0.0) {
        if samples.is_empty() {
            return Err(BilliardError::InsufficientData("no pairs were sampled".into()));
        }
        return Ok(HolderEstimate {
            k_hat: 0.0,
            theta_hat: 0.5,
            violation_fraction: 0.0,
            pairs_used: samples.len(),
            pairs_skipped: skipped,
            censored,
            degenerate: true,
            contracting: true,
            bins,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = bins
        .iter()
        .filter(|b| b.count >= MIN_BIN && b.quantile > 0.0)
        .map(|b| (b.separation as f64, b.quantile.ln()))
        .unzip();
    let fit = least_squares(&xs, &ys).ok_or_else(|| {
        BilliardError::InsufficientData(format!(
            "{} separation-time bins with >= {MIN_BIN} pairs and nonzero envelope; need 2",
            xs.len()
        ))
    })?;
    let contracting = fit.slope < 0.0;
    let theta_hat = fit.slope.exp().min(1.0 - 1e-9);
    let ln_theta = theta_hat.ln();
    let lift = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - fit.intercept - x * ln_theta)
        .fold(0.0, f64::max);
    let k_hat = (fit.intercept + lift).exp();
    Ok(HolderEstimate {
        k_hat,
        theta_hat,
        violation_fraction: budget_violation_fraction(samples, k_hat, theta_hat),
        pairs_used: samples.len(),
        pairs_skipped: skipped,
        censored,
        degenerate: false,
        contracting,
        bins,
    })
}

/// Samples pairs and fits the dynamical Holder envelope of `f`.
pub fn estimate_dynamical_holder(
    geom: &BilliardGeometry,
    f: &Observable<CollisionCoordinate>,
    settings: &HolderSettings,
    seed: &StreamSeed,
) -> Result<HolderEstimate, BilliardError> {
    let (samples, skipped) = sample_pairs(geom, f, settings, seed)?;
    fit_envelope(&samples, skipped)
}
