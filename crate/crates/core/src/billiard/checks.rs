use serde::{Deserialize, Serialize};

use super::geometry::BilliardGeometry;
use crate::dynamics::DynamicsError;
use crate::ensemble::{run_batches, BATCHES};
use crate::rng::StreamSeed;
use crate::stats::{batch_mean_se, ks_critical, ks_statistic};

/// Significance level of the SRB invariance test.
pub const INVARIANCE_LEVEL: f64 = 0.01;

fn is_skippable(e: &DynamicsError) -> bool {
    matches!(e, DynamicsError::Singular { .. } | DynamicsError::HorizonCap { .. })
}

/// KS distances of the pushed-forward SRB sample from the SRB marginals:
/// `sin(phi)` uniform on `[-1, 1]` and the normalized arc length uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrbInvariance {
    pub samples: usize,
    /// Starts whose flight was tangential or exceeded the cap.
    pub skipped: usize,
    pub ks_phi: f64,
    pub ks_arc: f64,
    pub level: f64,
    pub critical: f64,
    pub pass: bool,
}

pub fn srb_invariance(
    geom: &BilliardGeometry,
    samples: usize,
    seed: &StreamSeed,
) -> Result<SrbInvariance, DynamicsError> {
    let batches = run_batches(samples, BATCHES, |_, range| {
        let mut phis = Vec::with_capacity(range.len());
        let mut arcs = Vec::with_capacity(range.len());
        let mut skipped = 0;
        for i in range {
            let c = geom.sample_srb(&mut seed.member(i as u64));
            match geom.collision_map(&c) {
                Ok((y, _)) => {
                    phis.push(y.phi);
                    arcs.push(y.r / geom.scatterers()[y.scatterer_id].perimeter());
                }
                Err(e) if is_skippable(&e) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok((phis, arcs, skipped))
    })?;
    let skipped = batches.iter().map(|b| b.2).sum();
    let (mut phis, mut arcs): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for (p, a, _) in batches {
        phis.extend(p);
        arcs.extend(a);
    }
    let critical = ks_critical(phis.len(), INVARIANCE_LEVEL);
    let ks_phi = ks_statistic(&mut phis, |p| 0.5 * (1.0 + p.sin()));
    let ks_arc = ks_statistic(&mut arcs, |u| u);
    Ok(SrbInvariance {
        samples,
        skipped,
        ks_phi,
        ks_arc,
        level: INVARIANCE_LEVEL,
        critical,
        pass: ks_phi < critical && ks_arc < critical,
    })
}

/// Ensemble mean of the free path against `pi |Q| / |dQ|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreePathCheck {
    pub samples: usize,
    /// Flights beyond the cap or tangential, left out of the mean.
    pub skipped: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub exact: f64,
    pub relative_error: f64,
}

pub fn mean_free_path_check(
    geom: &BilliardGeometry,
    samples: usize,
    seed: &StreamSeed,
) -> Result<FreePathCheck, DynamicsError> {
    let batches = run_batches(samples, BATCHES, |_, range| {
        let (mut sum, mut count, mut skipped) = (0.0, 0usize, 0usize);
        for i in range {
            let c = geom.sample_srb(&mut seed.member(i as u64));
            match geom.collision_map(&c) {
                Ok((_, tau)) => {
                    sum += tau;
                    count += 1;
                }
                Err(e) if is_skippable(&e) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok((sum, count, skipped))
    })?;
    let total: f64 = batches.iter().map(|b| b.0).sum();
    let count: usize = batches.iter().map(|b| b.1).sum();
    let means: Vec<f64> = batches
        .iter()
        .filter(|b| b.1 > 0)
        .map(|b| b.0 / b.1 as f64)
        .collect();
    let mean = total / count as f64;
    let exact = geom.mean_free_path();
    Ok(FreePathCheck {
        samples,
        skipped: batches.iter().map(|b| b.2).sum(),
        mean,
        standard_error: batch_mean_se(&means).1,
        exact,
        relative_error: (mean - exact).abs() / exact,
    })
}

/// `max |F^{-1}(F x) - x|` over SRB starts, with arc length measured on the
/// circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvolutionCheck {
    pub collisions: usize,
    pub skipped: usize,
    pub max_deviation: f64,
    /// Starts that came back on another scatterer.
    pub mismatched: usize,
}

pub fn involution_check(
    geom: &BilliardGeometry,
    collisions: usize,
    seed: &StreamSeed,
) -> Result<InvolutionCheck, DynamicsError> {
    let batches = run_batches(collisions, BATCHES, |_, range| {
        let (mut worst, mut skipped, mut mismatched) = (0.0f64, 0usize, 0usize);
        for i in range {
            let c = geom.sample_srb(&mut seed.member(i as u64));
            let back = geom
                .collision_map(&c)
                .and_then(|(y, _)| geom.inverse_collision_map(&y));
            match back {
                Ok((b, _)) => {
                    if b.scatterer_id != c.scatterer_id {
                        mismatched += 1;
                        continue;
                    }
                    let perimeter = geom.scatterers()[c.scatterer_id].perimeter();
                    let dr = (b.r - c.r).abs();
                    worst = worst.max(dr.min(perimeter - dr)).max((b.phi - c.phi).abs());
                }
                Err(e) if is_skippable(&e) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok((worst, skipped, mismatched))
    })?;
    Ok(InvolutionCheck {
        collisions,
        skipped: batches.iter().map(|b| b.1).sum(),
        max_deviation: batches.iter().map(|b| b.0).fold(0.0, f64::max),
        mismatched: batches.iter().map(|b| b.2).sum(),
    })
}
