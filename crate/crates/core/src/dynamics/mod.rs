//! Dynamical systems, observables, orbits and Birkhoff sums.

mod doubling;
mod interval;
mod observable;
mod torus;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Complex64;

pub use doubling::{BinaryExpansion, DoublingMap, TentMap};
pub use interval::{
    Branch, BranchFormula, Expression, IntervalMap, PiecewiseExpandingMap, UnitIntervalPoint,
    DEFAULT_SAMPLER_BINS,
};
pub use observable::{FirstCoordinate, Observable};
pub use torus::{ToralAutomorphism, TorusPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("point outside the phase space: {0}")]
    Domain(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("unsupported for this system: {0}")]
    Unsupported(String),
    #[error("singular collision at step {step}: {detail}")]
    Singular { step: usize, detail: String },
    #[error("free path exceeded the horizon cap {cap}")]
    HorizonCap { cap: f64 },
}

/// Name and parameters of a system, carried into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub family: String,
    pub parameters: serde_json::Value,
}

/// A map `F` on a phase space together with a sampler for its invariant
/// measure.
///
/// `advance` updates a point in place and is the hot path of every ensemble;
/// [`step`](DynamicalSystem::step) is the validating, allocating variant.
pub trait DynamicalSystem: Send + Sync {
    type Point: Clone + Send + Sync + std::fmt::Debug;

    fn descriptor(&self) -> SystemDescriptor;

    /// Phase-space membership check.
    fn validate_point(&self, x: &Self::Point) -> Result<(), DynamicsError>;

    fn advance(&self, x: &mut Self::Point) -> Result<(), DynamicsError>;

    /// Draws a point from the invariant measure. `horizon` is the number of
    /// steps the caller intends to iterate; systems with exact symbolic
    /// points use it to size their representation.
    fn sample_invariant(
        &self,
        rng: &mut dyn RngCore,
        horizon: usize,
    ) -> Result<Self::Point, DynamicsError>;

    fn step(&self, x: &Self::Point) -> Result<Self::Point, DynamicsError> {
        self.validate_point(x)?;
        let mut y = x.clone();
        self.advance(&mut y)?;
        Ok(y)
    }
}

/// `[x, Fx, ..., F^n x]`.
pub fn orbit<S: DynamicalSystem>(
    system: &S,
    x: &S::Point,
    n: usize,
) -> Result<Vec<S::Point>, DynamicsError> {
    system.validate_point(x)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = x.clone();
    out.push(cur.clone());
    for _ in 0..n {
        system.advance(&mut cur)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// `S_n(x) = sum_{j<n} f(F^j x)`.
pub fn birkhoff_sum<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    x: &S::Point,
    n: usize,
) -> Result<Complex64, DynamicsError> {
    system.validate_point(x)?;
    let mut cur = x.clone();
    birkhoff_sum_in_place(system, f, &mut cur, n)
}

/// Birkhoff sum that leaves `x` at `F^n x`.
pub fn birkhoff_sum_in_place<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    x: &mut S::Point,
    n: usize,
) -> Result<Complex64, DynamicsError> {
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        sum += f.eval(x);
        system.advance(x)?;
    }
    Ok(sum)
}

/// Real part of the Birkhoff sum for real observables, without the complex
/// bookkeeping.
pub fn real_birkhoff_sum_in_place<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    x: &mut S::Point,
    n: usize,
) -> Result<f64, DynamicsError> {
    let mut sum = 0.0;
    for _ in 0..n {
        sum += f.eval_re(x);
        system.advance(x)?;
    }
    Ok(sum)
}

/// Applies `F` `n` times in place.
pub fn advance_by<S: DynamicalSystem>(
    system: &S,
    x: &mut S::Point,
    n: usize,
) -> Result<(), DynamicsError> {
    for _ in 0..n {
        system.advance(x)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;
    use crate::stats::batch_mean_se;

    #[test]
    fn orbit_of_length_zero_is_the_point() {
        let sys = DoublingMap::new(1).unwrap();
        let x = BinaryExpansion::from_f64(0.3).unwrap();
        let o = orbit(&sys, &x, 0).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].value(), 0.3);
    }

    #[test]
    fn birkhoff_of_identity_on_period_two_orbit() {
        let sys = DoublingMap::new(1).unwrap();
        let x = BinaryExpansion::from_rational(1, 3, 256).unwrap();
        let s = birkhoff_sum(&sys, &Observable::first_coordinate(), &x, 2).unwrap();
        assert!((s.re - 1.0).abs() < 4.0 * f64::EPSILON);
        assert_eq!(s.im, 0.0);
    }

    #[test]
    fn birkhoff_of_constant() {
        let sys = ToralAutomorphism::cat_map();
        let x = TorusPoint::from_f64(0.1, 0.7).unwrap();
        let s = birkhoff_sum(&sys, &Observable::constant(2.5), &x, 17).unwrap();
        assert_eq!(s, Complex64::new(17.0 * 2.5, 0.0));
    }

    #[test]
    fn centered_sawtooth_birkhoff_sums_have_zero_mean() {
        // <x - 1/2> = 0 under Lebesgue; Monte Carlo oracle with 3 s.e.
        let sys = DoublingMap::new(1).unwrap();
        let f = Observable::sawtooth();
        let seed = StreamSeed::new(11, "birkhoff-mean");
        let n = 10_000;
        let samples = 10_000;
        let mut batch_means = Vec::new();
        for b in 0..32 {
            let lo = b * samples / 32;
            let hi = (b + 1) * samples / 32;
            let mut acc = 0.0;
            for i in lo..hi {
                let mut rng = seed.member(i as u64);
                let mut x = sys.sample_invariant(&mut rng, n).unwrap();
                acc += real_birkhoff_sum_in_place(&sys, &f, &mut x, n).unwrap();
            }
            batch_means.push(acc / (hi - lo) as f64);
        }
        let (mean, se) = batch_mean_se(&batch_means);
        assert!(mean.abs() <= 3.0 * se, "mean {mean} se {se}");
    }
}
