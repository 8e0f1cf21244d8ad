use serde::{Deserialize, Serialize};

use super::collision::{CollisionCoordinate, Flight};
use super::geometry::BilliardGeometry;
use super::strips::{h_strip_label, HStripParams};
use crate::dynamics::DynamicsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeDirection {
    Future,
    Past,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationOutcome {
    Separated(usize),
    CapExceeded,
}

fn step(
    geom: &BilliardGeometry,
    c: &CollisionCoordinate,
    direction: TimeDirection,
) -> Result<Flight, DynamicsError> {
    match direction {
        TimeDirection::Future => geom.flight(c),
        TimeDirection::Past => geom.flight(&c.reversed()).map(|f| Flight {
            next: f.next.reversed(),
            ..f
        }),
    }
}

/// Smallest `n` in `0..=cap` with `F^{+-n} x` and `F^{+-n} y` in different
/// H-strips.
///
/// Two orbits that land on different lattice copies of the same scatterer
/// count as separated at that step: between them lies a tangency, so they
/// have crossed a singularity even when the strip labels agree.
pub fn separation_time(
    geom: &BilliardGeometry,
    x: &CollisionCoordinate,
    y: &CollisionCoordinate,
    direction: TimeDirection,
    strips: HStripParams,
    cap: usize,
) -> Result<SeparationOutcome, DynamicsError> {
    let (mut a, mut b) = (*x, *y);
    for n in 0..=cap {
        if h_strip_label(&a, strips) != h_strip_label(&b, strips) {
            return Ok(SeparationOutcome::Separated(n));
        }
        if n == cap {
            break;
        }
        let with_step = |e: DynamicsError| match e {
            DynamicsError::Singular { detail, .. } => DynamicsError::Singular { step: n, detail },
            other => other,
        };
        let fa = step(geom, &a, direction).map_err(with_step)?;
        let fb = step(geom, &b, direction).map_err(with_step)?;
        if fa.offset != fb.offset {
            return Ok(SeparationOutcome::Separated(n + 1));
        }
        a = fa.next;
        b = fb.next;
    }
    Ok(SeparationOutcome::CapExceeded)
}
