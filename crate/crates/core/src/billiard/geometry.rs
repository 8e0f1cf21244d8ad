use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsError;

/// Default free-path cap in cell widths.
pub const DEFAULT_CAP: f64 = 100.0;

/// Roots closer than this to the departure point are ignored.
pub(crate) const EXCLUSION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Scatterer {
    pub fn perimeter(&self) -> f64 {
        TAU * self.radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonStatus {
    VerifiedFinite,
    SuspectedInfinite,
    Unchecked,
}

/// Circular scatterers on the unit torus `R^2 / Z^2`.
///
/// Invariants: radii > 0, centers in `[0, 1)^2`, closed disks pairwise
/// disjoint including every periodic image, cap > 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilliardGeometry {
    scatterers: Vec<Scatterer>,
    cap: f64,
    horizon: HorizonStatus,
}

/// First scatterer copy met by a ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct RayHit {
    pub id: usize,
    /// Lattice translate of the hit copy.
    pub offset: [i64; 2],
    pub t: f64,
}

impl BilliardGeometry {
    pub fn new(scatterers: Vec<Scatterer>, cap: f64) -> Result<Self, DynamicsError> {
        let invalid = |m: String| Err(DynamicsError::InvalidSystem(m));
        if scatterers.is_empty() {
            return invalid("a billiard table needs at least one scatterer".into());
        }
        if !(cap > 0.0 && cap.is_finite()) {
            return invalid(format!("free-path cap {cap} must be positive and finite"));
        }
        for (i, s) in scatterers.iter().enumerate() {
            if !(s.radius > 0.0 && s.radius.is_finite()) {
                return invalid(format!("scatterer {i}: radius {} must be > 0", s.radius));
            }
            if !s.center.iter().all(|c| (0.0..1.0).contains(c)) {
                return invalid(format!("scatterer {i}: center {:?} outside [0,1)^2", s.center));
            }
        }
        check_disjoint(&scatterers)?;
        Ok(Self {
            scatterers,
            cap,
            horizon: HorizonStatus::Unchecked,
        })
    }

    /// One disk of radius `radius` at the cell center.
    pub fn one_disk(radius: f64, cap: f64) -> Result<Self, DynamicsError> {
        Self::new(
            vec![Scatterer {
                center: [0.5, 0.5],
                radius,
            }],
            cap,
        )
    }

    pub fn scatterers(&self) -> &[Scatterer] {
        &self.scatterers
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn horizon(&self) -> HorizonStatus {
        self.horizon
    }

    pub fn with_cap(mut self, cap: f64) -> Result<Self, DynamicsError> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(DynamicsError::InvalidSystem(format!(
                "free-path cap {cap} must be positive and finite"
            )));
        }
        self.cap = cap;
        Ok(self)
    }

    pub fn with_horizon(mut self, status: HorizonStatus) -> Self {
        self.horizon = status;
        self
    }

    pub fn total_perimeter(&self) -> f64 {
        self.scatterers.iter().map(Scatterer::perimeter).sum()
    }

    /// Area of the billiard domain in one cell.
    pub fn free_area(&self) -> f64 {
        1.0 - self
            .scatterers
            .iter()
            .map(|s| PI * s.radius * s.radius)
            .sum::<f64>()
    }

    /// Mean free path `pi |Q| / |dQ|` under the invariant measure.
    pub fn mean_free_path(&self) -> f64 {
        PI * self.free_area() / self.total_perimeter()
    }

    /// Whether `p` lies in the closed interior of some scatterer copy.
    pub fn inside_scatterer(&self, p: [f64; 2]) -> bool {
        let cell = [p[0].floor(), p[1].floor()];
        self.scatterers.iter().any(|s| {
            neighbours().any(|(a, b)| {
                let dx = p[0] - (s.center[0] + cell[0] + a as f64);
                let dy = p[1] - (s.center[1] + cell[1] + b as f64);
                dx * dx + dy * dy <= s.radius * s.radius
            })
        })
    }

    /// First scatterer copy hit by `origin + t dir`, `|dir| = 1`, with
    /// `EXCLUSION < t <= limit`. The canonical copy of `skip` is the departure
    /// disk and is never tested.
    ///
    /// Cells are visited in ray order. A disk meeting a cell has its center
    /// in the 3x3 block around it because every radius is below 1/2, so
    /// once the best root lies before the exit of the current cell no later
    /// cell can improve it.
    pub(crate) fn trace(
        &self,
        origin: [f64; 2],
        dir: [f64; 2],
        skip: Option<usize>,
        limit: f64,
    ) -> Option<RayHit> {
        let mut cell = [origin[0].floor() as i64, origin[1].floor() as i64];
        let step = [dir[0].signum() as i64, dir[1].signum() as i64];
        let axis_t = |k: usize, c: i64| -> f64 {
            if dir[k] > 0.0 {
                ((c + 1) as f64 - origin[k]) / dir[k]
            } else if dir[k] < 0.0 {
                (c as f64 - origin[k]) / dir[k]
            } else {
                f64::INFINITY
            }
        };
        let mut t_next = [axis_t(0, cell[0]), axis_t(1, cell[1])];
        let t_delta = [1.0 / dir[0].abs(), 1.0 / dir[1].abs()];
        let mut best: Option<RayHit> = None;
        loop {
            for (a, b) in neighbours() {
                let offset = [cell[0] + a, cell[1] + b];
                for (id, s) in self.scatterers.iter().enumerate() {
                    if skip == Some(id) && offset == [0, 0] {
                        continue;
                    }
                    let wx = origin[0] - (s.center[0] + offset[0] as f64);
                    let wy = origin[1] - (s.center[1] + offset[1] as f64);
                    let half_b = wx * dir[0] + wy * dir[1];
                    let c = wx * wx + wy * wy - s.radius * s.radius;
                    let disc = half_b * half_b - c;
                    if disc < 0.0 {
                        continue;
                    }
                    let t = -half_b - disc.sqrt();
                    if t > EXCLUSION && best.is_none_or(|h| t < h.t) {
                        best = Some(RayHit { id, offset, t });
                    }
                }
            }
            let t_exit = t_next[0].min(t_next[1]);
            if let Some(h) = best {
                if h.t <= t_exit {
                    return (h.t <= limit).then_some(h);
                }
            }
            if t_exit > limit {
                return None;
            }
            let k = if t_next[0] <= t_next[1] { 0 } else { 1 };
            cell[k] += step[k];
            t_next[k] += t_delta[k];
        }
    }
}

fn neighbours() -> impl Iterator<Item = (i64, i64)> {
    (-1..=1).flat_map(|a| (-1..=1).map(move |b| (a, b)))
}

/// Pairwise disjointness over the 3x3 block of periodic images, which also
/// rules out a disk touching its own translates.
fn check_disjoint(scatterers: &[Scatterer]) -> Result<(), DynamicsError> {
    for (i, s) in scatterers.iter().enumerate() {
        for (j, t) in scatterers.iter().enumerate().skip(i) {
            for (a, b) in neighbours() {
                if i == j && a == 0 && b == 0 {
                    continue;
                }
                let dx = s.center[0] - (t.center[0] + a as f64);
                let dy = s.center[1] - (t.center[1] + b as f64);
                let dist = (dx * dx + dy * dy).sqrt();
                if dist <= s.radius + t.radius {
                    return Err(DynamicsError::InvalidSystem(format!(
                        "scatterers {i} and {j} (image {a},{b}) overlap: distance {dist} <= {}",
                        s.radius + t.radius
                    )));
                }
            }
        }
    }
    Ok(())
}
