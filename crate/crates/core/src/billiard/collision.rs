use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::geometry::BilliardGeometry;
use crate::dynamics::{DynamicalSystem, DynamicsError, Observable, SystemDescriptor};

/// Collisions with `|phi| > pi/2 - SINGULAR_MARGIN` are treated as tangential.
pub const SINGULAR_MARGIN: f64 = 1e-9;

/// A point of the collision space: a boundary point given by arc length
/// `r` on scatterer `scatterer_id`, and the outgoing angle `phi` measured
/// counterclockwise from the normal pointing into the billiard domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionCoordinate {
    pub scatterer_id: usize,
    pub r: f64,
    pub phi: f64,
}

impl CollisionCoordinate {
    pub fn new(
        geom: &BilliardGeometry,
        scatterer_id: usize,
        r: f64,
        phi: f64,
    ) -> Result<Self, DynamicsError> {
        let c = Self {
            scatterer_id,
            r,
            phi,
        };
        geom.validate_point(&c)?;
        Ok(c)
    }

    /// The time-reversal involution `phi -> -phi`.
    pub fn reversed(&self) -> Self {
        Self {
            phi: -self.phi,
            ..*self
        }
    }
}

/// One free flight between collisions, in the unfolded plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flight {
    pub next: CollisionCoordinate,
    pub free_path: f64,
    /// Lattice translate of the arrival scatterer relative to the departure
    /// cell.
    pub offset: [i64; 2],
    pub departure: [f64; 2],
    pub arrival: [f64; 2],
}

impl BilliardGeometry {
    /// Position and inward normal of a boundary point on the canonical copy.
    pub fn boundary_point(&self, c: &CollisionCoordinate) -> ([f64; 2], [f64; 2]) {
        let s = &self.scatterers()[c.scatterer_id];
        let theta = c.r / s.radius;
        let n = [theta.cos(), theta.sin()];
        (
            [s.center[0] + s.radius * n[0], s.center[1] + s.radius * n[1]],
            n,
        )
    }

    /// Traces the outgoing ray of `c` to the next collision and reflects.
    pub fn flight(&self, c: &CollisionCoordinate) -> Result<Flight, DynamicsError> {
        self.validate_point(c)?;
        if c.phi.abs() > FRAC_PI_2 - SINGULAR_MARGIN {
            return Err(DynamicsError::Singular {
                step: 0,
                detail: format!("tangential departure, phi = {}", c.phi),
            });
        }
        let (p, n) = self.boundary_point(c);
        let (sin, cos) = c.phi.sin_cos();
        let v = [cos * n[0] - sin * n[1], sin * n[0] + cos * n[1]];
        let hit = self
            .trace(p, v, Some(c.scatterer_id), self.cap())
            .ok_or(DynamicsError::HorizonCap { cap: self.cap() })?;
        let s = &self.scatterers()[hit.id];
        let q = [p[0] + hit.t * v[0], p[1] + hit.t * v[1]];
        let mut m = [
            q[0] - (s.center[0] + hit.offset[0] as f64),
            q[1] - (s.center[1] + hit.offset[1] as f64),
        ];
        let norm = m[0].hypot(m[1]);
        m = [m[0] / norm, m[1] / norm];
        let dot = v[0] * m[0] + v[1] * m[1];
        let w = [v[0] - 2.0 * dot * m[0], v[1] - 2.0 * dot * m[1]];
        let phi = (m[0] * w[1] - m[1] * w[0]).atan2(m[0] * w[0] + m[1] * w[1]);
        let mut r = m[1].atan2(m[0]).rem_euclid(TAU) * s.radius;
        if r >= s.perimeter() {
            r = 0.0;
        }
        Ok(Flight {
            next: CollisionCoordinate {
                scatterer_id: hit.id,
                r,
                phi,
            },
            free_path: hit.t,
            offset: hit.offset,
            departure: p,
            arrival: q,
        })
    }

    /// The billiard map `F` and the length of the flight.
    pub fn collision_map(
        &self,
        c: &CollisionCoordinate,
    ) -> Result<(CollisionCoordinate, f64), DynamicsError> {
        self.flight(c).map(|f| (f.next, f.free_path))
    }

    /// `F^{-1} = I F I` with the involution `I(r, phi) = (r, -phi)`.
    pub fn inverse_collision_map(
        &self,
        c: &CollisionCoordinate,
    ) -> Result<(CollisionCoordinate, f64), DynamicsError> {
        self.collision_map(&c.reversed())
            .map(|(next, tau)| (next.reversed(), tau))
    }

    /// Invariant measure `cos(phi) dr dphi / (2 |dQ|)`: scatterer by
    /// perimeter, `r` uniform, `phi = arcsin(2u - 1)`.
    pub fn sample_srb(&self, rng: &mut dyn RngCore) -> CollisionCoordinate {
        let total = self.total_perimeter();
        let mut pick = rng.random::<f64>() * total;
        let mut id = self.scatterers().len() - 1;
        for (i, s) in self.scatterers().iter().enumerate() {
            if pick < s.perimeter() {
                id = i;
                break;
            }
            pick -= s.perimeter();
        }
        let perimeter = self.scatterers()[id].perimeter();
        let r = (rng.random::<f64>() * perimeter).min(perimeter * (1.0 - f64::EPSILON));
        let phi = (2.0 * rng.random::<f64>() - 1.0).asin();
        CollisionCoordinate {
            scatterer_id: id,
            r,
            phi,
        }
    }
}

impl DynamicalSystem for BilliardGeometry {
    type Point = CollisionCoordinate;

    fn descriptor(&self) -> SystemDescriptor {
        SystemDescriptor {
            family: "billiard".into(),
            parameters: serde_json::json!({
                "scatterers": self.scatterers(),
                "cap": self.cap(),
                "horizon": self.horizon(),
            }),
        }
    }

    fn validate_point(&self, c: &CollisionCoordinate) -> Result<(), DynamicsError> {
        let Some(s) = self.scatterers().get(c.scatterer_id) else {
            return Err(DynamicsError::Domain(format!(
                "scatterer id {} out of range",
                c.scatterer_id
            )));
        };
        if !(c.r >= 0.0 && c.r < s.perimeter()) {
            return Err(DynamicsError::Domain(format!(
                "arc length {} outside [0, {})",
                c.r,
                s.perimeter()
            )));
        }
        if !(c.phi.abs() <= FRAC_PI_2) {
            return Err(DynamicsError::Domain(format!("|phi| = {} > pi/2", c.phi.abs())));
        }
        Ok(())
    }

    fn advance(&self, c: &mut CollisionCoordinate) -> Result<(), DynamicsError> {
        *c = self.collision_map(c)?.0;
        Ok(())
    }

    fn sample_invariant(
        &self,
        rng: &mut dyn RngCore,
        _horizon: usize,
    ) -> Result<CollisionCoordinate, DynamicsError> {
        Ok(self.sample_srb(rng))
    }
}

/// `phi`, bounded by `pi/2`.
pub fn reflection_angle() -> Observable<CollisionCoordinate> {
    Observable::real("reflection-angle", |c: &CollisionCoordinate| c.phi).with_sup_bound(FRAC_PI_2)
}

/// Length of the flight leaving `c`. Points whose flight fails (tangential or
/// beyond the cap) evaluate to the cap.
pub fn free_path(geom: Arc<BilliardGeometry>) -> Observable<CollisionCoordinate> {
    let cap = geom.cap();
    Observable::real("free-path", move |c: &CollisionCoordinate| {
        geom.collision_map(c).map_or(cap, |(_, tau)| tau)
    })
    .with_sup_bound(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::geometry::{Scatterer, DEFAULT_CAP};
    use crate::rng::StreamSeed;
    use crate::stats::{batch_mean_se, ks_critical, ks_statistic};
    use std::f64::consts::PI;

    fn one_disk() -> BilliardGeometry {
        BilliardGeometry::one_disk(0.25, DEFAULT_CAP).unwrap()
    }

    /// Finite horizon: every rational corridor is blocked.
    fn two_disk() -> BilliardGeometry {
        BilliardGeometry::new(
            vec![
                Scatterer {
                    center: [0.0, 0.0],
                    radius: 0.4,
                },
                Scatterer {
                    center: [0.5, 0.5],
                    radius: 0.2,
                },
            ],
            DEFAULT_CAP,
        )
        .unwrap()
    }

    #[test]
    fn leftmost_point_flies_to_neighbour() {
        let g = one_disk();
        let c = CollisionCoordinate::new(&g, 0, PI * 0.25, 0.0).unwrap();
        let (next, tau) = g.collision_map(&c).unwrap();
        assert!((tau - 0.5).abs() < 1e-14);
        assert_eq!(next.scatterer_id, 0);
        assert!(next.r.abs() < 1e-14 || (next.r - TAU * 0.25).abs() < 1e-14);
        assert!(next.phi.abs() < 1e-14);
    }

    #[test]
    fn tangential_input_is_singular() {
        let g = one_disk();
        let c = CollisionCoordinate::new(&g, 0, 0.1, FRAC_PI_2).unwrap();
        assert!(matches!(g.collision_map(&c), Err(DynamicsError::Singular { .. })));
        assert!(CollisionCoordinate::new(&g, 0, 0.1, 1.6).is_err());
        assert!(CollisionCoordinate::new(&g, 0, 2.0, 0.0).is_err());
        assert!(CollisionCoordinate::new(&g, 1, 0.1, 0.0).is_err());
    }

    #[test]
    fn corridor_flight_hits_the_cap() {
        let g = one_disk().with_cap(5.0).unwrap();
        // Leaving the top point straight up runs along x = 0.5 forever.
        let c = CollisionCoordinate::new(&g, 0, PI * 0.125, 0.0).unwrap();
        assert_eq!(g.collision_map(&c).unwrap().1, 0.5);
        // Top point, almost horizontal: enters the corridor above the disk.
        let c = CollisionCoordinate::new(&g, 0, PI * 0.125, -FRAC_PI_2 + 1e-6).unwrap();
        assert!(matches!(g.collision_map(&c), Err(DynamicsError::HorizonCap { .. })));
    }

    #[test]
    fn free_path_is_the_unfolded_distance() {
        let g = two_disk();
        let seed = StreamSeed::new(5, "billiard/distance");
        let mut rng = seed.member(0);
        for _ in 0..2000 {
            let c = g.sample_srb(&mut rng);
            let f = g.flight(&c).unwrap();
            let d = (f.arrival[0] - f.departure[0]).hypot(f.arrival[1] - f.departure[1]);
            assert!((d - f.free_path).abs() < 1e-12);
            assert!(f.next.phi.abs() <= FRAC_PI_2);
        }
    }

    #[test]
    fn reversal_is_an_involution() {
        for g in [one_disk().with_cap(1e4).unwrap(), two_disk()] {
            let seed = StreamSeed::new(6, "billiard/reversal");
            let mut rng = seed.member(0);
            for _ in 0..1000 {
                let c = g.sample_srb(&mut rng);
                let (y, _) = g.collision_map(&c).unwrap();
                let (back, _) = g.inverse_collision_map(&y).unwrap();
                let perimeter = g.scatterers()[c.scatterer_id].perimeter();
                let dr = (back.r - c.r).abs();
                assert_eq!(back.scatterer_id, c.scatterer_id);
                assert!(dr.min(perimeter - dr) < 1e-9, "{c:?} -> {back:?}");
                assert!((back.phi - c.phi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn srb_moments() {
        let g = two_disk();
        let seed = StreamSeed::new(7, "billiard/srb-moments");
        let n = 100_000;
        let mut sin_b = Vec::new();
        let mut cos_b = Vec::new();
        let mut first = 0usize;
        for b in 0..32 {
            let mut rng = seed.member(b);
            let (mut s, mut c) = (0.0, 0.0);
            let m = n / 32;
            for _ in 0..m {
                let x = g.sample_srb(&mut rng);
                s += x.phi.sin();
                c += x.phi.cos();
                first += (x.scatterer_id == 0) as usize;
            }
            sin_b.push(s / m as f64);
            cos_b.push(c / m as f64);
        }
        let (ms, ses) = batch_mean_se(&sin_b);
        assert!(ms.abs() <= 3.0 * ses);
        let (mc, _) = batch_mean_se(&cos_b);
        assert!((mc / (PI / 4.0) - 1.0).abs() < 0.01);
        // Perimeter weights 0.4 : 0.2.
        let frac = first as f64 / (32 * (n / 32)) as f64;
        assert!((frac - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn srb_is_invariant_under_the_map() {
        let g = two_disk();
        let seed = StreamSeed::new(8, "billiard/srb-invariance");
        let mut rng = seed.member(0);
        let mut phis = Vec::new();
        let mut arcs = Vec::new();
        for _ in 0..20_000 {
            let c = g.sample_srb(&mut rng);
            let (y, _) = g.collision_map(&c).unwrap();
            phis.push(y.phi);
            arcs.push(y.r / g.scatterers()[y.scatterer_id].perimeter());
        }
        let crit = ks_critical(phis.len(), 0.01);
        assert!(ks_statistic(&mut phis, |p| 0.5 * (1.0 + p.sin())) < crit);
        assert!(ks_statistic(&mut arcs, |u| u) < crit);
    }

    #[test]
    fn observables_evaluate() {
        let g = Arc::new(one_disk());
        let c = CollisionCoordinate::new(&g, 0, PI * 0.25, 0.0).unwrap();
        assert_eq!(reflection_angle().eval_re(&c), 0.0);
        assert!((free_path(g.clone()).eval_re(&c) - 0.5).abs() < 1e-14);
        let t = CollisionCoordinate::new(&g, 0, 0.0, FRAC_PI_2).unwrap();
        assert_eq!(free_path(g).eval_re(&t), DEFAULT_CAP);
    }
}
