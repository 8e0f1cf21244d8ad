use rand::RngCore;
use serde_json::json;

use super::{DynamicalSystem, DynamicsError, FirstCoordinate, SystemDescriptor};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// A point of the 2-torus on the grid `2^-64 Z^2 / Z^2`.
///
/// Integer matrices act on the grid by wrapping `u64` arithmetic, which is
/// reduction mod 1 done exactly, so orbits never drift. The grid is invariant
/// and Lebesgue-uniform grid points have exactly uniform images, so
/// ensemble statistics of trigonometric observables match the continuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    raw: [u64; 2],
}

fn to_raw(x: f64) -> Result<u64, DynamicsError> {
    if (0.0..1.0).contains(&x) {
        Ok((x * TWO_POW_64).floor() as u64)
    } else {
        Err(DynamicsError::Domain(format!("torus coordinate {x} not in [0, 1)")))
    }
}

fn from_raw(r: u64) -> f64 {
    let v = r as f64 / TWO_POW_64;
    if v >= 1.0 {
        BELOW_ONE
    } else {
        v
    }
}

impl TorusPoint {
    /// Coordinates are truncated to multiples of `2^-64`.
    pub fn from_f64(x1: f64, x2: f64) -> Result<Self, DynamicsError> {
        Ok(Self {
            raw: [to_raw(x1)?, to_raw(x2)?],
        })
    }

    pub fn from_raw(raw: [u64; 2]) -> Self {
        Self { raw }
    }

    pub fn raw(&self) -> [u64; 2] {
        self.raw
    }

    #[inline]
    pub fn x1(&self) -> f64 {
        from_raw(self.raw[0])
    }

    #[inline]
    pub fn x2(&self) -> f64 {
        from_raw(self.raw[1])
    }
}

impl FirstCoordinate for TorusPoint {
    #[inline]
    fn first_coordinate(&self) -> f64 {
        self.x1()
    }
}

/// `x -> A x mod 1` for a hyperbolic `A` in `GL(2, Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToralAutomorphism {
    matrix: [[i64; 2]; 2],
    expanding_eigenvalue: f64,
}

impl ToralAutomorphism {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self, DynamicsError> {
        let [[a, b], [c, d]] = matrix;
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        let tr = a as i128 + d as i128;
        if det != 1 && det != -1 {
            return Err(DynamicsError::InvalidSystem(format!(
                "matrix {matrix:?} has determinant {det}, expected +-1"
            )));
        }
        // Eigenvalues solve z^2 - tr z + det = 0; none on the unit circle iff
        // |tr| > 2 (det = 1) or tr != 0 (det = -1).
        let hyperbolic = if det == 1 { tr.abs() > 2 } else { tr != 0 };
        if !hyperbolic {
            return Err(DynamicsError::InvalidSystem(format!(
                "matrix {matrix:?} has an eigenvalue on the unit circle"
            )));
        }
        let tr = tr as f64;
        let expanding_eigenvalue = tr.abs() / 2.0 + (tr * tr / 4.0 - det as f64).sqrt();
        Ok(Self {
            matrix,
            expanding_eigenvalue,
        })
    }

    /// `[[2, 1], [1, 1]]`.
    pub fn cat_map() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    /// Modulus of the expanding eigenvalue.
    pub fn expansion(&self) -> f64 {
        self.expanding_eigenvalue
    }

    /// Contraction rate `nu` along stable directions.
    pub fn nu(&self) -> f64 {
        1.0 / self.expanding_eigenvalue
    }

    #[inline]
    fn apply(&self, raw: [u64; 2]) -> [u64; 2] {
        let [[a, b], [c, d]] = self.matrix;
        let [x, y] = raw;
        [
            (a as u64).wrapping_mul(x).wrapping_add((b as u64).wrapping_mul(y)),
            (c as u64).wrapping_mul(x).wrapping_add((d as u64).wrapping_mul(y)),
        ]
    }
}

impl DynamicalSystem for ToralAutomorphism {
    type Point = TorusPoint;

    fn descriptor(&self) -> SystemDescriptor {
        SystemDescriptor {
            family: "toral".into(),
            parameters: json!({ "matrix": self.matrix, "nu": self.nu() }),
        }
    }

    fn validate_point(&self, _x: &TorusPoint) -> Result<(), DynamicsError> {
        Ok(())
    }

    #[inline]
    fn advance(&self, x: &mut TorusPoint) -> Result<(), DynamicsError> {
        x.raw = self.apply(x.raw);
        Ok(())
    }

    fn sample_invariant(
        &self,
        rng: &mut dyn RngCore,
        _horizon: usize,
    ) -> Result<TorusPoint, DynamicsError> {
        Ok(TorusPoint {
            raw: [rng.next_u64(), rng.next_u64()],
        })
    }
}
