use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::collision::CollisionCoordinate;
use crate::dynamics::DynamicsError;

/// Homogeneity strips `H_{+-k} = {pi/2 - k^-2 < +-phi <= pi/2 - (k+1)^-2}`
/// for `k >= k0`; everything with `|phi| <= pi/2 - k0^-2` is the central strip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HStripParams {
    k0: u32,
}

impl Default for HStripParams {
    fn default() -> Self {
        Self { k0: 2 }
    }
}

impl HStripParams {
    pub fn new(k0: u32) -> Result<Self, DynamicsError> {
        if k0 == 0 {
            return Err(DynamicsError::InvalidSystem("k0 must be >= 1".into()));
        }
        Ok(Self { k0 })
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }
}

/// Connected component of the collision space cut by the strip boundaries.
///
/// `strip` is 0 for the central strip and `+-k` near `phi = +-pi/2`;
/// tangential points carry `+-i64::MAX`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StripLabel {
    pub scatterer_id: usize,
    pub strip: i64,
    pub tangential: bool,
}

pub fn h_strip_label(c: &CollisionCoordinate, params: HStripParams) -> StripLabel {
    let gap = FRAC_PI_2 - c.phi.abs();
    let sign = if c.phi < 0.0 { -1 } else { 1 };
    let k0 = params.k0 as f64;
    let (strip, tangential) = if gap <= 0.0 {
        (sign * i64::MAX, true)
    } else if gap >= 1.0 / (k0 * k0) {
        (0, false)
    } else {
        // (k+1)^-2 <= gap < k^-2  <=>  k = ceil(gap^-1/2) - 1
        let k = ((1.0 / gap.sqrt()).ceil() - 1.0).max(k0);
        (sign * k as i64, false)
    };
    StripLabel {
        scatterer_id: c.scatterer_id,
        strip,
        tangential,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(phi: f64) -> CollisionCoordinate {
        CollisionCoordinate {
            scatterer_id: 0,
            r: 0.0,
            phi,
        }
    }

    #[test]
    fn examples() {
        let p = HStripParams::new(2).unwrap();
        assert_eq!(h_strip_label(&at(0.0), p).strip, 0);
        assert_eq!(h_strip_label(&at(FRAC_PI_2 - 0.15), p).strip, 2);
        assert_eq!(h_strip_label(&at(-(FRAC_PI_2 - 0.15)), p).strip, -2);
        let t = h_strip_label(&at(FRAC_PI_2), p);
        assert!(t.tangential);
        assert_eq!(t.strip, i64::MAX);
        // Boundary pi/2 - 1/4 closes the central strip.
        assert_eq!(h_strip_label(&at(FRAC_PI_2 - 0.25), p).strip, 0);
        assert!(HStripParams::new(0).is_err());
    }

    #[test]
    fn label_matches_defining_inequalities() {
        let p = HStripParams::new(3).unwrap();
        for k in 3..200i64 {
            let mid = 0.5 * ((k as f64).powi(-2) + ((k + 1) as f64).powi(-2));
            assert_eq!(h_strip_label(&at(FRAC_PI_2 - mid), p).strip, k);
        }
    }

    proptest! {
        #[test]
        fn labels_are_monotone_in_phi(a in (1e-12 - FRAC_PI_2)..FRAC_PI_2, b in (1e-12 - FRAC_PI_2)..FRAC_PI_2, k0 in 1u32..6) {
            let p = HStripParams::new(k0).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (l, h) = (h_strip_label(&at(lo), p), h_strip_label(&at(hi), p));
            prop_assert!(l.strip <= h.strip);
            prop_assert!(!l.tangential && !h.tangential);
            prop_assert!(l.strip == 0 || l.strip.unsigned_abs() >= k0 as u64);
        }
    }
}
