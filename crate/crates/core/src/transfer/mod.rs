//! Transfer operators of piecewise expanding interval maps on uniform grids.

mod grid;
mod operator;
mod recursion;
mod ulam;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::GridFunction;
pub use operator::{
    lasota_yorke_residual, ly_grid_allowance, transfer_apply, transfer_apply_base,
    verify_transfer_identity,
};
pub use recursion::{
    fit_geometric, gap_profile, unimodular_factor, variation_recursion, GeometricFit, LyConstants,
    VariationStep,
};
pub use ulam::{ulam_density, UlamMatrix};

/// Default grid size.
pub const DEFAULT_GRID: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("grid error: {0}")]
    Grid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("power iteration did not converge in {iterations} steps (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

/// Constants of the expanding-map correlation bound
/// `|<f . g o F^n> - <f><g>| <= K rho^n ||f||_1 (||g||_1 + b V(g))` with
/// decay base `rho = 1 / decay_base`, together with the Lasota-Yorke data
/// `V(L g) <= 2 V(g) / lambda + A ||g||_1`.
///
/// `decay_base > 1`, so bounds decay in `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwConstants {
    pub k: f64,
    pub decay_base: f64,
    pub b: f64,
    pub a: f64,
    pub lambda: f64,
}

impl Default for PwConstants {
    fn default() -> Self {
        Self {
            k: 1.0,
            decay_base: 2.0,
            b: 1.0,
            a: 1.0,
            lambda: 4.0,
        }
    }
}

impl PwConstants {
    pub fn validate(&self) -> Result<(), TransferError> {
        let bad = |m: String| Err(TransferError::Precondition(m));
        if !(self.k > 0.0 && self.b > 0.0 && self.a > 0.0) {
            return bad(format!("K = {}, b = {}, A = {} must be > 0", self.k, self.b, self.a));
        }
        if !(self.decay_base > 1.0) {
            return bad(format!("decay base {} must be > 1", self.decay_base));
        }
        if !(self.lambda > 2.0) {
            return bad(format!("lambda {} must be > 2", self.lambda));
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        1.0 / self.decay_base
    }
}

/// `K rho^n ||f||_1 (||g||_1 + b V(g))`.
pub fn pw_pair_bound(
    f_l1: f64,
    g_l1: f64,
    g_tv: f64,
    c: &PwConstants,
    n: u32,
) -> Result<f64, TransferError> {
    c.validate()?;
    if !(f_l1 >= 0.0 && g_l1 >= 0.0 && g_tv >= 0.0) {
        return Err(TransferError::Precondition("norms must be >= 0".into()));
    }
    Ok(c.k * c.rho().powi(n as i32) * f_l1 * (g_l1 + c.b * g_tv))
}

/// Doubling-map bound `V(L^{p-1} w_1) <= 4 V(g)` for a unimodular block
/// factor `g`; independent of `p`.
pub fn doubling_block_tv_bound(g_tv: f64, _p: usize) -> f64 {
    4.0 * g_tv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_bound_examples() {
        let c = PwConstants {
            k: 1.0,
            decay_base: 2.0,
            b: 1.0,
            ..Default::default()
        };
        assert_eq!(pw_pair_bound(1.0, 1.0, 1.0, &c, 3).unwrap(), 0.25);
        assert_eq!(pw_pair_bound(1.0, 1.0, 0.0, &c, 3).unwrap(), 0.125);
        let b4 = pw_pair_bound(0.7, 1.3, 2.0, &c, 4).unwrap();
        let b5 = pw_pair_bound(0.7, 1.3, 2.0, &c, 5).unwrap();
        assert!((b4 / b5 - 2.0).abs() < 1e-14);
        assert!(pw_pair_bound(1.0, 1.0, 1.0, &PwConstants { decay_base: 0.5, ..c }, 1).is_err());
    }

    #[test]
    fn block_tv_bound_examples() {
        assert_eq!(doubling_block_tv_bound(1.0, 10), 4.0);
        assert_eq!(doubling_block_tv_bound(1.0, 251), 4.0);
        assert_eq!(doubling_block_tv_bound(0.0, 39), 0.0);
    }
}
