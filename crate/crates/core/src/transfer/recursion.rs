use serde::{Deserialize, Serialize};

use super::{transfer_apply, GridFunction, TransferError};
use crate::dynamics::{BranchFormula, IntervalMap};
use crate::stats::least_squares;
use crate::Complex64;

/// Constants of `V(L h) <= c V(h) + A ||h||_1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyConstants {
    pub contraction: f64,
    pub a: f64,
}

impl LyConstants {
    /// For maps whose base branches are all affine and onto `[0, 1)` the
    /// branch-splitting estimate `V(L h) <= V(h) / lambda` holds with no
    /// `L1` term. Otherwise the generic `c = 2 / lambda` is used with the
    /// supplied `a`, which requires `lambda > 2`.
    pub fn for_map(map: &dyn IntervalMap, a: f64) -> Result<Self, TransferError> {
        let full_affine = map.base_branches().iter().all(|b| {
            matches!(b.formula(), BranchFormula::Affine { .. }) && b.image() == (0.0, 1.0)
        });
        if full_affine {
            return Ok(Self {
                contraction: 1.0 / map.expansion(),
                a: 0.0,
            });
        }
        let lambda = map.expansion();
        if !(lambda > 2.0) {
            return Err(TransferError::Precondition(format!(
                "Lasota-Yorke constants need inf |F'| > 2, got {lambda}; use an iterate power"
            )));
        }
        Ok(Self {
            contraction: 2.0 / lambda,
            a,
        })
    }
}

/// One step of the block variation recursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationStep {
    /// Index `j` of `H_j = L^j (phi g g o F ... g o F^j)`.
    pub step: usize,
    pub measured: f64,
    pub bound: f64,
}

/// `g = exp(i * scale * f)` on the grid of `f`.
pub fn unimodular_factor(f: &GridFunction, scale: f64) -> GridFunction {
    f.map(|v| Complex64::new(0.0, scale * v.re).exp())
        .with_descriptor(format!("exp(i {scale} {})", f.descriptor()))
}

/// Iterates `H_0 = phi g`, `H_j = L(H_{j-1}) g` for `j < p` and records
/// `V(H_j)` next to the analytic bound
/// `c^j V(phi g) + (A + ||phi||_inf V(g)) / (1 - c)`.
///
/// `H_{p-1} = L^{p-1}(phi w_1)` for the block variable `w_1`. Returns the
/// steps and `H_{p-1}`.
pub fn variation_recursion(
    map: &dyn IntervalMap,
    g: &GridFunction,
    p: usize,
    phi: &GridFunction,
    ly: LyConstants,
) -> Result<(Vec<VariationStep>, GridFunction), TransferError> {
    if p == 0 {
        return Err(TransferError::Precondition("block length p must be >= 1".into()));
    }
    if !(ly.contraction < 1.0) {
        return Err(TransferError::Precondition(format!(
            "contraction {} must be < 1",
            ly.contraction
        )));
    }
    let mut h = phi.mul(g)?;
    let v0 = h.total_variation();
    let plateau = (ly.a + phi.sup_norm() * g.total_variation()) / (1.0 - ly.contraction);
    let mut steps = Vec::with_capacity(p);
    steps.push(VariationStep {
        step: 0,
        measured: v0,
        bound: v0 + plateau,
    });
    for j in 1..p {
        h = transfer_apply(map, &h).mul(g)?;
        steps.push(VariationStep {
            step: j,
            measured: h.total_variation(),
            bound: ly.contraction.powi(j as i32) * v0 + plateau,
        });
    }
    Ok((steps, h))
}

/// `Gamma(q) = ||L^{q+1} h - (int h) phi||_1` for `q = 0..=q_max`.
///
/// With `h = L^{p-1}(phi w_1)` and any `|V| <= 1`,
/// `|<w_1 . V o F^{p+q}> - <w_1><V>| <= Gamma(q)`, so the profile is a
/// deterministic envelope for the multiple-correlation gap.
pub fn gap_profile(
    map: &dyn IntervalMap,
    h: &GridFunction,
    phi: &GridFunction,
    q_max: usize,
) -> Result<Vec<f64>, TransferError> {
    let mass = h.integral();
    let limit = phi.scale(mass);
    let mut cur = transfer_apply(map, h);
    let mut out = Vec::with_capacity(q_max + 1);
    for q in 0..=q_max {
        if q > 0 {
            cur = transfer_apply(map, &cur);
        }
        out.push(cur.sub(&limit)?.l1_norm());
    }
    Ok(out)
}

/// Exponential fit `gamma(q) ~ K rho^q` over the positive entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricFit {
    pub prefactor: f64,
    pub rho: f64,
    /// RMS deviation in natural-log scale.
    pub log_residual: f64,
    pub points: usize,
}

/// Least squares of `ln gamma(q)` against `q`, ignoring entries below
/// `floor` (grid round-off).
pub fn fit_geometric(gamma: &[f64], floor: f64) -> Result<GeometricFit, TransferError> {
    let (qs, logs): (Vec<f64>, Vec<f64>) = gamma
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > floor)
        .map(|(q, g)| (q as f64, g.ln()))
        .unzip();
    if qs.len() < 3 {
        return Err(TransferError::Precondition(format!(
            "only {} profile entries above {floor:e}",
            qs.len()
        )));
    }
    let fit = least_squares(&qs, &logs).expect("distinct abscissae");
    Ok(GeometricFit {
        prefactor: fit.intercept.exp(),
        rho: fit.slope.exp(),
        log_residual: fit.rms_residual,
        points: qs.len(),
    })
}
