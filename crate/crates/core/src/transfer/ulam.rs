use serde::{Deserialize, Serialize};

use super::{GridFunction, TransferError};
use crate::dynamics::IntervalMap;
use crate::Complex64;

const TOLERANCE: f64 = 1e-14;
const MAX_ITERATIONS: usize = 10_000;

/// Ulam discretisation: `P[i][j]` is the fraction of bin `i` that the base
/// map sends into bin `j`. Rows are stored sparsely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlamMatrix {
    bins: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl UlamMatrix {
    /// Transition masses from exact preimages: the part of bin `i` mapped
    /// into bin `j` by a branch is `|h(y_lo) - h(y_hi)|` over the overlap.
    pub fn build(map: &dyn IntervalMap, bins: usize) -> Result<Self, TransferError> {
        if bins < 16 {
            return Err(TransferError::Grid(format!("Ulam needs at least 16 bins, got {bins}")));
        }
        let width = 1.0 / bins as f64;
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); bins];
        for b in map.base_branches() {
            let (lo, hi) = b.domain();
            let first = (lo * bins as f64).floor() as usize;
            let last = ((hi * bins as f64).ceil() as usize).min(bins);
            for (i, row) in rows.iter_mut().enumerate().take(last).skip(first) {
                let a = lo.max(i as f64 * width);
                let z = hi.min((i + 1) as f64 * width);
                if z <= a {
                    continue;
                }
                let (fa, fz) = (b.forward(a), b.forward(z));
                let (ylo, yhi) = (fa.min(fz).max(0.0), fa.max(fz).min(1.0));
                let jlo = (ylo * bins as f64).floor() as usize;
                let jhi = ((yhi * bins as f64).ceil() as usize).min(bins);
                for j in jlo..jhi {
                    let s = ylo.max(j as f64 * width);
                    let t = yhi.min((j + 1) as f64 * width);
                    if t <= s {
                        continue;
                    }
                    let mass = (b.inverse(t) - b.inverse(s)).abs() * bins as f64;
                    if mass > 0.0 {
                        row.push((j, mass));
                    }
                }
            }
        }
        Ok(Self { bins, rows })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// `(row, column, value)` entries.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
            .collect()
    }

    /// `pi P`
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.bins];
        for (p, row) in pi.iter().zip(&self.rows) {
            for &(j, v) in row {
                out[j] += p * v;
            }
        }
        out
    }

    /// Leading left fixed vector by lazy power iteration
    /// `pi <- (pi + pi P) / 2`, normalised to total mass 1.
    pub fn stationary(&self) -> Result<Vec<f64>, TransferError> {
        let n = self.bins;
        let mut pi = vec![1.0 / n as f64; n];
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            let moved = self.left_multiply(&pi);
            let mass: f64 = moved.iter().sum();
            let next: Vec<f64> = pi
                .iter()
                .zip(&moved)
                .map(|(a, b)| 0.5 * (a + b / mass))
                .collect();
            residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if residual < TOLERANCE {
                return Ok(pi);
            }
        }
        Err(TransferError::Convergence {
            iterations: MAX_ITERATIONS,
            residual,
        })
    }
}

/// Invariant density of the base map from its Ulam matrix, as a grid
/// function with `phi(j / bins) = bins * pi_j` and integral 1.
///
/// The base map is used for iterate powers too: its density is invariant
/// under every power.
pub fn ulam_density(map: &dyn IntervalMap, bins: usize) -> Result<GridFunction, TransferError> {
    let pi = UlamMatrix::build(map, bins)?.stationary()?;
    let values = pi
        .iter()
        .map(|p| Complex64::new(p * bins as f64, 0.0))
        .collect();
    GridFunction::new(values, format!("ulam density of {} ({bins} bins)", map.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Branch, BranchFormula, DoublingMap, PiecewiseExpandingMap, TentMap};
    use crate::transfer::transfer_apply;

    fn affine(lo: f64, hi: f64, slope: f64, intercept: f64) -> Branch {
        Branch::new(lo, hi, BranchFormula::Affine { slope, intercept }).unwrap()
    }

    fn max_dev_from_one(phi: &GridFunction) -> f64 {
        phi.values().iter().map(|v| (v.re - 1.0).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn lebesgue_maps_have_flat_density() {
        for map in [
            Box::new(DoublingMap::new(1).unwrap()) as Box<dyn IntervalMap>,
            Box::new(TentMap::new(1).unwrap()),
            Box::new(DoublingMap::new(3).unwrap()),
        ] {
            let phi = ulam_density(map.as_ref(), 1 << 10).unwrap();
            assert!(max_dev_from_one(&phi) < 1e-10, "{}", map.name());
        }
    }

    #[test]
    fn permuted_doubling_keeps_lebesgue() {
        // Doubling after swapping the quarters [1/4, 1/2) and [1/2, 3/4).
        let map = PiecewiseExpandingMap::new(
            "permuted-doubling",
            vec![
                affine(0.0, 0.25, 2.0, 0.0),
                affine(0.25, 0.5, 2.0, -0.5),
                affine(0.5, 0.75, 2.0, -0.5),
                affine(0.75, 1.0, 2.0, -1.0),
            ],
            1,
        )
        .unwrap();
        let phi = ulam_density(&map, 1 << 8).unwrap();
        assert!(max_dev_from_one(&phi) < 1e-10);
    }

    #[test]
    fn nonuniform_density_is_a_fixed_point() {
        // The right branch only covers [0, 3/4), so the density is not flat.
        let map = PiecewiseExpandingMap::new(
            "lopsided",
            vec![affine(0.0, 0.5, 2.0, 0.0), affine(0.5, 1.0, 1.5, -0.75)],
            1,
        )
        .unwrap();
        let phi = ulam_density(&map, 1 << 10).unwrap();
        assert!((phi.integral().re - 1.0).abs() < 1e-3);
        let lphi = transfer_apply(&map, &phi);
        let dev = lphi.sub(&phi).unwrap().l1_norm();
        assert!(dev < 1e-2, "{dev}");
        assert!(phi.values()[0].re > phi.values()[1000].re + 0.1);
    }

    #[test]
    fn too_few_bins_rejected() {
        assert!(ulam_density(&DoublingMap::new(1).unwrap(), 8).is_err());
    }

    #[test]
    fn triplets_rows_are_stochastic() {
        let m = UlamMatrix::build(&TentMap::new(1).unwrap(), 32).unwrap();
        let mut sums = vec![0.0; 32];
        for (i, _, v) in m.triplets() {
            sums[i] += v;
        }
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }
}
