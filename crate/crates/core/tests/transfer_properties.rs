use std::f64::consts::TAU;

use proptest::prelude::*;

use corrlab::dynamics::{
    Branch, BranchFormula, DoublingMap, IntervalMap, PiecewiseExpandingMap, TentMap,
};
use corrlab::transfer::{ly_grid_allowance, transfer_apply, ulam_density, GridFunction};

const GRID: usize = 2048;

/// `a_0 + sum_m a_m cos(2 pi m x + b_m)`, shifted to be nonnegative when
/// `positive` is set.
fn trig(coeffs: &[(f64, f64)], positive: bool) -> GridFunction {
    let shift = if positive {
        coeffs.iter().map(|(a, _)| a.abs()).sum()
    } else {
        0.0
    };
    GridFunction::from_real_fn(GRID, "trig", |x| {
        shift
            + coeffs
                .iter()
                .enumerate()
                .map(|(m, (a, b))| a * (TAU * (m + 1) as f64 * x + b).cos())
                .sum::<f64>()
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, 0.0..TAU), 1..6)
}

/// Full affine branches with random breakpoints and orientations.
fn random_full_branch_map(cuts: &[f64], flips: &[bool]) -> PiecewiseExpandingMap {
    let mut points = vec![0.0];
    points.extend(cuts);
    points.push(1.0);
    let branches = points
        .windows(2)
        .zip(flips)
        .map(|(w, &flip)| {
            let (lo, hi) = (w[0], w[1]);
            let formula = if flip {
                BranchFormula::Affine { slope: -1.0 / (hi - lo), intercept: hi / (hi - lo) }
            } else {
                BranchFormula::Affine { slope: 1.0 / (hi - lo), intercept: -lo / (hi - lo) }
            };
            Branch::new(lo, hi, formula).unwrap()
        })
        .collect();
    PiecewiseExpandingMap::new("random", branches, 1).unwrap()
}

fn cuts() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (prop::collection::btree_set(5u32..95, 1..4), prop::collection::vec(any::<bool>(), 5)).prop_map(
        |(set, flips)| (set.into_iter().map(|c| c as f64 / 100.0).collect(), flips),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transfer_operator_is_positive(c in coeffs(), (cs, flips) in cuts()) {
        let g = trig(&c, true);
        let map = random_full_branch_map(&cs, &flips);
        for lg in [transfer_apply(&DoublingMap::new(1).unwrap(), &g), transfer_apply(&map, &g)] {
            prop_assert!(lg.values().iter().all(|v| v.re >= -1e-12));
        }
    }

    #[test]
    fn transfer_operator_preserves_integrals(c in coeffs(), (cs, flips) in cuts()) {
        let g = trig(&c, false);
        let allowance = 2.0 * g.total_variation() / GRID as f64;
        let maps: Vec<Box<dyn IntervalMap>> = vec![
            Box::new(DoublingMap::new(1).unwrap()),
            Box::new(TentMap::new(1).unwrap()),
            Box::new(random_full_branch_map(&cs, &flips)),
        ];
        for map in &maps {
            let drift = (transfer_apply(map.as_ref(), &g).integral() - g.integral()).norm();
            prop_assert!(drift < allowance.max(1e-14), "{}: {drift} vs {allowance}", map.name());
        }
    }

    #[test]
    fn doubling_halves_variation(c in coeffs()) {
        let g = trig(&c, false);
        let lg = transfer_apply(&DoublingMap::new(1).unwrap(), &g);
        prop_assert!(lg.total_variation() <= 0.5 * g.total_variation() + ly_grid_allowance(&g));
    }

    #[test]
    fn inverse_branches_are_consistent((cs, flips) in cuts()) {
        let map = random_full_branch_map(&cs, &flips);
        for b in map.base_branches() {
            for j in 0..=256 {
                let y = j as f64 / 256.0;
                if b.contains_image(y) {
                    prop_assert!((b.forward(b.inverse(y)) - y).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn ulam_densities_are_fixed_points() {
    let size = 1 << 14;
    let maps: Vec<Box<dyn IntervalMap>> =
        vec![Box::new(DoublingMap::new(1).unwrap()), Box::new(TentMap::new(1).unwrap())];
    for map in &maps {
        let phi = ulam_density(map.as_ref(), size).unwrap();
        let defect = transfer_apply(map.as_ref(), &phi).sub(&phi).unwrap().total_variation();
        assert!(defect < 1e-8, "{}: {defect}", map.name());
    }
}
