use super::{GridFunction, TransferError};
use crate::dynamics::IntervalMap;
use crate::Complex64;

/// One application of the base transfer operator
/// `(L g)(y) = sum_{F(x) = y} g(x) / |F'(x)|` at every grid point, with `g`
/// interpolated between its samples.
pub fn transfer_apply_base(map: &dyn IntervalMap, g: &GridFunction) -> GridFunction {
    let branches = map.base_branches();
    let size = g.size();
    let values = (0..size)
        .map(|j| {
            let y = j as f64 / size as f64;
            branches
                .iter()
                .filter(|b| b.contains_image(y))
                .map(|b| {
                    let x = b.inverse(y);
                    g.eval(x) / b.derivative_abs(x)
                })
                .sum::<Complex64>()
        })
        .collect();
    GridFunction::new(values, format!("L({})", g.descriptor())).expect("finite inputs stay finite")
}

/// Transfer operator of the system map `F^m`: the base operator applied `m`
/// times.
pub fn transfer_apply(map: &dyn IntervalMap, g: &GridFunction) -> GridFunction {
    (1..map.power()).fold(transfer_apply_base(map, g), |h, _| transfer_apply_base(map, &h))
}

/// `max_j |L(f o F . g) - f . L g|` on the grid.
///
/// `f o F` is sampled at the grid points through the map and `f`'s
/// interpolant. Each side carries interpolation error: the deviation is
/// second order in `1/G` for smooth `f` and first order when `f` has a kink.
pub fn verify_transfer_identity(
    map: &dyn IntervalMap,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<f64, TransferError> {
    if f.size() != g.size() {
        return Err(TransferError::Grid("f and g must share a grid".into()));
    }
    let size = g.size();
    let f_of_f = GridFunction::from_fn(size, "f o F", |x| f.eval(map.forward(x)))?;
    let lhs = transfer_apply(map, &f_of_f.mul(g)?);
    let rhs = f.mul(&transfer_apply(map, g))?;
    lhs.max_deviation(&rhs)
}

/// `V(L g) - (2 V(g) / lambda + A ||g||_1)` for the system map, which must
/// expand by `lambda > 2`. A verified instance has residual at most
/// [`ly_grid_allowance`].
pub fn lasota_yorke_residual(
    map: &dyn IntervalMap,
    g: &GridFunction,
    a: f64,
) -> Result<f64, TransferError> {
    let lambda = map.expansion();
    if !(lambda > 2.0) {
        return Err(TransferError::Precondition(format!(
            "Lasota-Yorke form needs inf |F'| > 2, got {lambda}; use an iterate power"
        )));
    }
    let lg = transfer_apply(map, g);
    Ok(lg.total_variation() - (2.0 / lambda * g.total_variation() + a * g.l1_norm()))
}

/// Grid error allowance `8 V(g) / G` for inequality checks.
pub fn ly_grid_allowance(g: &GridFunction) -> f64 {
    8.0 * g.total_variation() / g.size() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DoublingMap, TentMap};
    use approx::assert_abs_diff_eq;

    #[test]
    fn doubling_examples() {
        let map = DoublingMap::new(1).unwrap();
        let one = GridFunction::constant(256, 1.0).unwrap();
        assert!(transfer_apply(&map, &one).max_deviation(&one).unwrap() < 1e-15);
        let id = GridFunction::from_real_fn(256, "x", |x| x).unwrap();
        let want = GridFunction::from_real_fn(256, "x/2+1/4", |x| x / 2.0 + 0.25).unwrap();
        assert!(transfer_apply(&map, &id).max_deviation(&want).unwrap() < 1e-15);
    }

    #[test]
    fn tent_preserves_constants_and_squares_agree() {
        let tent = TentMap::new(1).unwrap();
        let one = GridFunction::constant(128, 1.0).unwrap();
        assert!(transfer_apply(&tent, &one).max_deviation(&one).unwrap() < 1e-15);
        let g = GridFunction::from_real_fn(128, "x^2", |x| x * x).unwrap();
        let twice = transfer_apply(&tent, &transfer_apply(&tent, &g));
        let squared = transfer_apply(&TentMap::new(2).unwrap(), &g);
        assert_eq!(twice.values(), squared.values());
    }

    #[test]
    fn identity_with_constant_f_is_exact() {
        let map = DoublingMap::new(1).unwrap();
        let one = GridFunction::constant(512, 1.0).unwrap();
        let g = GridFunction::from_real_fn(512, "g", |x| (7.0 * x).sin() + x * x).unwrap();
        let dev = verify_transfer_identity(&map, &one, &g).unwrap();
        assert!(dev <= 4.0 / 512.0 * g.total_variation());
        assert!(dev < 1e-14);
    }

    #[test]
    fn lasota_yorke_needs_expansion_above_two() {
        let g = GridFunction::from_real_fn(64, "x", |x| x).unwrap();
        assert!(matches!(
            lasota_yorke_residual(&DoublingMap::new(1).unwrap(), &g, 0.0),
            Err(TransferError::Precondition(_))
        ));
        let c = GridFunction::constant(64, 2.0).unwrap();
        let r = lasota_yorke_residual(&DoublingMap::new(2).unwrap(), &c, 0.5).unwrap();
        assert_abs_diff_eq!(r, -1.0, epsilon = 1e-14);
    }
}
