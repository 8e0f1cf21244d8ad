use std::f64::consts::PI;

use corrlab::billiard::{
    involution_check, mean_free_path_check, srb_invariance, validate_geometry, BilliardGeometry,
    HorizonStatus, Scatterer,
};
use corrlab::rng::StreamSeed;

/// Corner and centre disks whose shadows close every corridor.
fn two_disk_table() -> BilliardGeometry {
    BilliardGeometry::new(
        vec![
            Scatterer { center: [0.0, 0.0], radius: 0.4 },
            Scatterer { center: [0.5, 0.5], radius: 0.3 },
        ],
        100.0,
    )
    .unwrap()
}

#[test]
fn two_disk_table_has_finite_horizon() {
    let geom = two_disk_table();
    let report = validate_geometry(&geom, 20_000, &StreamSeed::new(1, "horizon")).unwrap();
    assert_eq!(report.status, HorizonStatus::VerifiedFinite, "{report:?}");
    assert!(report.max_free_path < 2.0);
}

#[test]
fn two_disk_mean_free_path_matches_the_area_formula() {
    let geom = two_disk_table();
    let area = 1.0 - PI * (0.4f64.powi(2) + 0.3f64.powi(2));
    let perimeter = 2.0 * PI * (0.4 + 0.3);
    let exact = PI * area / perimeter;
    let check = mean_free_path_check(&geom, 200_000, &StreamSeed::new(2, "mfp")).unwrap();
    assert!((check.mean - exact).abs() <= 0.01 * exact, "{check:?} vs {exact}");
    assert!((check.exact - exact).abs() <= 1e-12);
}

#[test]
fn two_disk_collision_map_is_reversible_and_invariant() {
    let geom = two_disk_table();
    let inv = involution_check(&geom, 1000, &StreamSeed::new(3, "involution")).unwrap();
    assert!(inv.max_deviation <= 1e-9 && inv.mismatched == 0, "{inv:?}");
    let srb = srb_invariance(&geom, 100_000, &StreamSeed::new(4, "srb")).unwrap();
    assert!(srb.pass, "{srb:?}");
}
