use cylstokes_web::{boundary_scan, symbol_inverse, torus_kernel};

#[test]
fn symbol_inverse_reports_constants_and_residual() {
    let r = symbol_inverse(0.7, -1.3, 1.0).unwrap();
    assert!((r[0] - 2.0 / 3.0).abs() < 1e-15 && (r[1] - 1.0 / 3.0).abs() < 1e-15);
    assert!(r[2] < 1e-12);
    assert!(symbol_inverse(0.0, 0.0, 1.0).is_err());
}

#[test]
fn boundary_scan_flags_only_tau_zero_without_potentials() {
    let rows = boundary_scan(0.0, 0.0, 16, 2).unwrap();
    assert_eq!(rows.len(), 5 * 5);
    for r in rows.chunks(5) {
        assert_eq!(r[4] == 1.0, r[0] == 0.0, "{r:?}");
    }
    let pos = boundary_scan(1.0, 1.0, 16, 2).unwrap();
    assert!(pos.chunks(5).all(|r| r[4] == 0.0 && r[1] > 0.0 && r[2] > 0.0 && r[3] > 0.0));
}

#[test]
fn torus_kernel_table() {
    assert_eq!(torus_kernel(0.0, 0.0, 16).unwrap()[0], 3.0);
    assert_eq!(torus_kernel(0.0, 1.0, 16).unwrap()[0], 2.0);
    assert_eq!(torus_kernel(1.0, 1.0, 16).unwrap()[0], 0.0);
    assert!(torus_kernel(1.0, 1.0, 3).is_err());
}
