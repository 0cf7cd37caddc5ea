use std::f64::consts::PI;

use cylstokes::cheb::ChebGrid;
use cylstokes::cylinder::assemble_xi_hat;
use cylstokes::layer::*;
use cylstokes::spectral::*;
use cylstokes::symbols::inverse_constants;
use cylstokes::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn circle(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(n, 2.0 * PI, 1).unwrap()
}

fn half_arc() -> BoundarySpec {
    BoundarySpec::new(0.0, PI, 2.0 * PI).unwrap()
}

fn identity4() -> DMatrix<C64> {
    DMatrix::identity(4, 4)
}

#[test]
fn bernoulli_polynomials() {
    assert!((bernoulli_polynomial(1, 0.3) - (0.3 - 0.5)).abs() < 1e-15);
    assert!((bernoulli_polynomial(2, 0.3) - (0.09 - 0.3 + 1.0 / 6.0)).abs() < 1e-15);
    assert!((bernoulli_polynomial(3, 0.25) - (0.015625 - 1.5 * 0.0625 + 0.5 * 0.25)).abs() < 1e-15);
    // B_n(1 - x) = (-1)^n B_n(x)
    for n in 1..=8 {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!((bernoulli_polynomial(n, 0.7) - s * bernoulli_polynomial(n, 0.3)).abs() < 1e-13);
    }
}

#[test]
fn series_satisfies_the_ode_away_from_the_source() {
    let v = DMatrix::from_diagonal_element(2, 2, c(1.0, 0.0));
    for tau in [0.0, 1.0, 3.0] {
        let ck = ConstantKernel::new(tau, 2.0 * PI, &v, 1.0).unwrap();
        let grid = ChebGrid::new(48, 0.6, 5.6).unwrap();
        let m = grid.len();
        for kind in [SourceKind::Single, SourceKind::Double { nu: 1.0 }] {
            let s = ck.series(kind, Readout::Value);
            let vals: Vec<DMatrix<C64>> = grid.nodes.iter().map(|&x| s.eval(x, 1.0)).collect();
            let vn = vec![v.clone(); m];
            let v0n = vec![1.0; m];
            for col in 0..2 {
                let u: Vec<C64> = (0..3).flat_map(|r| vals.iter().map(move |g| g[(r, col)])).collect();
                let zero = vec![c(0.0, 0.0); m];
                let bc = [[u[0], u[m]], [u[m - 1], u[2 * m - 1]]];
                let (a, rhs) = arc_system(tau, &grid, &vn, &v0n, &[zero.clone(), zero.clone(), zero], bc);
                let r = &a * DVector::from_vec(u.clone()) - rhs;
                let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(r.norm() < 1e-5 * scale, "tau {tau} {kind:?}: {} scale {scale}", r.norm());
            }
        }
    }
}

#[test]
fn green_response_paths_agree() {
    let g = circle(64);
    let pot = PotentialPair::constant(&g, 1.0, 1.0);
    for tau in [0.0, 1.0, 3.0] {
        let e = [c(0.7, -0.2), c(0.1, 0.9)];
        let fast = green_response(tau, 0.9, e, &pot, GreenPath::Fast).unwrap();
        let generic = green_response(tau, 0.9, e, &pot, GreenPath::Generic).unwrap();
        let diff = (fast.to_vector() - generic.to_vector()).camax();
        assert!(diff < 1e-9, "tau {tau}: {diff}");
        // Forward application reproduces the band-limited delta.
        let xi = assemble_xi_hat(tau, &g, &pot).unwrap();
        let back = xi.apply(&generic).unwrap();
        let delta = delta_mode_coefficients(&g, 0.9).unwrap().to_samples();
        for j in 0..64 {
            assert!((back.velocity.components[0][j] - delta[j] * e[0]).norm() < 1e-8);
            assert!((back.velocity.components[1][j] - delta[j] * e[1]).norm() < 1e-8);
            assert!(back.pressure.values[j].norm() < 1e-8);
        }
    }
    let zero = green_response(1.0, 0.9, [c(0.0, 0.0); 2], &pot, GreenPath::Generic).unwrap();
    assert!(zero.to_vector().camax() == 0.0);
    let varying = PotentialPair::scalar(&g, |p| (1.0 + 0.5 * p[0].sin(), 1.0));
    assert!(green_response(1.0, 0.9, [c(1.0, 0.0); 2], &varying, GreenPath::Fast).is_err());
    let stokes = PotentialPair::constant(&g, 0.0, 0.0);
    assert!(matches!(green_response(0.0, 0.9, [c(1.0, 0.0); 2], &stokes, GreenPath::Generic), Err(cylstokes::Error::Singular { .. })));
}

#[test]
fn richardson_traces_of_sign_series() {
    let f = ModeCoefficients::sign_series(1.0, 4096, 2.0 * PI);
    let opts = TraceOptions::default();
    let plus = one_sided_trace(&f, 1.0, 1.0, opts).unwrap();
    let minus = one_sided_trace(&f, 1.0, -1.0, opts).unwrap();
    assert!((plus.value - c(1.0, 0.0)).norm() < 1e-3);
    assert!((minus.value + c(1.0, 0.0)).norm() < 1e-3);
    // A continuous field: both sides agree with the point value.
    let smooth = ModeCoefficients { circumference: 2.0 * PI, modes: vec![-1, 0, 1], coeffs: vec![c(0.5, 0.0), c(0.2, 0.0), c(0.5, 0.0)] };
    let exact = c(0.2 + 0.4f64.cos(), 0.0);
    for s in [1.0, -1.0] {
        let t = one_sided_trace(&smooth, 0.4, s, TraceOptions { c: 0.1, levels: 5, filter_order: 0 }).unwrap();
        assert!((t.value - exact).norm() < 1e-8, "{t:?}");
    }
}

#[test]
fn single_layer_traces_by_richardson() {
    let v = DMatrix::from_diagonal_element(2, 2, c(1.0, 0.0));
    let v0 = 1.0;
    let ck = ConstantKernel::with_modes(1.0, 2.0 * PI, &v, v0, 8192).unwrap();
    let s = ck.series(SourceKind::Single, Readout::Value);
    let opts = TraceOptions::default();
    let (_, gfrak) = inverse_constants(v0);
    for col in 0..2 {
        for r in 0..2 {
            let f = s.coefficients(r, col, 0.0);
            let a = one_sided_trace(&f, 0.0, 1.0, opts).unwrap();
            let b = one_sided_trace(&f, 0.0, -1.0, opts).unwrap();
            assert!((a.value - b.value).norm() < 1e-5, "velocity ({r},{col}) jumps");
            assert!((a.value - s.eval(0.0, 1.0)[(r, col)]).norm() < 1e-5);
        }
        // Pressure: with the source at beta (nu = +e_x) the interior is x < beta.
        let f = s.coefficients(2, col, 0.0);
        let interior = one_sided_trace(&f, 0.0, -1.0, opts).unwrap();
        let exterior = one_sided_trace(&f, 0.0, 1.0, opts).unwrap();
        let h_dot_nu = if col == 0 { 1.0 } else { 0.0 };
        assert!((interior.value - exterior.value - c(-gfrak * h_dot_nu, 0.0)).norm() < 1e-3);
    }
}

#[test]
fn jump_relations_on_the_half_circle() {
    let g = circle(64);
    let spec = half_arc();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (v, v0) in [(1.0, 1.0), (1.0, 0.0), (2.0, 5.0)] {
        let pot = PotentialPair::constant(&g, v, v0);
        for tau in [0.0, 1.0, 3.0, -2.5] {
            if v0 == 0.0 && tau == 0.0 {
                // constant pressures span the kernel of Xi(0)
                assert!(IndicialGreen::new(tau, &spec, &pot).is_err());
                continue;
            }
            let green = IndicialGreen::new(tau, &spec, &pot).unwrap();
            let f = family_from_green(&green).unwrap();
            assert!((&f.half_jump_double - identity4() * c(0.5, 0.0)).norm() < 1e-3);
            assert!((&f.half_jump_conormal + identity4() * c(0.5, 0.0)).norm() < 1e-3);
            assert!(f.single_layer_jump < 1e-5);
            assert!((&f.s_hat - f.s_hat.adjoint()).norm() < 1e-8);
            assert!((&f.k_hat_star - f.k_hat.adjoint()).norm() < 1e-8);
            assert!(f.info.richardson_half_jump_error < 1e-3, "{:?}", f.info);
            let d_in = green.double_layer_trace(Side::Interior);
            let d_out = green.double_layer_trace(Side::Exterior);
            for _ in 0..20 {
                let h = DVector::from_fn(4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                assert!(((&d_in - &d_out) * &h - &h).norm() < 1e-8 * h.norm());
            }
        }
    }
    // h = 0 gives zero columns.
    let pot = PotentialPair::constant(&g, 1.0, 1.0);
    let f = boundary_operators(1.0, &spec, &pot).unwrap();
    let zero = DVector::zeros(4);
    assert_eq!((&f.s_hat * &zero).camax(), 0.0);
    assert_eq!((&f.k_hat * &zero).camax(), 0.0);
}

#[test]
fn pressure_single_layer_jump_matches_symbol() {
    let g = circle(32);
    let spec = half_arc();
    for v0 in [0.0, 1.0, 5.0] {
        let pot = PotentialPair::constant(&g, 1.0, v0);
        let green = IndicialGreen::new(1.0, &spec, &pot).unwrap();
        let (_, gfrak) = inverse_constants(v0);
        for (b, &x) in spec.points().iter().enumerate() {
            let nu = spec.normal(b);
            let jump = green.single_layer(x, Side::Interior) - green.single_layer(x, Side::Exterior);
            // Pressure row, column of the source at this point with polarization e_x.
            assert!((jump[(2, 2 * b)] - c(-gfrak * nu, 0.0)).norm() < 1e-10);
            assert!(jump[(2, 2 * b + 1)].norm() < 1e-10);
        }
    }
}

#[test]
fn operator_identities() {
    let g = circle(64);
    let spec = half_arc();
    for (v, v0) in [(1.0, 1.0), (1.0, 0.0)] {
        let pot = PotentialPair::constant(&g, v, v0);
        let f = boundary_operators(1.0, &spec, &pot).unwrap();
        assert!(operator_identity_check(&f) < 1e-5);
    }
    // Nonconstant potentials: nodal correction, residual decreasing with resolution.
    let mut res = Vec::new();
    for n in [32, 64, 128] {
        let pot = PotentialPair::scalar(&circle(n), |p| (1.0 + 0.3 * p[0].sin(), 1.0 + 0.2 * p[0].cos()));
        let f = boundary_operators(1.0, &spec, &pot).unwrap();
        assert!(f.info.nodal_correction);
        res.push(operator_identity_check(&f));
    }
    assert!(res[1] < res[0] / 2.5 && res[2] < res[1] / 2.5, "{res:?}");
    assert!(res[2] < 1e-5, "{res:?}");
}

#[test]
fn dirichlet_to_neumann() {
    let g = circle(64);
    let spec = half_arc();
    let pot = PotentialPair::constant(&g, 1.0, 1.0);
    for tau in [0.0, 1.0, 3.0] {
        let d = dtn_matrix(tau, &spec, &pot, 64).unwrap();
        assert!(d.identity_residual < 1e-5, "{d:?}");
        assert!(d.no_jump_residual < 1e-4);
        assert!(d.conormal_residual < 1e-4);
        // Exact solution: a single-layer response with its source off the arc.
        let ck = ConstantKernel::new(tau, 2.0 * PI, &DMatrix::identity(2, 2), 1.0).unwrap();
        let val = ck.series(SourceKind::Single, Readout::Value);
        let tr = [ck.series(SourceKind::Single, Readout::Traction { nu: -1.0 }), ck.series(SourceKind::Single, Readout::Traction { nu: 1.0 })];
        let xs = 4.5;
        let e = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let mut h = DVector::zeros(4);
        let mut t = DVector::zeros(4);
        for (b, &a) in spec.points().iter().enumerate() {
            let u = val.eval(a - xs, 1.0) * &e;
            let bt = tr[b].eval(a - xs, 1.0) * &e;
            h[2 * b] = u[0];
            h[2 * b + 1] = u[1];
            t[2 * b] = bt[0];
            t[2 * b + 1] = bt[1];
        }
        assert!((&d.n_hat * h - t).norm() < 1e-8);
    }
}

#[test]
fn pompeiu_reconstruction() {
    let g = circle(32);
    let spec = half_arc();
    let pot = PotentialPair::constant(&g, 1.0, 1.0);
    let probes: Vec<f64> = (0..41).map(|j| 0.03 + j as f64 * 0.1527).collect();
    let mut errs = Vec::new();
    for gap in [1.5, 0.5, 0.1] {
        let src = [(PI + gap, [c(1.0, 0.0), c(0.3, -0.2)]), (2.0 * PI - gap, [c(-0.4, 0.1), c(1.0, 0.0)])];
        let r = pompeiu_check(1.0, &spec, &pot, &src, &probes).unwrap();
        assert!(r.interior_relative_error < 1e-5 && r.exterior_leakage < 1e-5, "{r:?}");
        assert!(r.interior_points > 10 && r.exterior_points > 10);
        errs.push(r.interior_relative_error.max(r.exterior_leakage));
    }
    let zero = pompeiu_check(1.0, &spec, &pot, &[(4.0, [c(0.0, 0.0); 2])], &probes).unwrap();
    assert_eq!(zero.exterior_leakage, 0.0);
    assert!(pompeiu_check(1.0, &spec, &pot, &[(1.0, [c(1.0, 0.0); 2])], &probes).is_err());
}

#[test]
fn boundary_invertibility_scans() {
    let g = circle(32);
    let spec = half_arc();
    let taus: Vec<f64> = (-10..=10).map(|k| k as f64).collect();
    let pos = invertibility_scan_boundary(&taus, &PotentialPair::constant(&g, 1.0, 1.0), &spec);
    assert!(pos.warnings.is_empty());
    assert!(pos.rows.iter().all(|r| !r.flagged));
    let floor = pos.rows.iter().map(|r| r.min_sigma_s.min(r.min_sigma_half_plus_k)).fold(f64::MAX, f64::min);
    assert!(floor > 1e-4, "{floor}");
    let neg = invertibility_scan_boundary(&taus, &PotentialPair::constant(&g, 0.0, 0.0), &spec);
    assert!(!neg.warnings.is_empty());
    for r in &neg.rows {
        assert_eq!(r.flagged, r.tau == 0.0, "{r:?}");
    }
    let r5 = &neg.rows.iter().find(|r| r.tau == 5.0).unwrap();
    assert!(r5.min_sigma_s > 1e-6 && r5.min_sigma_half_plus_k > 1e-6);
}

#[test]
fn shifted_axial_origin_is_bit_identical() {
    let g = circle(32);
    let spec = half_arc();
    // Potentials independent of the axial variable, sampled at two axial origins.
    let field = |x: f64, _t: f64| (1.0 + 0.5 * x.cos().powi(2), 2.0);
    let a = PotentialPair::scalar(&g, |p| field(p[0], 0.0));
    let b = PotentialPair::scalar(&g, |p| field(p[0], 37.25));
    let fa = boundary_operators(1.5, &spec, &a).unwrap();
    let fb = boundary_operators(1.5, &spec, &b).unwrap();
    assert_eq!(fa.s_hat, fb.s_hat);
    assert_eq!(fa.k_hat, fb.k_hat);
    assert_eq!(fa.k_hat_star, fb.k_hat_star);
}

#[test]
fn boundary_spec_validation() {
    assert!(BoundarySpec::new(1.0, 1.0, 2.0 * PI).is_err());
    assert!(BoundarySpec::new(0.0, 7.0, 2.0 * PI).is_err());
    let s = half_arc();
    assert!(s.contains(1.0) && !s.contains(4.0) && !s.contains(0.0));
    assert_eq!(s.trace_dim(), 4);
}
