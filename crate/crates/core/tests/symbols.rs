use cylstokes::symbols::*;
use cylstokes::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;

type Cmat = DMatrix<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: &Cmat, b: &Cmat) -> f64 {
    (a - b).norm()
}

#[test]
fn stokes_symbol_at_unit_covector() {
    let m = stokes_symbol(&[1.0, 0.0], 0.0).unwrap();
    let expected = Cmat::from_row_slice(
        3,
        3,
        &[c(2., 0.), c(0., 0.), c(0., 1.), c(0., 0.), c(1., 0.), c(0., 0.), c(0., -1.), c(0., 0.), c(0., 0.)],
    );
    assert!(close(&m, &expected) < 1e-15);
}

#[test]
fn zero_covector_is_rejected() {
    assert!(stokes_symbol(&[0.0, 0.0], 1.0).is_err());
    assert!(stokes_symbol_inverse(&[0.0, 0.0, 0.0], 1.0).is_err());
}

#[test]
fn inverse_constants_satisfy_the_linear_relation() {
    let (f, g) = inverse_constants(1.0);
    assert!((f - 2.0 / 3.0).abs() < 1e-15 && (g - 1.0 / 3.0).abs() < 1e-15);
    assert!((1.0 - 2.0 * f + g).abs() < 1e-15);
    let (f0, g0) = inverse_constants(0.0);
    assert_eq!((f0, g0), (1.0, 1.0));
    let inv = stokes_symbol_inverse(&[0.3, -1.2], 0.0).unwrap();
    assert!((inv[(2, 2)] - c(-2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn closed_form_inverse_matches_lu_inverse() {
    // Independent oracle: numerical inverse of the assembled symbol.
    for (xi, v0) in [(vec![0.7, -0.4], 0.3), (vec![1.0, 2.0, -0.5], 5.0), (vec![-3.0, 0.1], 0.0)] {
        let m = stokes_symbol(&xi, v0).unwrap();
        let lu = m.clone().try_inverse().unwrap();
        let closed = stokes_symbol_inverse(&xi, v0).unwrap();
        assert!(close(&lu, &closed) < 1e-13);
    }
}

#[test]
fn symbol_blocks_scale_by_adn_weights() {
    let xi = [0.4, -0.9];
    let lam = 3.5;
    let a = stokes_symbol(&xi, 2.0).unwrap();
    let b = stokes_symbol(&[lam * xi[0], lam * xi[1]], 2.0).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let p = match (i < 2, j < 2) {
                (true, true) => 2,
                (false, false) => 0,
                _ => 1,
            };
            assert!((b[(i, j)] - a[(i, j)] * lam.powi(p)).norm() < 1e-12);
        }
    }
}

#[test]
fn def_symbol_identities() {
    let xi = [0.6, -1.1, 0.3];
    let nu = [0.0, 0.0, 1.0];
    let s = def_symbols(&xi, &nu);
    let r: f64 = xi.iter().map(|v| v * v).sum();
    let expect = (Cmat::identity(3, 3) * c(r, 0.0)
        + Cmat::from_fn(3, 3, |i, j| c(xi[i] * xi[j], 0.0)))
        * c(0.5, 0.0);
    assert!(close(&s.def_star_def, &expect) < 1e-14);
    assert!(close(&s.def_adj, &s.def.adjoint()) < 1e-15);

    // Block assembly from the first-order pieces reproduces the Stokes symbol.
    let v0 = 1.5;
    let mut m = Cmat::zeros(4, 4);
    m.view_mut((0, 0), (3, 3)).copy_from(&(&s.def_star_def * c(2.0, 0.0)));
    m.view_mut((0, 3), (3, 1)).copy_from(&s.grad);
    m.view_mut((3, 0), (1, 3)).copy_from(&s.grad_adj);
    m[(3, 3)] = c(-v0, 0.0);
    assert!(close(&m, &stokes_symbol(&xi, v0).unwrap()) < 1e-14);
}

#[test]
fn normal_traction_symbol_at_the_normal() {
    // At xi = nu the symbol is i on the normal line and i/2 on its complement.
    let nu = [0.6, 0.8];
    let s = def_symbols(&nu, &nu);
    let t = [-0.8, 0.6];
    let dn = &s.d_nu * Cmat::from_column_slice(2, 1, &[c(nu[0], 0.), c(nu[1], 0.)]);
    let dt = &s.d_nu * Cmat::from_column_slice(2, 1, &[c(t[0], 0.), c(t[1], 0.)]);
    for k in 0..2 {
        assert!((dn[k] - c(0.0, nu[k])).norm() < 1e-15);
        assert!((dt[k] - c(0.0, 0.5 * t[k])).norm() < 1e-15);
    }
}

#[test]
fn laplace_double_layer_has_half_limits() {
    let nu = vec![1.0, 0.0];
    let a = laplace_double_layer(nu.clone());
    let jd = boundary_symbol_a0(&a, &[0.0, 0.0], &[0.0, 1.3], &nu).unwrap();
    assert!((jd.jc[(0, 0)] - c(0.0, -1.0)).norm() < 1e-15);
    assert!(jd.a0[(0, 0)].norm() < 1e-6);
    assert!((jd.a0_plus[(0, 0)] - c(0.5, 0.0)).norm() < 1e-6);
    assert!((jd.a0_minus[(0, 0)] - c(-0.5, 0.0)).norm() < 1e-6);
    let hs = jump_coefficient_half_space(&a, &[0.0, 0.0], &[-1.0, 0.0]).unwrap();
    assert!(close(&hs, &jd.jc) < 1e-15);
}

#[test]
fn even_symbols_are_refused() {
    let nu = vec![1.0, 0.0];
    let even = single_layer_velocity(1.0);
    assert!(jump_coefficient(&even, &[0.0, 0.0], &nu).is_err());
    let lying = SymbolMatrix::new(-1.0, true, |_, xi| {
        let r: f64 = xi.iter().map(|v| v * v).sum();
        Cmat::from_element(1, 1, c(1.0 / r.sqrt(), 0.0))
    });
    assert!(jump_coefficient(&lying, &[0.0, 0.0], &nu).is_err());
}

fn cases() -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for v0 in [0.0, 1.0, 5.0] {
        out.push((v0, vec![0.0, 1.0], vec![1.0, 0.0]));
        out.push((v0, vec![0.0, -2.5], vec![-1.0, 0.0]));
        out.push((v0, vec![0.3, -0.7, 0.0], vec![0.0, 0.0, 1.0]));
    }
    out
}

#[test]
fn double_layer_boundary_symbol_matches_closed_form() {
    for (v0, xp, nu) in cases() {
        let a = double_layer_velocity(v0, nu.clone());
        let jd = boundary_symbol_a0(&a, &[], &xp, &nu).unwrap();
        let cf = stokes_boundary_symbols(v0, &xp, &nu).unwrap();
        let n = nu.len();
        assert!(close(&jd.a0, &cf.double_layer) < 1e-8, "v0 = {v0}: {} vs {}", jd.a0, cf.double_layer);
        assert!(close(&jd.jc, &(Cmat::identity(n, n) * c(0.0, -1.0))) < 1e-14);
        assert!(close(&jd.a0_plus, &(Cmat::identity(n, n) * c(0.5, 0.0) + &cf.double_layer)) < 1e-8);
    }
}

#[test]
fn double_layer_average_eigenvalues() {
    for v0 in [0.0, 1.0, 5.0] {
        let cf = stokes_boundary_symbols(v0, &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        let h = &cf.double_layer;
        assert!(close(h, &h.adjoint()) < 1e-15);
        let ev = nalgebra::SymmetricEigen::new(h.clone()).eigenvalues;
        let expect = v0 / (2.0 * (2.0 * v0 + 1.0));
        let mut e: Vec<f64> = ev.iter().cloned().collect();
        e.sort_by(f64::total_cmp);
        assert!((e[0] + expect).abs() < 1e-14 && (e[1] - expect).abs() < 1e-14);
        assert!(expect < 0.25);
    }
    // V0 = 1: +-1/6, checked against the quadrature route.
    let nu = vec![1.0, 0.0];
    let jd = boundary_symbol_a0(&double_layer_velocity(1.0, nu.clone()), &[], &[0.0, 1.0], &nu).unwrap();
    let mut e: Vec<f64> = nalgebra::SymmetricEigen::new((&jd.a0 + jd.a0.adjoint()) * c(0.5, 0.0))
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    e.sort_by(f64::total_cmp);
    assert!((e[0] + 1.0 / 6.0).abs() < 1e-8 && (e[1] - 1.0 / 6.0).abs() < 1e-8, "{e:?}");
}

#[test]
fn single_layer_boundary_symbols_match_closed_forms() {
    for (v0, xp, nu) in cases() {
        let cf = stokes_boundary_symbols(v0, &xp, &nu).unwrap();
        let vel = boundary_symbol_a0(&single_layer_velocity(v0), &[], &xp, &nu).unwrap();
        assert!(close(&vel.a0, &cf.single_layer_velocity) < 1e-8);
        assert!(vel.jc.norm() == 0.0);
        let pre = boundary_symbol_a0(&single_layer_pressure(v0), &[], &xp, &nu).unwrap();
        assert!(close(&pre.a0, &cf.single_layer_pressure) < 1e-8);
        assert!(close(&pre.jc, &cf.jc_single_layer_pressure) < 1e-14);
        assert!(close(&pre.a0_plus, &(&cf.pressure_jump_plus + &cf.single_layer_pressure)) < 1e-8);
        assert!(close(&pre.a0_minus, &(&cf.pressure_jump_minus + &cf.single_layer_pressure)) < 1e-8);
        let con = boundary_symbol_a0(&conormal_single_layer(v0, nu.clone()), &[], &xp, &nu).unwrap();
        assert!(close(&con.jc, &cf.jc_conormal_single_layer) < 1e-14);
        // The traction average is the adjoint of the double-layer average.
        assert!(close(&con.a0, &cf.double_layer.adjoint()) < 1e-8);
    }
}

#[test]
fn double_layer_average_vanishes_without_v0() {
    let cf = stokes_boundary_symbols(0.0, &[0.0, 0.4], &[1.0, 0.0]).unwrap();
    assert!(cf.double_layer.norm() == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn symbol_times_inverse_is_identity(
        x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0, v0 in 0.0f64..10.0, three in any::<bool>()
    ) {
        let xi: Vec<f64> = if three { vec![x, y, z] } else { vec![x, y] };
        prop_assume!(xi.iter().map(|v| v * v).sum::<f64>() > 1e-4);
        let n = xi.len() + 1;
        let m = stokes_symbol(&xi, v0).unwrap() * stokes_symbol_inverse(&xi, v0).unwrap();
        prop_assert!(close(&m, &Cmat::identity(n, n)) < 1e-12);
    }

    #[test]
    fn boundary_symbol_homogeneity(lam in 0.2f64..6.0, t in 0.3f64..3.0, v0 in 0.0f64..5.0) {
        let nu = vec![1.0, 0.0];
        let xp = [0.0, t];
        let xl = [0.0, lam * t];
        let dl = double_layer_velocity(v0, nu.clone());
        let a = boundary_symbol_a0(&dl, &[], &xp, &nu).unwrap();
        let b = boundary_symbol_a0(&dl, &[], &xl, &nu).unwrap();
        prop_assert!(close(&b.a0, &a.a0) < 1e-8);
        let sl = single_layer_velocity(v0);
        let a = boundary_symbol_a0(&sl, &[], &xp, &nu).unwrap();
        let b = boundary_symbol_a0(&sl, &[], &xl, &nu).unwrap();
        prop_assert!(close(&(b.a0 * c(lam, 0.0)), &a.a0) < 1e-8);
    }

    #[test]
    fn boundary_average_of_odd_symbol_is_odd(t in 0.3f64..3.0, v0 in 0.0f64..5.0) {
        let nu = vec![-1.0, 0.0];
        let dl = double_layer_velocity(v0, nu.clone());
        let a = boundary_symbol_a0(&dl, &[], &[0.0, t], &nu).unwrap();
        let b = boundary_symbol_a0(&dl, &[], &[0.0, -t], &nu).unwrap();
        prop_assert!(close(&(a.a0 + b.a0), &Cmat::zeros(2, 2)) < 1e-8);
    }

    #[test]
    fn jump_coefficient_of_adjoint(v0 in 0.0f64..5.0, s in -1.0f64..1.0) {
        let nu = vec![(1.0 - s * s).sqrt(), s];
        let dl = double_layer_velocity(v0, nu.clone());
        let j = jump_coefficient(&dl, &[], &nu).unwrap();
        let ja = jump_coefficient(&dl.adjoint(), &[], &nu).unwrap();
        prop_assert!(close(&ja, &j.adjoint()) < 1e-14);
    }
}
