use std::f64::consts::PI;

use cylstokes::quad::{integrate_vec, QuadOptions};
use cylstokes::spectral::*;
use cylstokes::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn grid(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(n, 2.0 * PI, 1).unwrap()
}

#[test]
fn grid_construction() {
    let g = grid(8);
    let x = g.axis_nodes();
    for (j, v) in x.iter().enumerate() {
        assert!((v - j as f64 * PI / 4.0).abs() < 1e-15);
    }
    let g = PeriodicGrid::new(16, 1.0, 1).unwrap();
    let k = g.wave_numbers();
    assert_eq!(k.len(), 16);
    assert!((k[0] + 16.0 * PI).abs() < 1e-12 && (k[15] - 14.0 * PI).abs() < 1e-12);
    let g = PeriodicGrid::new(6, 2.0 * PI, 2).unwrap();
    assert_eq!(g.points().len(), 36);
    assert!((g.weight() * 36.0 - 4.0 * PI * PI).abs() < 1e-12);
    assert!(PeriodicGrid::new(7, 1.0, 1).is_err());
    assert!(PeriodicGrid::new(2, 1.0, 1).is_err());
    assert!(PeriodicGrid::new(8, 0.0, 1).is_err());
}

#[test]
fn derivative_of_sine_and_constants() {
    let g = grid(64);
    let f = ScalarField::from_fn(&g, |p| c(p[0].sin(), 0.0));
    let d = spectral_derivative(&f, 0).unwrap();
    for (v, p) in d.values.iter().zip(g.points()) {
        assert!((v - c(p[0].cos(), 0.0)).norm() < 1e-12);
    }
    let one = ScalarField::from_fn(&g, |_| c(1.0, 0.0));
    assert!(spectral_derivative(&one, 0).unwrap().values.iter().all(|v| v.norm() < 1e-13));
    assert!(spectral_derivative(&one, 1).is_err());
}

#[test]
fn derivative_converges_under_refinement() {
    let f = |x: f64| c(x.cos().exp(), 0.0);
    let coarse = grid(64);
    let fine = grid(640);
    let dc = spectral_derivative(&ScalarField::from_fn(&coarse, |p| f(p[0])), 0).unwrap();
    let df = spectral_derivative(&ScalarField::from_fn(&fine, |p| f(p[0])), 0).unwrap();
    let scale = dc.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for j in 0..64 {
        assert!((dc.values[j] - df.values[10 * j]).norm() < 1e-10 * scale);
    }
}

#[test]
fn derivative_matrix_agrees_with_fft_route() {
    let g = PeriodicGrid::new(8, 3.0, 2).unwrap();
    let f = ScalarField::from_fn(&g, |p| c((2.0 * PI * p[0] / 3.0).sin() * (2.0 * PI * p[1] / 3.0).cos(), 0.3));
    for axis in 0..2 {
        let d = derivative_matrix(&g, axis);
        let a = &d * nalgebra::DVector::from_column_slice(&f.values);
        let b = spectral_derivative(&f, axis).unwrap();
        for (x, y) in a.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}

#[test]
fn full_torus_inner_products() {
    let g = grid(32);
    let one = ScalarField::from_fn(&g, |_| c(1.0, 0.0));
    assert!((inner_product(&one, &one, &Region::Full).unwrap() - c(2.0 * PI, 0.0)).norm() < 1e-12);
    let e1 = ScalarField::from_fn(&g, |p| C64::from_polar(1.0, p[0]));
    let e2 = ScalarField::from_fn(&g, |p| C64::from_polar(1.0, 2.0 * p[0]));
    assert!((inner_product(&e1, &e1, &Region::Full).unwrap() - c(2.0 * PI, 0.0)).norm() < 1e-12);
    assert!(inner_product(&e1, &e2, &Region::Full).unwrap().norm() < 1e-12);
    let other = grid(16);
    let o = ScalarField::from_fn(&other, |_| c(1.0, 0.0));
    assert!(inner_product(&one, &o, &Region::Full).is_err());
}

#[test]
fn arc_inner_product_matches_adaptive_quadrature() {
    let g = grid(64);
    let f = |x: f64| c(x.cos().exp(), (2.0 * x).sin());
    let h = |x: f64| c(1.0 / (2.0 + x.sin()), 0.5 * x.cos());
    let fs = ScalarField::from_fn(&g, |p| f(p[0]));
    let hs = ScalarField::from_fn(&g, |p| h(p[0]));
    let got = inner_product(&fs, &hs, &Region::Arc { alpha: 0.0, beta: PI }).unwrap();
    let (reference, _) = integrate_vec(|x| vec![f(x) * h(x).conj()], 0.0, PI, QuadOptions::default()).unwrap();
    assert!((got - reference[0]).norm() < 1e-8, "{got} vs {}", reference[0]);
}

#[test]
fn delta_pairing() {
    let g = grid(32);
    let d = delta_mode_coefficients(&g, PI / 3.0).unwrap();
    let one: Vec<C64> = vec![c(1.0, 0.0); 32];
    assert!((d.pair(&one) - c(1.0, 0.0)).norm() < 1e-14);
    let e: Vec<C64> = g.axis_nodes().iter().map(|&x| C64::from_polar(1.0, x)).collect();
    assert!((d.pair(&e) - C64::from_polar(1.0, PI / 3.0)).norm() < 1e-13);
}

#[test]
fn delta_pairing_converges_spectrally() {
    let phi = |x: f64| c(1.0 / (2.0 + x.cos()), 0.0);
    let a = 0.7;
    let mut errs = Vec::new();
    for n in [16, 32, 64] {
        let g = grid(n);
        let d = delta_mode_coefficients(&g, a).unwrap();
        let s: Vec<C64> = g.axis_nodes().iter().map(|&x| phi(x)).collect();
        errs.push((d.pair(&s) - phi(a)).norm());
    }
    // Geometric decay: each doubling squares the error, up to round-off.
    assert!(errs[1] < errs[0] * errs[0].sqrt().max(1e-3), "{errs:?}");
    assert!(errs[2] < 1e-10, "{errs:?}");
}

proptest! {
    #[test]
    fn parseval_and_skew_adjointness(
        re in proptest::collection::vec(-1.0f64..1.0, 24),
        im in proptest::collection::vec(-1.0f64..1.0, 24),
    ) {
        let g = PeriodicGrid::new(12, 2.5, 1).unwrap();
        let f = ScalarField::new(&g, (0..12).map(|j| c(re[j], im[j])).collect()).unwrap();
        let h = ScalarField::new(&g, (0..12).map(|j| c(re[12 + j], im[12 + j])).collect()).unwrap();
        // Parseval with the Nyquist slot included.
        let cf = fft_coefficients(&f.values);
        let ch = fft_coefficients(&h.values);
        let modal: C64 = cf.iter().zip(&ch).map(|(a, b)| a * b.conj()).sum::<C64>() * g.circumference();
        let nodal = inner_product(&f, &h, &Region::Full).unwrap();
        prop_assert!((modal - nodal).norm() < 1e-12);
        let df = spectral_derivative(&f, 0).unwrap();
        let dh = spectral_derivative(&h, 0).unwrap();
        let s = inner_product(&df, &h, &Region::Full).unwrap() + inner_product(&f, &dh, &Region::Full).unwrap();
        prop_assert!(s.norm() < 1e-12);
    }
}
