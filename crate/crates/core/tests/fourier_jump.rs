use std::f64::consts::PI;

use cylstokes::fourier_jump::*;
use cylstokes::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn sine_integral_reference_values() {
    // Values from tabulated Si(x).
    let table = [
        (0.5, 0.493_107_418_043_066_7),
        (1.0, 0.946_083_070_367_183_0),
        (3.0, 1.848_652_527_999_468_3),
        (5.0, 1.549_931_244_944_674_1),
        (10.0, 1.658_347_594_218_874_0),
        (50.0, 1.551_617_072_485_976_0),
    ];
    for (x, v) in table {
        assert!((sine_integral(x) - v).abs() < 1e-13, "Si({x}) = {}", sine_integral(x));
    }
}

#[test]
fn principal_value_transform_has_half_i_limits() {
    let r = pv_inverse_ft(1.0, 1 << 20, 1024.0).unwrap();
    assert!((r.right_limit - c(0.0, 0.5)).norm() < 1e-3, "{:?}", r);
    assert!((r.left_limit - c(0.0, -0.5)).norm() < 1e-3, "{:?}", r);
    assert!(r.extrapolation_error_estimate < 1e-3);
}

#[test]
fn principal_value_refinement_reduces_error_estimate() {
    let a = pv_inverse_ft(1.0, 1 << 16, 64.0).unwrap();
    let b = pv_inverse_ft(1.0, 1 << 17, 128.0).unwrap();
    assert!(b.extrapolation_error_estimate <= 0.5 * a.extrapolation_error_estimate, "{a:?} {b:?}");
}

#[test]
fn even_integrable_function_has_no_jump() {
    let u = LineSamples::from_fn(|x| c(1.0 / (1.0 + x * x), 0.0), 1 << 20, 1024.0);
    let r = jump_functional(&u, None, JumpOptions::default()).unwrap();
    assert!(r.jump.norm() < 1e-3);
    // F^{-1}[1/(1+x^2)](t) = e^{-|t|} / 2
    assert!((r.right_limit - c(0.5, 0.0)).norm() < 1e-3, "{r:?}");
}

#[test]
fn odd_rational_function_matches_closed_form() {
    // F^{-1}[x/(1+x^2)](t) = (i/2) sgn(t) e^{-|t|}
    let u = LineSamples::from_fn(|x| c(x / (1.0 + x * x), 0.0), 1 << 20, 1024.0);
    let r = jump_functional(&u, Some(c(1.0, 0.0)), JumpOptions::default()).unwrap();
    assert!((r.right_limit - c(0.0, 0.5)).norm() < 1e-3, "{r:?}");
    assert!((r.left_limit - c(0.0, -0.5)).norm() < 1e-3, "{r:?}");
    assert!((r.jump - r.expected_jump).norm() < 1e-3);
    assert!(r.average.norm() < 1e-3);
}

#[test]
fn tail_constant_three_gives_jump_three_i() {
    let u = LineSamples::from_fn(|x| c(3.0 * x / (1.0 + x * x) + (-x * x).exp(), 0.0), 1 << 20, 1024.0);
    let r = jump_functional(&u, None, JumpOptions::default()).unwrap();
    assert!((r.jump - c(0.0, 3.0)).norm() < 1e-3, "{r:?}");
    // Even part e^{-x^2} has F^{-1} at 0 equal to sqrt(pi) / (2 pi).
    assert!((r.average - c(PI.sqrt() / (2.0 * PI), 0.0)).norm() < 1e-3, "{r:?}");
    assert!((r.average - r.expected_average).norm() < 1e-3);
}

#[test]
fn mismatched_tails_are_rejected() {
    let u = LineSamples::from_fn(|x| c(1.0 / (1.0 + x.abs()), 0.0), 1 << 14, 256.0);
    assert!(jump_functional(&u, None, JumpOptions::default()).is_err());
}

#[test]
fn residue_integrals_match_closed_forms() {
    for a in [0.5, 1.0, 2.0] {
        for (num, exact) in residue_integrals(a).unwrap() {
            assert!((num - exact).abs() < 1e-8, "a = {a}: {num} vs {exact}");
        }
    }
}

#[test]
fn transform_of_odd_samples_is_odd() {
    let d = odd_parity_defect(|x| x / (1.0 + x * x) * (-0.01 * x * x).exp(), 1 << 14, 64.0);
    assert!(d < 1e-10, "{d}");
}
