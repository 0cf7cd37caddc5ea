//! One-dimensional inverse Fourier transforms of functions with `L / x` tails and
//! their one-sided values at the origin.
//!
//! Convention: `F^{-1}u(t) = (1 / 2 pi) \int u(x) e^{i x t} dx`.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_line, QuadOptions};
use crate::C64;

/// One-sided values of an inverse transform at the origin.
#[derive(Clone, Debug, Serialize)]
pub struct JumpReport {
    pub left_limit: C64,
    pub right_limit: C64,
    pub jump: C64,
    pub average: C64,
    pub grid_size: usize,
    pub extrapolation_error_estimate: f64,
    /// `i L` from the tail constant.
    pub expected_jump: C64,
    /// `(1 / 2 pi) \int (u(x) + u(-x)) / 2 dx`.
    pub expected_average: C64,
}

impl JumpReport {
    fn from_limits(left: C64, right: C64, n: usize, err: f64, expected_jump: C64, expected_average: C64) -> Self {
        Self {
            left_limit: left,
            right_limit: right,
            jump: right - left,
            average: (right + left) * 0.5,
            grid_size: n,
            extrapolation_error_estimate: err,
            expected_jump,
            expected_average,
        }
    }
}

/// Even smooth cutoff equal to 1 on `[-r/2, r/2]` and supported in `(-r, r)`.
pub fn cutoff(x: f64, r: f64) -> f64 {
    let s = (x.abs() - 0.5 * r) / (0.5 * r);
    1.0 - smooth_step(s)
}

/// `0` for `s <= 0`, `1` for `s >= 1`, built from `exp(-1/s)`.
pub fn smooth_step(s: f64) -> f64 {
    let psi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        psi(s) / (psi(s) + psi(1.0 - s))
    }
}

/// Sine integral `Si(z) = \int_0^z sin(s)/s ds`.
pub fn sine_integral(z: f64) -> f64 {
    if z < 0.0 {
        return -sine_integral(-z);
    }
    if z <= 4.0 {
        let mut term = z;
        let mut sum = z;
        let z2 = z * z;
        let mut n = 0usize;
        loop {
            let a = (2 * n + 1) as f64;
            term *= -z2 / ((a + 1.0) * (a + 2.0));
            let add = term / (a + 2.0);
            sum += add;
            n += 1;
            if add.abs() < 1e-17 * sum.abs().max(1.0) || n > 200 {
                break;
            }
        }
        sum
    } else {
        // Continued fraction for E1(i z) evaluated by the modified Lentz method.
        let tiny = 1e-300;
        let mut b = C64::new(1.0, z);
        let mut c = C64::new(1.0 / tiny, 0.0);
        let mut d = C64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..500 {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += C64::new(2.0, 0.0);
            d = C64::new(1.0, 0.0) / (d * a + b);
            c = b + C64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= C64::new(z.cos(), -z.sin());
        PI / 2.0 + h.im
    }
}

/// `(1 / 2 pi) \int_{|x| > W} e^{i x t} / x dx` for `t != 0`.
fn reciprocal_tail(w: f64, t: f64) -> C64 {
    C64::new(0.0, t.signum() * (0.5 - sine_integral(w * t.abs()) / PI))
}

/// Richardson limit from values at `h`, `2h`, `4h` of a function smooth up to the origin.
/// Returns the extrapolated value and the size of the last correction.
pub fn richardson3(f1: C64, f2: C64, f4: C64) -> (C64, f64) {
    let r1 = f1 * 2.0 - f2;
    let r2 = f2 * 2.0 - f4;
    let r = (r1 * 4.0 - r2) / 3.0;
    (r, (r - r1).norm())
}

/// Inverse transform of `(1 - chi0(x)) / x` near the origin.
///
/// Samples on `[-W, W)` with `n_samples` points, inverse FFT, analytic correction for the
/// truncated `1/x` tails, and Richardson extrapolation from `t = +-h, +-2h, +-4h`.
pub fn pv_inverse_ft(cutoff_radius: f64, n_samples: usize, half_width: f64) -> Result<JumpReport> {
    if n_samples < 1 << 12 || !n_samples.is_power_of_two() {
        return Err(Error::InvalidArgument("n_samples must be a power of two >= 2^12".into()));
    }
    if !(cutoff_radius > 0.0 && half_width > 2.0 * cutoff_radius) {
        return Err(Error::InvalidArgument("need 0 < 2 r < half_width".into()));
    }
    let z = |x: f64| if x == 0.0 { 0.0 } else { (1.0 - cutoff(x, cutoff_radius)) / x };
    let values = inverse_transform_samples(&|x| C64::new(z(x), 0.0), n_samples, half_width);
    let h = PI / half_width;
    let at = |j: i64| values(j) + reciprocal_tail(half_width, j as f64 * h);
    let (right, er) = richardson3(at(1), at(2), at(4));
    let (left, el) = richardson3(at(-1), at(-2), at(-4));
    let err = er.max(el);
    if err > 1e-2 {
        return Err(Error::Extraction(format!("extrapolation error estimate {err:.3e} exceeds 1e-2")));
    }
    Ok(JumpReport::from_limits(left, right, n_samples, err, C64::new(0.0, 1.0), C64::new(0.0, 0.0)))
}

/// Inverse discrete transform of samples `u(x_j)`, `x_j = -W + j dx`, on the dual grid
/// `t_k = k pi / W`. The sample at `x = -W` is given weight one half together with its
/// periodic image at `+W`, which is the trapezoid rule on `[-W, W]`.
fn inverse_transform_samples(u: &dyn Fn(f64) -> C64, n: usize, w: f64) -> impl Fn(i64) -> C64 {
    let dx = 2.0 * w / n as f64;
    let mut buf: Vec<C64> = (0..n)
        .map(|j| {
            let x = -w + j as f64 * dx;
            if j == 0 {
                (u(-w) + u(w)) * 0.5
            } else {
                u(x)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    move |k: i64| {
        // sum_j u_j e^{i x_j t_k} = e^{-i W t_k} sum_j u_j e^{2 pi i j k / n}
        let slot = k.rem_euclid(n as i64) as usize;
        let phase = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        buf[slot] * (phase * dx / (2.0 * PI))
    }
}

/// Uniform samples of a function on a symmetric window `[-W, W)`.
#[derive(Clone, Debug)]
pub struct LineSamples {
    pub half_width: f64,
    pub values: Vec<C64>,
    /// Value at `+W`, closing the trapezoid rule.
    pub right_end: C64,
}

impl LineSamples {
    pub fn from_fn(f: impl Fn(f64) -> C64, n: usize, half_width: f64) -> Self {
        let dx = 2.0 * half_width / n as f64;
        let values = (0..n).map(|j| f(-half_width + j as f64 * dx)).collect();
        Self { half_width, values, right_end: f(half_width) }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.values.len() as f64
    }

    fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }
}

/// Options for [`jump_functional`].
#[derive(Clone, Copy, Debug)]
pub struct JumpOptions {
    /// Relative mismatch tolerated between the tail constants at `+inf` and `-inf`.
    pub tail_tolerance: f64,
    /// Step of the extrapolation nodes `t = h, 2h, 4h`, as a multiple of `pi / W`.
    pub step_multiple: usize,
}

impl Default for JumpOptions {
    fn default() -> Self {
        Self { tail_tolerance: 1e-2, step_multiple: 8 }
    }
}

/// One-sided values at `0` of `F^{-1}u` for a function with `x u(x) -> L` at both ends.
///
/// The values are measured from the discrete inverse transform (with the `L/x` tail beyond
/// the window added in closed form) and compared with the prediction `+- i L / 2 + average`.
pub fn jump_functional(u: &LineSamples, l_hint: Option<C64>, opts: JumpOptions) -> Result<JumpReport> {
    let n = u.values.len();
    if n < 1 << 12 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument("sample count must be a power of two >= 2^12".into()));
    }
    let w = u.half_width;
    let dx = u.spacing();

    // Tail constants from averages of x u(x) over the outer quarter of each side.
    let mut lp = C64::new(0.0, 0.0);
    let mut lm = C64::new(0.0, 0.0);
    let mut count = 0usize;
    for j in 0..n / 4 {
        let jm = j;
        let jp = n - 1 - j;
        lm += u.values[jm] * u.x(jm);
        lp += u.values[jp] * u.x(jp);
        count += 1;
    }
    lp /= count as f64;
    lm /= count as f64;
    let scale = 1.0f64.max(lp.norm()).max(lm.norm());
    if (lp - lm).norm() > opts.tail_tolerance * scale {
        return Err(Error::Hypothesis(format!(
            "tail limits differ: x u(x) -> {lp} at +inf but {lm} at -inf; the principal part is not odd"
        )));
    }
    let l_est = (lp + lm) * 0.5;
    let l = match l_hint {
        Some(h) => {
            if (h - l_est).norm() > opts.tail_tolerance * scale {
                return Err(Error::Hypothesis(format!("tail constant {l_est} disagrees with hint {h}")));
            }
            h
        }
        None => l_est,
    };

    // Average of the even part over the window; the remainder of an O(|x|^{-1-eps}) tail is dropped.
    let mut even_sum = C64::new(0.0, 0.0);
    for j in 1..n {
        let mirror = n - j;
        even_sum += (u.values[j] + u.values[mirror]) * 0.5;
    }
    even_sum += (u.values[0] + u.right_end) * 0.5;
    let expected_average = even_sum * dx / (2.0 * PI);

    let samples = u.values.clone();
    let right_end = u.right_end;
    let lookup = move |x: f64| {
        let j = ((x + w) / dx).round() as i64;
        if j >= samples.len() as i64 {
            right_end
        } else {
            samples[j as usize]
        }
    };
    let transform = inverse_transform_samples(&lookup, n, w);
    let m = opts.step_multiple as i64;
    let h = PI / w;
    let at = |j: i64| transform(j * m) + l * reciprocal_tail(w, (j * m) as f64 * h);
    let (right, er) = richardson3(at(1), at(2), at(4));
    let (left, el) = richardson3(at(-1), at(-2), at(-4));
    Ok(JumpReport::from_limits(
        left,
        right,
        n,
        er.max(el),
        C64::new(0.0, 1.0) * l,
        expected_average,
    ))
}

/// `(value, closed form)` for the three rational integrals over the line at parameter `a`.
pub fn residue_integrals(a: f64) -> Result<[(f64, f64); 3]> {
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_panels: 4000 };
    let a2 = a * a;
    let (i1, _) = integrate_line(|x| x * x / (a2 + x * x).powi(2), opts)?;
    let (i2, _) = integrate_line(|x| 1.0 / (a2 + x * x).powi(2), opts)?;
    let (i3, _) = integrate_line(|x| 1.0 / (a2 + x * x), opts)?;
    Ok([(i1, PI / (2.0 * a)), (i2, PI / (2.0 * a * a2)), (i3, PI / a)])
}

/// Largest deviation from oddness of the discrete transform of odd samples.
pub fn odd_parity_defect(f: impl Fn(f64) -> f64, n: usize, half_width: f64) -> f64 {
    let t = inverse_transform_samples(&|x| C64::new(f(x), 0.0), n, half_width);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 1..(n as i64 / 2) {
        worst = worst.max((t(k) + t(-k)).norm());
        scale = scale.max(t(k).norm());
    }
    worst / scale.max(f64::MIN_POSITIVE)
}
