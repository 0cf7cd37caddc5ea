use nalgebra::DMatrix;

use super::field::ArcField;
use crate::cheb::complexify;
use crate::error::Result;
use crate::spectral::{apply_along_axis, fft_coefficients, inner_values, spectral_derivative, Region, ScalarField};
use crate::C64;

/// Multi-indices `alpha` in `d` variables with `|alpha| <= m`, weighted by the multinomial
/// `m! / (alpha! (m - |alpha|)!)` so that the derivative sum reproduces `(1 + |xi|^2)^m`.
fn weighted_indices(d: usize, m: usize) -> Vec<(Vec<usize>, f64)> {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let total: usize = idx.iter().sum();
        if total <= m {
            let w = fact(m) / (idx.iter().map(|&a| fact(a)).product::<f64>() * fact(m - total));
            out.push((idx.clone(), w));
        }
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            idx[k] += 1;
            if idx[k] <= m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `||(1 + Delta)^{s/2} f||_{L^2}` on the full torus by Fourier multipliers.
pub fn sobolev_norm_torus(f: &ScalarField, s: f64) -> f64 {
    let g = &f.grid;
    let mut c = f.values.clone();
    for axis in 0..g.dim() {
        c = apply_along_axis(g, &c, axis, |line| {
            let v = fft_coefficients(line);
            line.copy_from_slice(&v);
        });
    }
    let n = g.n_points();
    let k2 = |idx: usize| {
        let m = if idx < n / 2 { idx as i64 } else { idx as i64 - n as i64 };
        g.wave_number(m).powi(2)
    };
    let total: f64 = c
        .iter()
        .enumerate()
        .map(|(flat, v)| {
            let r2 = if g.dim() == 1 { k2(flat) } else { k2(flat / n) + k2(flat % n) };
            (1.0 + r2).powf(s) * v.norm_sqr()
        })
        .sum();
    (g.circumference().powi(g.dim() as i32) * total).sqrt()
}

/// Weighted derivative sum `sum_alpha w_alpha ||d^alpha f||^2_{L^2(region)}`.
pub fn sobolev_norm_derivative_sum(f: &ScalarField, m: usize, region: &Region) -> Result<f64> {
    let mut total = 0.0;
    for (alpha, w) in weighted_indices(f.grid.dim(), m) {
        let mut g = f.clone();
        for (axis, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                g = spectral_derivative(&g, axis)?;
            }
        }
        total += w * inner_values(&g.grid, &g.values, &g.values, region)?.re;
    }
    Ok(total.sqrt())
}

/// Multiplier route on the full torus, derivative sum on any other region.
pub fn sobolev_norm(f: &ScalarField, m: usize, region: &Region) -> Result<f64> {
    match region {
        Region::Full => Ok(sobolev_norm_torus(f, m as f64)),
        _ => sobolev_norm_derivative_sum(f, m, region),
    }
}

fn l2_sq(field: &ArcField, m: &DMatrix<C64>, interior: bool) -> f64 {
    let w = field.grid.weights();
    let h = field.window.spacing();
    let last = w.len() - 1;
    (0..w.len())
        .filter(|&j| !interior || (j != 0 && j != last))
        .map(|j| w[j] * h * m.row(j).iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum()
}

/// `L^2(Omega)` norm of the selected components, optionally skipping the boundary nodes.
pub fn l2_norm_arc(field: &ArcField, comps: &[usize], interior: bool) -> f64 {
    comps.iter().map(|&c| l2_sq(field, &field.components[c], interior)).sum::<f64>().sqrt()
}

/// Real parts of `sqrt(w_alpha * quadrature weight) * d^alpha f` for the first component,
/// stacked over all multi-indices; the squared Euclidean norm is `||f||^2_{H^m}`.
pub(crate) fn derivative_stack(field: &ArcField, m: usize) -> Vec<f64> {
    let d = complexify(&field.grid.diff_matrix());
    let w = field.grid.weights();
    let h = field.window.spacing();
    let weights = weighted_indices(2, m);
    let mut out = Vec::new();
    let mut by_x = field.components[0].clone();
    for a in 0..=m {
        if a > 0 {
            by_x = &d * &by_x;
        }
        let mut g = by_x.clone();
        for b in 0..=(m - a) {
            if b > 0 {
                g = field.window.derivative_rows(&g);
            }
            let wa = weights.iter().find(|(al, _)| al[0] == a && al[1] == b).map_or(0.0, |(_, w)| *w);
            let rows = g.nrows();
            out.extend(g.iter().enumerate().map(|(k, v)| v.re * (wa * w[k % rows] * h).sqrt()));
        }
    }
    out
}

/// `H^m(Omega)` norm of the selected components by the weighted derivative sum.
pub fn sobolev_norm_arc(field: &ArcField, comps: &[usize], m: usize) -> f64 {
    let d = complexify(&field.grid.diff_matrix());
    let mut total = 0.0;
    for &c in comps {
        let mut by_x = field.components[c].clone();
        for a in 0..=m {
            if a > 0 {
                by_x = &d * &by_x;
            }
            let mut g = by_x.clone();
            for b in 0..=(m - a) {
                if b > 0 {
                    g = field.window.derivative_rows(&g);
                }
                let w = weighted_indices(2, m).into_iter().find(|(al, _)| al[0] == a && al[1] == b).map_or(0.0, |(_, w)| w);
                total += w * l2_sq(field, &g, false);
            }
        }
    }
    total.sqrt()
}
