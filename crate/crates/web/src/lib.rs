//! Three operations for the static demo page in `www/`. Built for `wasm32-unknown-unknown`
//! with `wasm-bindgen`; the same functions compile and are tested natively.

use std::f64::consts::PI;

use cylstokes::cylinder::assemble_xi_closed_torus;
use cylstokes::layer::{invertibility_scan_boundary, BoundarySpec};
use cylstokes::spectral::{PeriodicGrid, PotentialPair};
use cylstokes::symbols::{inverse_constants, stokes_symbol, stokes_symbol_inverse};
use nalgebra::DMatrix;
use wasm_bindgen::prelude::*;

/// `[f, g, ||Sigma(xi) Sigma(xi)^-1 - I||]` for the principal symbol at `xi = (xi_x, xi_t)`.
#[wasm_bindgen]
pub fn symbol_inverse(xi_x: f64, xi_t: f64, v0: f64) -> Result<Vec<f64>, String> {
    let xi = [xi_x, xi_t];
    let a = stokes_symbol(&xi, v0).map_err(|e| e.to_string())?;
    let b = stokes_symbol_inverse(&xi, v0).map_err(|e| e.to_string())?;
    let (f, g) = inverse_constants(v0);
    Ok(vec![f, g, (a * b - DMatrix::identity(3, 3)).norm()])
}

/// Rows `[tau, min sigma Xi, min sigma S, min sigma (1/2 + K), flagged]` flattened, for
/// constant potentials on the half circle and integer `tau` in `[-tau_max, tau_max]`.
#[wasm_bindgen]
pub fn boundary_scan(v: f64, v0: f64, n: usize, tau_max: u32) -> Result<Vec<f64>, String> {
    let grid = PeriodicGrid::new(n, 2.0 * PI, 1).map_err(|e| e.to_string())?;
    let spec = BoundarySpec::new(0.0, PI, 2.0 * PI).map_err(|e| e.to_string())?;
    let taus: Vec<f64> = (-(tau_max as i32)..=tau_max as i32).map(f64::from).collect();
    let scan = invertibility_scan_boundary(&taus, &PotentialPair::constant(&grid, v, v0), &spec);
    Ok(scan
        .rows
        .iter()
        .flat_map(|r| [r.tau, r.min_sigma_xi, r.min_sigma_s, r.min_sigma_half_plus_k, f64::from(u8::from(r.flagged))])
        .collect())
}

/// `[kernel dimension, singular-value gap]` of `Xi` on the closed torus of side `2 pi`.
#[wasm_bindgen]
pub fn torus_kernel(v: f64, v0: f64, n: usize) -> Result<Vec<f64>, String> {
    let grid = PeriodicGrid::new(n, 2.0 * PI, 1).map_err(|e| e.to_string())?;
    let s = assemble_xi_closed_torus(&PotentialPair::constant(&grid, v, v0), n, 2.0 * PI).map_err(|e| e.to_string())?;
    Ok(vec![s.report.kernel_dim as f64, s.report.gap])
}
