use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cheb::{complexify, ChebGrid};
use crate::error::{Error, Result};
use crate::spectral::{fft_coefficients, fft_synthesis};
use crate::C64;

/// Largest accepted `|f(+-T)| / max |f|`.
pub const WINDOW_DECAY: f64 = 1e-10;

/// Periodic window `[-T, T)` standing in for the axial line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxialWindow {
    pub half_length: f64,
    pub n_axial: usize,
}

impl Default for AxialWindow {
    fn default() -> Self {
        Self { half_length: 16.0, n_axial: 256 }
    }
}

impl AxialWindow {
    pub fn new(half_length: f64, n_axial: usize) -> Result<Self> {
        if !(half_length > 0.0) || n_axial < 4 || n_axial % 2 != 0 {
            return Err(Error::InvalidGrid(format!("axial window needs T > 0 and an even n_axial >= 4, got {half_length}, {n_axial}")));
        }
        Ok(Self { half_length, n_axial })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n_axial as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_axial).map(|j| -self.half_length + j as f64 * self.spacing()).collect()
    }

    fn signed_mode(&self, idx: usize) -> i64 {
        if idx <= self.n_axial / 2 {
            idx as i64
        } else {
            idx as i64 - self.n_axial as i64
        }
    }

    /// Dual variable `pi m / T` of FFT slot `idx`; `None` at the Nyquist slot.
    pub fn tau(&self, idx: usize) -> Option<f64> {
        (idx != self.n_axial / 2).then(|| PI * self.signed_mode(idx) as f64 / self.half_length)
    }

    /// Coefficients `c` with `f(t_j) = sum c_idx exp(i tau_idx t_j)`.
    pub fn forward(&self, values: &[C64]) -> Vec<C64> {
        let mut c = fft_coefficients(values);
        for (idx, ci) in c.iter_mut().enumerate() {
            if self.signed_mode(idx) % 2 != 0 {
                *ci = -*ci;
            }
        }
        c
    }

    pub fn inverse(&self, coeffs: &[C64]) -> Vec<C64> {
        let c: Vec<C64> = coeffs.iter().enumerate().map(|(idx, &ci)| if self.signed_mode(idx) % 2 != 0 { -ci } else { ci }).collect();
        fft_synthesis(&c)
    }

    /// Spectral `d/dt`; the Nyquist coefficient is dropped.
    pub fn derivative(&self, values: &[C64]) -> Vec<C64> {
        let mut c = self.forward(values);
        for (idx, ci) in c.iter_mut().enumerate() {
            *ci = match self.tau(idx) {
                Some(t) => *ci * C64::new(0.0, t),
                None => C64::new(0.0, 0.0),
            };
        }
        self.inverse(&c)
    }

    /// Row-wise `d/dt` of a (nodes x axial) matrix.
    pub fn derivative_rows(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = m.clone();
        for r in 0..m.nrows() {
            let row: Vec<C64> = m.row(r).iter().cloned().collect();
            for (c, v) in self.derivative(&row).into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        out
    }
}

/// Dirichlet velocity data on `Gamma = {alpha, beta} x window`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    pub window: AxialWindow,
    /// Sobolev index: the data are measured in `H^{m+1/2}`.
    pub m: usize,
    /// `values[b][i]`: component `i` at boundary point `b` on the axial nodes.
    pub values: [[Vec<C64>; 2]; 2],
}

impl BoundaryData {
    pub fn new(window: &AxialWindow, m: usize, values: [[Vec<C64>; 2]; 2]) -> Result<Self> {
        if values.iter().flatten().any(|v| v.len() != window.n_axial) {
            return Err(Error::InvalidArgument("boundary samples must match the axial window".into()));
        }
        Ok(Self { window: *window, m, values })
    }

    pub fn zeros(window: &AxialWindow, m: usize) -> Self {
        Self::from_fn(window, m, |_, _| [C64::new(0.0, 0.0); 2])
    }

    /// Samples `f(b, t)` for boundary point `b` (0 = alpha, 1 = beta).
    pub fn from_fn(window: &AxialWindow, m: usize, f: impl Fn(usize, f64) -> [C64; 2]) -> Self {
        let t = window.nodes();
        let values = std::array::from_fn(|b| {
            let samples: Vec<[C64; 2]> = t.iter().map(|&s| f(b, s)).collect();
            std::array::from_fn(|i| samples.iter().map(|v| v[i]).collect())
        });
        Self { window: *window, m, values }
    }

    /// `exp(-(t - center)^2 / (2 width^2))` times a fixed vector per boundary point.
    pub fn gaussian(window: &AxialWindow, m: usize, vectors: [[C64; 2]; 2], center: f64, width: f64) -> Self {
        Self::from_fn(window, m, |b, t| {
            let g = (-(t - center).powi(2) / (2.0 * width * width)).exp();
            [vectors[b][0] * g, vectors[b][1] * g]
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().flatten().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().flatten().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |f|` at the window ends relative to `max |f|`.
    pub fn window_defect(&self) -> f64 {
        let sup = self.sup();
        if sup == 0.0 {
            return 0.0;
        }
        let n = self.window.n_axial;
        let edge = self.values.iter().flatten().flat_map(|v| [v[0].norm(), v[n - 1].norm()]).fold(0.0, f64::max);
        edge / sup
    }

    /// Per-`tau` data vectors `(f_x(alpha), f_t(alpha), f_x(beta), f_t(beta))` in FFT order.
    pub fn modes(&self) -> Vec<DVector<C64>> {
        let c: Vec<Vec<C64>> = self.values.iter().flatten().map(|v| self.window.forward(v)).collect();
        (0..self.window.n_axial).map(|idx| DVector::from_iterator(4, c.iter().map(|ci| ci[idx]))).collect()
    }

    /// `H^s(Gamma)` norm through the multiplier `(1 + tau^2)^{s/2}` on the window.
    pub fn norm(&self, s: f64) -> f64 {
        let w = &self.window;
        let total: f64 = self
            .values
            .iter()
            .flatten()
            .map(|v| {
                w.forward(v)
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| {
                        let t = w.tau(idx).unwrap_or(PI * (w.n_axial / 2) as f64 / w.half_length);
                        (1.0 + t * t).powf(s) * c.norm_sqr()
                    })
                    .sum::<f64>()
            })
            .sum();
        (2.0 * w.half_length * total).sqrt()
    }
}

/// Fields on `Omega`: each component is a (Chebyshev nodes x axial nodes) matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcField {
    pub grid: ChebGrid,
    pub window: AxialWindow,
    pub components: Vec<DMatrix<C64>>,
}

impl ArcField {
    pub fn zeros(grid: &ChebGrid, window: &AxialWindow, ncomp: usize) -> Self {
        Self { grid: grid.clone(), window: *window, components: vec![DMatrix::zeros(grid.len(), window.n_axial); ncomp] }
    }

    pub fn from_fn(grid: &ChebGrid, window: &AxialWindow, ncomp: usize, f: impl Fn(f64, f64) -> Vec<C64>) -> Self {
        let mut out = Self::zeros(grid, window, ncomp);
        for (c, &t) in window.nodes().iter().enumerate() {
            for (r, &x) in grid.nodes.iter().enumerate() {
                for (k, v) in f(x, t).into_iter().enumerate().take(ncomp) {
                    out.components[k][(r, c)] = v;
                }
            }
        }
        out
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    pub fn dx(&self, i: usize) -> DMatrix<C64> {
        complexify(&self.grid.diff_matrix()) * &self.components[i]
    }

    pub fn dt(&self, i: usize) -> DMatrix<C64> {
        self.window.derivative_rows(&self.components[i])
    }

    /// Per-`tau` stacked nodal coefficients, component-major.
    pub fn modes(&self) -> Vec<DVector<C64>> {
        let n = self.grid.len();
        let nc = self.ncomp();
        let mut out = vec![DVector::zeros(nc * n); self.window.n_axial];
        for (c, m) in self.components.iter().enumerate() {
            for r in 0..n {
                let row: Vec<C64> = m.row(r).iter().cloned().collect();
                for (idx, v) in self.window.forward(&row).into_iter().enumerate() {
                    out[idx][c * n + r] = v;
                }
            }
        }
        out
    }

    pub fn from_modes(grid: &ChebGrid, window: &AxialWindow, ncomp: usize, modes: &[DVector<C64>]) -> Self {
        let n = grid.len();
        let mut out = Self::zeros(grid, window, ncomp);
        for c in 0..ncomp {
            for r in 0..n {
                let coeffs: Vec<C64> = modes.iter().map(|v| v[c * n + r]).collect();
                for (col, v) in window.inverse(&coeffs).into_iter().enumerate() {
                    out.components[c][(r, col)] = v;
                }
            }
        }
        out
    }

    /// The first `k` components.
    pub fn leading(&self, k: usize) -> Self {
        Self { grid: self.grid.clone(), window: self.window, components: self.components[..k].to_vec() }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flat_map(|m| m.iter()).map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid.clone(), window: self.window, components: self.components.iter().map(|m| m * C64::new(s, 0.0)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { grid: self.grid.clone(), window: self.window, components: self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect() }
    }

    /// Velocity trace at the two ends of the arc.
    pub fn boundary_values(&self, m: usize) -> BoundaryData {
        let last = self.grid.len() - 1;
        let values = std::array::from_fn(|b| {
            let r = if b == 0 { 0 } else { last };
            std::array::from_fn(|i| self.components[i].row(r).iter().cloned().collect())
        });
        BoundaryData { window: self.window, m, values }
    }
}
