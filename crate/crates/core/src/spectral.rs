//! Periodic cross-section grids, sampled fields, Fourier differentiation,
//! weighted inner products and band-limited point sources.
//!
//! Functions on a grid of `N` points per axis are identified with trigonometric
//! polynomials in the band `|m| <= N/2 - 1`; the Nyquist mode is always dropped.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::C64;

/// Uniform grid on the flat torus of side `circumference` in `dim` dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    length: f64,
    dim: usize,
}

impl PeriodicGrid {
    pub fn new(n_points: usize, circumference: f64, dim: usize) -> Result<Self> {
        if n_points < 4 || n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and at least 4, got {n_points}"
            )));
        }
        if !(circumference > 0.0 && circumference.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "circumference must be positive, got {circumference}"
            )));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        Ok(Self { n: n_points, length: circumference, dim })
    }

    /// Points per axis.
    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Total number of nodes, `N^d`.
    pub fn size(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn circumference(&self) -> f64 {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight attached to every node.
    pub fn weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Largest retained mode index.
    pub fn band(&self) -> usize {
        self.n / 2 - 1
    }

    /// Axis coordinates `x_j = j L / N`.
    pub fn axis_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 * self.spacing()).collect()
    }

    /// Node coordinates; for `d = 2` the flat index is `i * N + j` for `(x_i, y_j)`.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let x = self.axis_nodes();
        match self.dim {
            1 => x.iter().map(|&a| vec![a]).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.size());
                for &a in &x {
                    for &b in &x {
                        out.push(vec![a, b]);
                    }
                }
                out
            }
        }
    }

    pub fn wave_number(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.length
    }

    /// Wave numbers `2 pi m / L` for `m = -N/2 .. N/2 - 1`.
    pub fn wave_numbers(&self) -> Vec<f64> {
        let h = (self.n / 2) as i64;
        (-h..h).map(|m| self.wave_number(m)).collect()
    }

    /// Mode index of FFT slot `idx`, or `None` for the dropped Nyquist slot.
    pub fn fft_mode(&self, idx: usize) -> Option<i64> {
        let h = self.n / 2;
        match idx.cmp(&h) {
            std::cmp::Ordering::Less => Some(idx as i64),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(idx as i64 - self.n as i64),
        }
    }
}

/// Complex samples of a scalar function on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: PeriodicGrid,
    pub values: Vec<C64>,
}

impl ScalarField {
    pub fn new(grid: &PeriodicGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.size(),
                values.len()
            )));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self { grid: grid.clone(), values: vec![C64::new(0.0, 0.0); grid.size()] }
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(&[f64]) -> C64) -> Self {
        let values = grid.points().iter().map(|p| f(p)).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }
}

/// Tangent vector field stored as `d + 1` components, tangential first, axial last.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: PeriodicGrid,
    pub components: Vec<Vec<C64>>,
}

impl VectorField {
    pub fn new(grid: &PeriodicGrid, components: Vec<Vec<C64>>) -> Result<Self> {
        if components.len() != grid.dim() + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} components, got {}",
                grid.dim() + 1,
                components.len()
            )));
        }
        if components.iter().any(|c| c.len() != grid.size()) {
            return Err(Error::InvalidArgument("component length differs from grid size".into()));
        }
        Ok(Self { grid: grid.clone(), components })
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self {
            grid: grid.clone(),
            components: vec![vec![C64::new(0.0, 0.0); grid.size()]; grid.dim() + 1],
        }
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(&[f64]) -> Vec<C64>) -> Self {
        let pts = grid.points();
        let mut components = vec![Vec::with_capacity(grid.size()); grid.dim() + 1];
        for p in &pts {
            let v = f(p);
            for (c, val) in components.iter_mut().zip(v) {
                c.push(val);
            }
        }
        Self { grid: grid.clone(), components }
    }

    pub fn component(&self, i: usize) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.components[i].clone() }
    }
}

/// Velocity-pressure pair `U = (u, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField {
    pub velocity: VectorField,
    pub pressure: ScalarField,
}

impl StateField {
    pub fn new(velocity: VectorField, pressure: ScalarField) -> Result<Self> {
        if velocity.grid != pressure.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self { velocity, pressure })
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self { velocity: VectorField::zeros(grid), pressure: ScalarField::zeros(grid) }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.pressure.grid
    }

    /// Stacked vector `(u_1, .., u_{d+1}, p)`, the layout used by assembled matrices.
    pub fn to_vector(&self) -> DVector<C64> {
        let mut out = Vec::with_capacity((self.grid().dim() + 2) * self.grid().size());
        for c in &self.velocity.components {
            out.extend_from_slice(c);
        }
        out.extend_from_slice(&self.pressure.values);
        DVector::from_vec(out)
    }

    pub fn from_vector(grid: &PeriodicGrid, v: &DVector<C64>) -> Result<Self> {
        let n = grid.size();
        let nc = grid.dim() + 2;
        if v.len() != nc * n {
            return Err(Error::InvalidArgument(format!(
                "expected vector of length {}, got {}",
                nc * n,
                v.len()
            )));
        }
        let s = v.as_slice();
        let components = (0..nc - 1).map(|c| s[c * n..(c + 1) * n].to_vec()).collect();
        Ok(Self {
            velocity: VectorField { grid: grid.clone(), components },
            pressure: ScalarField { grid: grid.clone(), values: s[(nc - 1) * n..].to_vec() },
        })
    }
}

/// Sampled potentials `V` (Hermitian `(d+1) x (d+1)` per node) and `V0` (real per node).
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialPair {
    pub grid: PeriodicGrid,
    pub v: Vec<DMatrix<C64>>,
    pub v0: Vec<f64>,
}

impl PotentialPair {
    /// Scalar-diagonal `V = v I` and `V0 = v0`, both constant.
    pub fn constant(grid: &PeriodicGrid, v: f64, v0: f64) -> Self {
        Self::scalar(grid, |_| (v, v0))
    }

    /// Scalar-diagonal potentials given pointwise.
    pub fn scalar(grid: &PeriodicGrid, f: impl Fn(&[f64]) -> (f64, f64)) -> Self {
        let k = grid.dim() + 1;
        let (v, v0) = grid
            .points()
            .iter()
            .map(|p| {
                let (a, b) = f(p);
                (DMatrix::from_diagonal_element(k, k, C64::new(a, 0.0)), b)
            })
            .unzip();
        Self { grid: grid.clone(), v, v0 }
    }

    pub fn from_samples(grid: &PeriodicGrid, v: Vec<DMatrix<C64>>, v0: Vec<f64>) -> Result<Self> {
        let k = grid.dim() + 1;
        if v.len() != grid.size() || v0.len() != grid.size() {
            return Err(Error::InvalidArgument("potential sample count differs from grid".into()));
        }
        if v.iter().any(|m| m.nrows() != k || m.ncols() != k) {
            return Err(Error::InvalidArgument(format!("V must be {k} x {k} at each node")));
        }
        if v.iter().any(|m| (m - m.adjoint()).norm() > 1e-12 * (1.0 + m.norm())) {
            return Err(Error::InvalidArgument("V must be Hermitian".into()));
        }
        Ok(Self { grid: grid.clone(), v, v0 })
    }

    /// The common value when both potentials are constant in space.
    pub fn constant_values(&self) -> Option<(DMatrix<C64>, f64)> {
        let v = &self.v[0];
        let v0 = self.v0[0];
        let same = self.v.iter().all(|m| (m - v).norm() == 0.0) && self.v0.iter().all(|&x| x == v0);
        same.then(|| (v.clone(), v0))
    }

    /// `V(x) >= 0` and `V0(x) >= 0` at every node.
    pub fn is_nonnegative(&self) -> bool {
        self.v0.iter().all(|&x| x >= 0.0) && self.v.iter().all(|m| min_hermitian_eigenvalue(m) >= -1e-12)
    }

    /// Whether `V` is positive definite, resp. `V0 > 0`, at some node selected by `region`.
    pub fn positive_somewhere(&self, region: impl Fn(&[f64]) -> bool) -> (bool, bool) {
        let pts = self.grid.points();
        let mut pv = false;
        let mut pv0 = false;
        for (i, p) in pts.iter().enumerate() {
            if region(p) {
                pv |= min_hermitian_eigenvalue(&self.v[i]) > 0.0;
                pv0 |= self.v0[i] > 0.0;
            }
        }
        (pv, pv0)
    }

    /// Both potentials identically zero.
    pub fn vanishes(&self) -> (bool, bool) {
        (self.v.iter().all(|m| m.norm() == 0.0), self.v0.iter().all(|&x| x == 0.0))
    }
}

pub(crate) fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let e = nalgebra::SymmetricEigen::new(m.clone());
    e.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Fourier coefficients `c_m` (FFT ordering) with `f(x) = sum c_m exp(i k_m x)` along one axis.
pub fn fft_coefficients(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Inverse of [`fft_coefficients`].
pub fn fft_synthesis(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

pub(crate) fn apply_along_axis(grid: &PeriodicGrid, values: &[C64], axis: usize, f: impl Fn(&mut [C64])) -> Vec<C64> {
    let n = grid.n_points();
    let mut out = values.to_vec();
    match (grid.dim(), axis) {
        (1, _) => f(&mut out),
        (_, 1) => out.chunks_mut(n).for_each(&f),
        _ => {
            let mut line = vec![C64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    line[i] = out[i * n + j];
                }
                f(&mut line);
                for i in 0..n {
                    out[i * n + j] = line[i];
                }
            }
        }
    }
    out
}

/// Fourier derivative along `axis`, exact on the retained band.
pub fn spectral_derivative(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = &f.grid;
    if axis >= grid.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range for d = {}", grid.dim())));
    }
    let values = apply_along_axis(grid, &f.values, axis, |line| {
        let mut c = fft_coefficients(line);
        for (idx, ci) in c.iter_mut().enumerate() {
            *ci = match grid.fft_mode(idx) {
                Some(m) => *ci * C64::new(0.0, grid.wave_number(m)),
                None => C64::new(0.0, 0.0),
            };
        }
        line.copy_from_slice(&fft_synthesis(&c));
    });
    Ok(ScalarField { grid: grid.clone(), values })
}

/// One-axis Fourier differentiation matrix with the Nyquist mode removed.
pub fn derivative_matrix_1d(grid: &PeriodicGrid) -> DMatrix<C64> {
    let n = grid.n_points();
    let h = grid.spacing();
    let band = grid.band() as i64;
    DMatrix::from_fn(n, n, |j, l| {
        let dx = (j as f64 - l as f64) * h;
        let s: f64 = (1..=band).map(|m| {
            let k = grid.wave_number(m);
            k * (k * dx).sin()
        }).sum();
        C64::new(-2.0 * s / n as f64, 0.0)
    })
}

/// Differentiation matrix acting on flattened grid samples along `axis`.
pub fn derivative_matrix(grid: &PeriodicGrid, axis: usize) -> DMatrix<C64> {
    let d1 = derivative_matrix_1d(grid);
    match (grid.dim(), axis) {
        (1, _) => d1,
        (_, 0) => d1.kronecker(&DMatrix::identity(grid.n_points(), grid.n_points())),
        _ => DMatrix::identity(grid.n_points(), grid.n_points()).kronecker(&d1),
    }
}

/// Band-limited interpolation matrix from the nodes of a 1-d grid to the points `xs`.
pub fn interpolation_matrix(grid: &PeriodicGrid, xs: &[f64]) -> DMatrix<C64> {
    let n = grid.n_points();
    let nodes = grid.axis_nodes();
    let band = grid.band() as i64;
    DMatrix::from_fn(xs.len(), n, |q, j| {
        let dx = xs[q] - nodes[j];
        let s: f64 = 1.0 + (1..=band).map(|m| 2.0 * (grid.wave_number(m) * dx).cos()).sum::<f64>();
        C64::new(s / n as f64, 0.0)
    })
}

/// Subset of the cross-section over which an inner product is taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// The whole torus, trapezoid weights.
    Full,
    /// The arc `(alpha, beta)` of a 1-d grid; fields are interpolated to Gauss-Legendre nodes.
    Arc { alpha: f64, beta: f64 },
    /// Plain node selection with trapezoid weights.
    Nodes(Vec<bool>),
}

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.as_node_weight_pairs().iter().map(|&(x, w)| (mid + half * x, half * w)).unzip()
}

/// Quadrature on an arc: points, weights and the interpolation matrix from grid samples.
#[derive(Clone, Debug)]
pub struct ArcQuadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub interp: DMatrix<C64>,
}

impl ArcQuadrature {
    pub fn new(grid: &PeriodicGrid, alpha: f64, beta: f64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::InvalidArgument("arc quadrature requires d = 1".into()));
        }
        if !(beta > alpha && beta - alpha < grid.circumference()) {
            return Err(Error::InvalidArgument(format!("invalid arc ({alpha}, {beta})")));
        }
        let n_q = 2 * grid.n_points() + 32;
        let (points, weights) = gauss_legendre(n_q, alpha, beta);
        let interp = interpolation_matrix(grid, &points);
        Ok(Self { points, weights, interp })
    }

    /// `sum_q w_q f(x_q) conj(g(x_q))` for grid samples `f`, `g`.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        let fv = &self.interp * DVector::from_column_slice(f);
        let gv = &self.interp * DVector::from_column_slice(g);
        fv.iter().zip(gv.iter()).zip(&self.weights).map(|((a, b), w)| a * b.conj() * *w).sum()
    }
}

/// Sesquilinear `L^2` pairing of two sample vectors over `region`.
pub fn inner_values(grid: &PeriodicGrid, f: &[C64], g: &[C64], region: &Region) -> Result<C64> {
    if f.len() != grid.size() || g.len() != grid.size() {
        return Err(Error::GridMismatch);
    }
    Ok(match region {
        Region::Full => f.iter().zip(g).map(|(a, b)| a * b.conj()).sum::<C64>() * grid.weight(),
        Region::Nodes(mask) => {
            if mask.len() != grid.size() {
                return Err(Error::InvalidArgument("mask length differs from grid size".into()));
            }
            f.iter().zip(g).zip(mask).filter(|(_, &m)| m).map(|((a, b), _)| a * b.conj()).sum::<C64>()
                * grid.weight()
        }
        Region::Arc { alpha, beta } => ArcQuadrature::new(grid, *alpha, *beta)?.inner(f, g),
    })
}

/// Fields that can be paired componentwise.
pub trait Sampled {
    fn grid(&self) -> &PeriodicGrid;
    fn channels(&self) -> Vec<&[C64]>;
}

impl Sampled for ScalarField {
    fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }
    fn channels(&self) -> Vec<&[C64]> {
        vec![&self.values]
    }
}

impl Sampled for VectorField {
    fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }
    fn channels(&self) -> Vec<&[C64]> {
        self.components.iter().map(|c| c.as_slice()).collect()
    }
}

impl Sampled for StateField {
    fn grid(&self) -> &PeriodicGrid {
        &self.pressure.grid
    }
    fn channels(&self) -> Vec<&[C64]> {
        let mut ch = self.velocity.channels();
        ch.push(&self.pressure.values);
        ch
    }
}

/// `(f, g)` over `region`, linear in `f` and conjugate-linear in `g`.
pub fn inner_product<F: Sampled>(f: &F, g: &F, region: &Region) -> Result<C64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in f.channels().into_iter().zip(g.channels()) {
        acc += inner_values(f.grid(), a, b, region)?;
    }
    Ok(acc)
}

/// Band-limited representation of a unit point mass on a 1-d grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaModes {
    pub grid: PeriodicGrid,
    pub point: f64,
    /// Coefficients for `m = -K ..= K`, stored at index `m + K`.
    pub coeffs: Vec<C64>,
}

impl DeltaModes {
    pub fn band(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    /// Bilinear pairing with grid samples of `phi`, returning its band-limited value at the point.
    pub fn pair(&self, phi: &[C64]) -> C64 {
        let c = fft_coefficients(phi);
        let n = self.grid.n_points();
        let k = self.band() as i64;
        let l = self.grid.circumference();
        (-k..=k)
            .map(|m| {
                let slot = (-m).rem_euclid(n as i64) as usize;
                self.coeffs[(m + k) as usize] * c[slot] * l
            })
            .sum()
    }

    /// Samples of the truncated delta at the grid nodes.
    pub fn to_samples(&self) -> Vec<C64> {
        let k = self.band() as i64;
        self.grid
            .axis_nodes()
            .iter()
            .map(|&x| {
                (-k..=k)
                    .map(|m| self.coeffs[(m + k) as usize] * C64::from_polar(1.0, self.grid.wave_number(m) * x))
                    .sum()
            })
            .collect()
    }
}

/// Coefficients `exp(-i k a) / L` of the point mass at `a`, over the retained band.
pub fn delta_mode_coefficients(grid: &PeriodicGrid, a: f64) -> Result<DeltaModes> {
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("point sources are implemented for d = 1".into()));
    }
    let k = grid.band() as i64;
    let l = grid.circumference();
    let coeffs = (-k..=k).map(|m| C64::from_polar(1.0 / l, -grid.wave_number(m) * a)).collect();
    Ok(DeltaModes { grid: grid.clone(), point: a, coeffs })
}
