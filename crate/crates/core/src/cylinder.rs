//! Assembled indicial operators on the cross-section grid.
//!
//! Unknowns are stacked as `(u_1, .., u_d, u_t, p)`, each block holding `N^d` nodal values.
//! Adjoints are conjugate transposes: all nodes carry the same quadrature weight.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{derivative_matrix_1d, interpolation_matrix, ArcQuadrature, PeriodicGrid, PotentialPair, StateField};
use crate::C64;

type Cmat = DMatrix<C64>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Fourier differentiation with the Nyquist mode carried at wave number `+N/2`.
/// Still skew-Hermitian, and constants are its only kernel.
fn closed_derivative_1d(grid: &PeriodicGrid) -> Cmat {
    let n = grid.n_points();
    let kn = grid.wave_number(n as i64 / 2);
    let mut d = derivative_matrix_1d(grid);
    for j in 0..n {
        for l in 0..n {
            let sign = if (j + l) % 2 == 0 { 1.0 } else { -1.0 };
            d[(j, l)] += I * (kn * sign / n as f64);
        }
    }
    d
}

fn closed_derivative(grid: &PeriodicGrid, axis: usize) -> Cmat {
    let d1 = closed_derivative_1d(grid);
    let id = Cmat::identity(grid.n_points(), grid.n_points());
    match (grid.dim(), axis) {
        (1, _) => d1,
        (_, 0) => d1.kronecker(&id),
        _ => id.kronecker(&d1),
    }
}

/// Partial derivatives `(d_1, .., d_d, i tau)` as nodal matrices.
fn partials(tau: f64, grid: &PeriodicGrid) -> Vec<Cmat> {
    let n = grid.size();
    let mut out: Vec<Cmat> = (0..grid.dim()).map(|a| closed_derivative(grid, a)).collect();
    out.push(Cmat::identity(n, n) * (I * tau));
    out
}

fn grad_from_partials(p: &[Cmat]) -> Cmat {
    let n = p[0].nrows();
    let mut g = Cmat::zeros(p.len() * n, n);
    for (a, d) in p.iter().enumerate() {
        g.view_mut((a * n, 0), (n, n)).copy_from(d);
    }
    g
}

fn def_from_partials(p: &[Cmat]) -> Cmat {
    let n = p[0].nrows();
    let k = p.len();
    let mut m = Cmat::zeros(k * k * n, k * n);
    for i in 0..k {
        for j in 0..k {
            let r = (i * k + j) * n;
            let mut blk = m.view_mut((r, j * n), (n, n));
            blk += &p[i] * c(0.5);
            let mut blk = m.view_mut((r, i * n), (n, n));
            blk += &p[j] * c(0.5);
        }
    }
    m
}

/// `grad(tau) f = (d_1 f, .., d_d f, i tau f)`.
pub fn assemble_grad_hat(tau: f64, grid: &PeriodicGrid) -> Cmat {
    grad_from_partials(&partials(tau, grid))
}

/// `Def(tau) u` with all `(d+1)^2` entries `(d_i u_j + d_j u_i) / 2`, entry `(i, j)` in block `i (d+1) + j`.
pub fn assemble_def_hat(tau: f64, grid: &PeriodicGrid) -> Cmat {
    def_from_partials(&partials(tau, grid))
}

/// Nodal multiplication by `V` on stacked velocities.
pub fn potential_block(pot: &PotentialPair) -> Cmat {
    potential_block_from(&pot.v)
}

fn potential_block_from(v: &[Cmat]) -> Cmat {
    let n = v.len();
    let k = v[0].nrows();
    let mut m = Cmat::zeros(k * n, k * n);
    for (node, vm) in v.iter().enumerate() {
        for a in 0..k {
            for b in 0..k {
                m[(a * n + node, b * n + node)] = vm[(a, b)];
            }
        }
    }
    m
}

/// `[[2 D^H D + V, G], [G^H, -V0]]` from first-order pieces.
fn assemble_blocks(d: &Cmat, g: &Cmat, vblock: &Cmat, v0: &[f64]) -> Cmat {
    let n = v0.len();
    let kn = g.nrows();
    let mut m = Cmat::zeros(kn + n, kn + n);
    let vel = d.adjoint() * d * c(2.0) + vblock;
    m.view_mut((0, 0), (kn, kn)).copy_from(&vel);
    m.view_mut((0, kn), (kn, n)).copy_from(g);
    m.view_mut((kn, 0), (n, kn)).copy_from(&g.adjoint());
    for j in 0..n {
        m[(kn + j, kn + j)] = c(-v0[j]);
    }
    m
}

/// Dense `Xi(tau)` together with the pieces it was built from.
#[derive(Clone, Debug)]
pub struct IndicialMatrix {
    pub tau: f64,
    pub matrix: Cmat,
    pub def_hat: Cmat,
    pub grad_hat: Cmat,
    pub grid: PeriodicGrid,
    pub potentials: PotentialPair,
}

impl IndicialMatrix {
    pub fn apply(&self, u: &StateField) -> Result<StateField> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        StateField::from_vector(&self.grid, &(&self.matrix * u.to_vector()))
    }

    /// `|| Xi - Xi^H ||_F`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }
}

/// `Xi(tau) = [[2 Def^H Def + V, grad], [grad^H, -V0]]`.
pub fn assemble_xi_hat(tau: f64, grid: &PeriodicGrid, pot: &PotentialPair) -> Result<IndicialMatrix> {
    if &pot.grid != grid {
        return Err(Error::GridMismatch);
    }
    let d = assemble_def_hat(tau, grid);
    let g = assemble_grad_hat(tau, grid);
    let m = assemble_blocks(&d, &g, &potential_block(pot), &pot.v0);
    Ok(IndicialMatrix { tau, matrix: m, def_hat: d, grad_hat: g, grid: grid.clone(), potentials: pot.clone() })
}

/// Symbol of `Xi` at `xi = (k, tau)` for constant potentials; the exact action on
/// `exp(i k . x)` times a constant vector.
pub fn mode_matrix(k: &[f64], tau: f64, v: &Cmat, v0: f64) -> Cmat {
    let mut xi = k.to_vec();
    xi.push(tau);
    let n = xi.len();
    let r: f64 = xi.iter().map(|a| a * a).sum();
    let mut m = Cmat::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = c(xi[i] * xi[j] + if i == j { r } else { 0.0 }) + v[(i, j)];
        }
        m[(i, n)] = I * xi[i];
        m[(n, i)] = -I * xi[i];
    }
    m[(n, n)] = c(-v0);
    m
}

/// Singular-value summary of one operator.
#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub tau: f64,
    /// Smallest singular values in ascending order (at most six).
    pub singular_values: Vec<f64>,
    pub min_sigma: f64,
    pub max_sigma: f64,
    pub kernel_dim: usize,
    pub tolerance: f64,
    /// Ratio between the smallest non-kernel and the largest kernel singular value.
    pub gap: f64,
}

/// Relative kernel threshold on singular values.
pub const KERNEL_RTOL: f64 = 1e-8;

pub fn kernel_report_from_values(tau: f64, mut sv: Vec<f64>) -> KernelReport {
    sv.sort_by(f64::total_cmp);
    let max_sigma = sv.last().copied().unwrap_or(0.0);
    let tolerance = KERNEL_RTOL * max_sigma;
    let kernel_dim = sv.iter().filter(|&&s| s < tolerance).count();
    let gap = if kernel_dim == 0 {
        f64::INFINITY
    } else if kernel_dim == sv.len() {
        1.0
    } else {
        sv[kernel_dim] / sv[kernel_dim - 1].max(f64::MIN_POSITIVE)
    };
    KernelReport {
        tau,
        singular_values: sv.iter().take(6).cloned().collect(),
        min_sigma: sv.first().copied().unwrap_or(0.0),
        max_sigma,
        kernel_dim,
        tolerance,
        gap,
    }
}

pub fn kernel_report(tau: f64, m: &Cmat) -> KernelReport {
    kernel_report_from_values(tau, m.singular_values().iter().cloned().collect())
}

/// Singular-value scan of `Xi(tau)` over a list of `tau`; results keep the input order.
pub fn invertibility_scan(taus: &[f64], pot: &PotentialPair) -> Result<Vec<KernelReport>> {
    taus.par_iter()
        .map(|&t| assemble_xi_hat(t, &pot.grid, pot).map(|m| kernel_report(t, &m.matrix)))
        .collect()
}

/// Terms of the indicial Green formula on an arc.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    /// `(Xi(tau) U, W)` over the arc.
    pub lhs: C64,
    /// `B(U, W) = 2 (Def u, Def w) + (grad* u, q) + (p, grad* w) + (V u, w) - (V0 p, q)`.
    pub form_value: C64,
    /// `(traction(U), w)` summed over the two endpoints.
    pub boundary_value: C64,
    pub residual: f64,
}

/// Arc `(alpha, beta)` of a 1-d cross-section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct Arc {
    pub alpha: f64,
    pub beta: f64,
}

fn blocks(v: &DVector<C64>, n: usize) -> Vec<Vec<C64>> {
    v.as_slice().chunks(n).map(|c| c.to_vec()).collect()
}

/// Green formula check on an arc, or on the whole circle when `arc` is `None`.
pub fn green_identity_check(
    tau: f64,
    u: &StateField,
    w: &StateField,
    pot: &PotentialPair,
    arc: Option<Arc>,
) -> Result<EnergyReport> {
    let grid = u.grid().clone();
    if w.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let xi = assemble_xi_hat(tau, &grid, pot)?;
    let n = grid.size();
    let k = grid.dim() + 1;
    let uv = u.to_vector();
    let wv = w.to_vector();
    let xu = blocks(&(&xi.matrix * &uv), n);
    let uu = blocks(&uv, n);
    let ww = blocks(&wv, n);
    let du = blocks(&(&xi.def_hat * DVector::from_column_slice(&uv.as_slice()[..k * n])), n);
    let dw = blocks(&(&xi.def_hat * DVector::from_column_slice(&wv.as_slice()[..k * n])), n);
    let divu = blocks(&(xi.grad_hat.adjoint() * DVector::from_column_slice(&uv.as_slice()[..k * n])), n);
    let divw = blocks(&(xi.grad_hat.adjoint() * DVector::from_column_slice(&wv.as_slice()[..k * n])), n);
    let vu = blocks(&(potential_block(pot) * DVector::from_column_slice(&uv.as_slice()[..k * n])), n);
    let v0p: Vec<C64> = uu[k].iter().zip(&pot.v0).map(|(p, v)| p * *v).collect();

    let inner: Box<dyn Fn(&[C64], &[C64]) -> C64> = match arc {
        None => {
            let wgt = grid.weight();
            Box::new(move |a, b| a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<C64>() * wgt)
        }
        Some(a) => {
            if a.beta - a.alpha < 4.0 * grid.spacing() {
                return Err(Error::InvalidArgument("arc shorter than four grid cells".into()));
            }
            let q = ArcQuadrature::new(&grid, a.alpha, a.beta)?;
            Box::new(move |x, y| q.inner(x, y))
        }
    };

    let lhs: C64 = (0..=k).map(|b| inner(&xu[b], &ww[b])).sum();
    let mut form = C64::new(0.0, 0.0);
    for e in 0..k * k {
        form += inner(&du[e], &dw[e]) * 2.0;
    }
    form += inner(&divu[0], &ww[k]) + inner(&uu[k], &divw[0]);
    for b in 0..k {
        form += inner(&vu[b], &ww[b]);
    }
    form -= inner(&v0p, &ww[k]);

    let mut boundary = C64::new(0.0, 0.0);
    if let Some(a) = arc {
        let e = interpolation_matrix(&grid, &[a.alpha, a.beta]);
        let at = |v: &[C64]| &e * DVector::from_column_slice(v);
        for (side, sign) in [(0usize, -1.0), (1usize, 1.0)] {
            // traction_i = -2 Def_{i x} nu_x + p nu_i with nu = sign e_x
            let p = at(&uu[k])[side];
            for i in 0..k {
                let def_ix = at(&du[i * k])[side];
                let mut t = def_ix * (-2.0 * sign);
                if i == 0 {
                    t += p * sign;
                }
                boundary += t * at(&ww[i])[side].conj();
            }
        }
    }
    Ok(EnergyReport { lhs, form_value: form, boundary_value: boundary, residual: (lhs - form - boundary).norm() })
}

/// `Xi` on the closed torus `circle x (axial circle)` with axis-independent potentials,
/// block-diagonalized over axial modes `tau_m = 2 pi m / L_t`, `|m| <= N_t/2 - 1`.
#[derive(Clone, Debug)]
pub struct ClosedTorusSpectrum {
    pub axial_modes: Vec<f64>,
    pub per_mode: Vec<KernelReport>,
    pub report: KernelReport,
}

pub fn assemble_xi_closed_torus(pot: &PotentialPair, axial_points: usize, axial_length: f64) -> Result<ClosedTorusSpectrum> {
    let axial = PeriodicGrid::new(axial_points, axial_length, 1)?;
    let band = axial.band() as i64;
    let taus: Vec<f64> = (-band..=band).map(|m| axial.wave_number(m)).collect();
    let per: Vec<(KernelReport, Vec<f64>)> = taus
        .par_iter()
        .map(|&t| {
            let m = assemble_xi_hat(t, &pot.grid, pot)?;
            let sv: Vec<f64> = m.matrix.singular_values().iter().cloned().collect();
            Ok((kernel_report_from_values(t, sv.clone()), sv))
        })
        .collect::<Result<_>>()?;
    let all: Vec<f64> = per.iter().flat_map(|(_, s)| s.iter().cloned()).collect();
    let report = kernel_report_from_values(0.0, all);
    Ok(ClosedTorusSpectrum { axial_modes: taus, per_mode: per.into_iter().map(|(r, _)| r).collect(), report })
}

/// Dense assembly of `Xi` on the two-torus, axis-independent potentials. Intended for small grids.
pub fn assemble_xi_closed_torus_dense(pot: &PotentialPair, axial_points: usize, axial_length: f64) -> Result<(Cmat, KernelReport)> {
    let g = &pot.grid;
    if g.dim() != 1 {
        return Err(Error::InvalidArgument("closed-torus assembly is implemented for d = 1".into()));
    }
    if axial_points != g.n_points() || (axial_length - g.circumference()).abs() > 0.0 {
        return Err(Error::InvalidArgument("dense torus assembly needs a square torus grid".into()));
    }
    let n = g.n_points();
    let d1 = closed_derivative_1d(g);
    let id = Cmat::identity(n, n);
    // Flat index i * N + j for (x_i, t_j).
    let p = vec![d1.kronecker(&id), id.kronecker(&d1)];
    let mut v = Vec::with_capacity(n * n);
    let mut v0 = Vec::with_capacity(n * n);
    for i in 0..n {
        for _ in 0..n {
            v.push(pot.v[i].clone());
            v0.push(pot.v0[i]);
        }
    }
    let m = assemble_blocks(&def_from_partials(&p), &grad_from_partials(&p), &potential_block_from(&v), &v0);
    let rep = kernel_report(0.0, &m);
    Ok((m, rep))
}
