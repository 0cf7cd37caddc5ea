//! Dirichlet and Navier-Stokes problems on `Omega = (alpha, beta) x R`, with the axial line
//! truncated to a periodic window.
//!
//! Fields on `Omega` live on a Chebyshev grid in `x` times the axial window in `t`. Every
//! linear solve goes mode by mode in the axial dual variable `tau`.

mod field;
mod norms;
mod ns;

pub use field::{ArcField, AxialWindow, BoundaryData, WINDOW_DECAY};
pub use norms::{l2_norm_arc, sobolev_norm, sobolev_norm_arc, sobolev_norm_derivative_sum, sobolev_norm_torus};
pub use ns::{
    advection, advection_periodic, estimate_constants, product_constant_arc, product_constant_torus, random_data, solve_navier_stokes,
    ConstantsEstimate, NsOptions, NsReport,
};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::cheb::{complexify, ChebGrid};
use crate::cylinder::mode_matrix;
use crate::error::{Error, Result};
use crate::fourier_jump::smooth_step;
use crate::layer::{arc_system, potentials_on_arc, solve_arc_bvp, BoundarySpec, Cmat, IndicialGreen, Side};
use crate::spectral::{fft_coefficients, PeriodicGrid, PotentialPair};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// `U = S(S^{-1} f)`.
    Single,
    /// `U = D((1/2 + K)^{-1} f)`.
    Double,
    /// Per-`tau` Chebyshev collocation.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Chebyshev degree of the solution grid in `x`.
    pub degree: usize,
    /// Fourier points on the full circle for the particular solution.
    pub fine_points: usize,
    /// Width of the blending margin outside the arc, in cells of the potential grid.
    pub margin_cells: f64,
    pub direct_degree: usize,
    pub check_degree: usize,
    /// Axial modes whose data fall below this fraction of the largest mode are set to zero.
    pub mode_rtol: f64,
    /// Relative floor for the singular values of the density equations.
    pub sigma_rtol: f64,
    pub residual_tol: f64,
    pub mismatch_tol: f64,
    pub check_window: bool,
    pub check_hypotheses: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            degree: 32,
            fine_points: 2048,
            margin_cells: 4.0,
            direct_degree: 64,
            check_degree: 96,
            mode_rtol: 1e-15,
            sigma_rtol: 1e-10,
            residual_tol: 1e-6,
            mismatch_tol: 1e-5,
            check_window: true,
            check_hypotheses: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub m: usize,
    /// `||u||_{H^{m+1}(Omega)}`.
    pub u_norm: f64,
    /// `||p||_{H^m(Omega)}`.
    pub p_norm: f64,
    /// `||h||_{H^{m-1}} + ||r||_{H^m} + ||f||_{H^{m+1/2}}`, Sobolev indices clamped at 0.
    pub data_norm: f64,
    /// `(u_norm + p_norm) / data_norm`.
    pub constant_ratio: f64,
    /// `L^2` norm of the velocity rows of `Xi U - h` over interior nodes.
    pub residual: f64,
    /// `L^2` norm of the scalar row `grad* u - V0 p - r` over interior nodes.
    pub scalar_residual: f64,
    /// `max |u - f|` on `Gamma`.
    pub boundary_mismatch: f64,
    pub active_modes: usize,
    /// Smallest singular value of the density equation over the active modes.
    pub min_sigma: f64,
    /// Difference between the collocation solves at two degrees (direct route only).
    pub refinement_error: f64,
    pub window_defect: f64,
    pub success: bool,
}

struct ModeOps {
    /// `3n x 4` maps from Dirichlet data to nodal values, component-major rows.
    single: Cmat,
    double: Cmat,
    sigma_single: f64,
    sigma_double: f64,
}

struct Extension {
    /// Fourier coefficients of the blended Chebyshev polynomials `T_k`, `N_f x n`.
    coeffs: Cmat,
    /// Nodal values to Chebyshev coefficients, `n x n`.
    to_cheb: Cmat,
    /// `exp(i k x_j)` at the Chebyshev nodes, `n x N_f`; the Nyquist column is zero.
    synth: Cmat,
    wave: Vec<Option<f64>>,
}

/// Dirichlet solver with per-`tau` operators cached on first use.
pub struct DirichletSolver {
    pub spec: BoundarySpec,
    pub potentials: PotentialPair,
    pub window: AxialWindow,
    pub grid: ChebGrid,
    pub opts: SolverOptions,
    pot_nodes: (Vec<Cmat>, Vec<f64>),
    bie: Vec<OnceLock<Result<ModeOps>>>,
    particular: Vec<OnceLock<Result<Cmat>>>,
    extension: OnceLock<Result<Extension>>,
}

impl DirichletSolver {
    pub fn new(spec: &BoundarySpec, pot: &PotentialPair, window: &AxialWindow, opts: SolverOptions) -> Result<Self> {
        let g = &pot.grid;
        if g.dim() != 1 || (g.circumference() - spec.circumference).abs() > 1e-12 {
            return Err(Error::InvalidArgument("potentials must live on the boundary circle (d = 1)".into()));
        }
        if opts.check_hypotheses {
            if !pot.is_nonnegative() {
                return Err(Error::Hypothesis("V and V0 must be nonnegative".into()));
            }
            let (_, v0_pos) = pot.positive_somewhere(|p| spec.contains(p[0]));
            if !v0_pos {
                return Err(Error::Hypothesis("V0 must be positive somewhere on the arc".into()));
            }
        }
        let grid = ChebGrid::new(opts.degree, spec.alpha, spec.beta)?;
        let pot_nodes = potentials_on_arc(pot, &grid);
        let n = window.n_axial;
        Ok(Self {
            spec: *spec,
            potentials: pot.clone(),
            window: *window,
            grid,
            opts,
            pot_nodes,
            bie: (0..n).map(|_| OnceLock::new()).collect(),
            particular: (0..n).map(|_| OnceLock::new()).collect(),
            extension: OnceLock::new(),
        })
    }

    fn nodes(&self) -> usize {
        self.grid.len()
    }

    fn mode_ops(&self, idx: usize) -> Result<&ModeOps> {
        let tau = self.window.tau(idx).expect("Nyquist slot carries no operator");
        self.bie[idx].get_or_init(|| self.build_mode_ops(tau)).as_ref().map_err(Clone::clone)
    }

    fn build_mode_ops(&self, tau: f64) -> Result<ModeOps> {
        let green = IndicialGreen::new(tau, &self.spec, &self.potentials)?;
        let s_tr = green.single_layer_trace(Side::Interior);
        let d_tr = green.double_layer_trace(Side::Interior);
        let sigma = |m: &Cmat, what: &str| -> Result<f64> {
            let sv = m.singular_values();
            let (lo, hi) = (sv.min(), sv.max());
            if !(lo > self.opts.sigma_rtol * hi) {
                return Err(Error::Singular { what: what.into(), tau, min_sigma: lo });
            }
            Ok(lo)
        };
        let sigma_single = sigma(&s_tr, "single-layer boundary operator")?;
        let sigma_double = sigma(&d_tr, "1/2 + K")?;
        let s_inv = s_tr.try_inverse().ok_or(Error::Singular { what: "single-layer boundary operator".into(), tau, min_sigma: 0.0 })?;
        let d_inv = d_tr.try_inverse().ok_or(Error::Singular { what: "1/2 + K".into(), tau, min_sigma: 0.0 })?;
        let n = self.nodes();
        let mut sl = Cmat::zeros(3 * n, 4);
        let mut dl = Cmat::zeros(3 * n, 4);
        for (j, &x) in self.grid.nodes.iter().enumerate() {
            let s = green.single_layer(x, Side::Interior);
            let d = green.double_layer(x, Side::Interior);
            for c in 0..3 {
                sl.row_mut(c * n + j).copy_from(&s.row(c));
                dl.row_mut(c * n + j).copy_from(&d.row(c));
            }
        }
        Ok(ModeOps { single: sl * s_inv, double: dl * d_inv, sigma_single, sigma_double })
    }

    fn extension(&self) -> Result<&Extension> {
        self.extension.get_or_init(|| self.build_extension()).as_ref().map_err(Clone::clone)
    }

    fn build_extension(&self) -> Result<Extension> {
        let l = self.spec.circumference;
        let len = self.spec.length();
        let delta = self.opts.margin_cells * l / self.potentials.grid.n_points() as f64;
        if 2.0 * delta >= l - len {
            return Err(Error::InvalidArgument(format!("blending margin {delta:.3} does not fit outside the arc")));
        }
        let nf = self.opts.fine_points;
        let fine = PeriodicGrid::new(nf, l, 1)?;
        let n = self.nodes();
        let alpha = self.spec.alpha;
        let (a, b) = (self.grid.a, self.grid.b);
        let mut ext = Cmat::zeros(nf, n);
        for (q, &x) in fine.axis_nodes().iter().enumerate() {
            let s = (x - alpha).rem_euclid(l);
            let (y, chi) = if s <= len {
                (alpha + s, 1.0)
            } else if s < len + delta {
                (alpha + s, smooth_step((len + delta - s) / delta))
            } else if s > l - delta {
                (alpha - (l - s), smooth_step((s - (l - delta)) / delta))
            } else {
                continue;
            };
            let r = (2.0 * y - a - b) / (b - a);
            let (mut t0, mut t1) = (1.0, r);
            for k in 0..n {
                ext[(q, k)] = C64::new(t0 * chi, 0.0);
                let next = 2.0 * r * t1 - t0;
                t0 = t1;
                t1 = next;
            }
        }
        let mut coeffs = Cmat::zeros(nf, n);
        for k in 0..n {
            let col: Vec<C64> = ext.column(k).iter().cloned().collect();
            coeffs.column_mut(k).copy_from_slice(&fft_coefficients(&col));
        }
        let wave: Vec<Option<f64>> = (0..nf).map(|q| fine.fft_mode(q).map(|m| fine.wave_number(m))).collect();
        let mut synth = Cmat::zeros(n, nf);
        for (j, &x) in self.grid.nodes.iter().enumerate() {
            for (q, k) in wave.iter().enumerate() {
                if let Some(k) = k {
                    synth[(j, q)] = C64::new(0.0, k * x).exp();
                }
            }
        }
        let mut to_cheb = Cmat::zeros(n, n);
        for l in 0..n {
            let mut e = vec![ZERO; n];
            e[l] = C64::new(1.0, 0.0);
            to_cheb.column_mut(l).copy_from_slice(&self.grid.coefficients(&e));
        }
        Ok(Extension { coeffs, to_cheb, synth, wave })
    }

    fn particular_op(&self, idx: usize) -> Result<&Cmat> {
        let tau = self.window.tau(idx).expect("Nyquist slot carries no operator");
        self.particular[idx].get_or_init(|| self.build_particular(tau)).as_ref().map_err(Clone::clone)
    }

    /// Map from the Chebyshev coefficients of `(h, r)` to the nodal values of `U_1`, the
    /// full-circle solve of the blended data, `3n x 3n`. The data enter through coefficients
    /// because the extrapolated polynomials grow geometrically in the margin.
    fn build_particular(&self, tau: f64) -> Result<Cmat> {
        let (v, v0) = self
            .potentials
            .constant_values()
            .ok_or_else(|| Error::InvalidArgument("the non-homogeneous solver needs constant potentials".into()))?;
        let ext = self.extension()?;
        let n = self.nodes();
        let nf = ext.wave.len();
        let mut inverses = Vec::with_capacity(nf);
        for k in &ext.wave {
            inverses.push(match k {
                Some(k) => Some(
                    mode_matrix(&[*k], tau, &v, v0)
                        .try_inverse()
                        .ok_or(Error::Singular { what: format!("Xi(k = {k}, tau)"), tau, min_sigma: 0.0 })?,
                ),
                None => None,
            });
        }
        let mut op = Cmat::zeros(3 * n, 3 * n);
        for a in 0..3 {
            let mut w = Cmat::zeros(nf, 3 * n);
            for (q, inv) in inverses.iter().enumerate() {
                let Some(inv) = inv else { continue };
                for b in 0..3 {
                    let f = inv[(a, b)];
                    for l in 0..n {
                        w[(q, b * n + l)] = f * ext.coeffs[(q, l)];
                    }
                }
            }
            op.rows_mut(a * n, n).copy_from(&(&ext.synth * w));
        }
        Ok(op)
    }

    fn chebyshev_coefficients(&self, h: &DVector<C64>) -> Result<DVector<C64>> {
        let c = &self.extension()?.to_cheb;
        let n = self.nodes();
        let mut out = DVector::zeros(3 * n);
        for b in 0..3 {
            out.rows_mut(b * n, n).copy_from(&(c * h.rows(b * n, n)));
        }
        Ok(out)
    }

    fn active(&self, h: Option<&[DVector<C64>]>, f: &[DVector<C64>]) -> Vec<bool> {
        let size = |idx: usize| f[idx].norm().max(h.map_or(0.0, |h| h[idx].norm()));
        let scale = (0..f.len()).map(size).fold(0.0, f64::max);
        (0..f.len()).map(|idx| self.window.tau(idx).is_some() && scale > 0.0 && size(idx) > self.opts.mode_rtol * scale).collect()
    }

    fn check_inputs(&self, h: Option<&ArcField>, f: &BoundaryData) -> Result<f64> {
        if f.window != self.window {
            return Err(Error::InvalidArgument("boundary data window differs from the solver window".into()));
        }
        if let Some(h) = h {
            if h.grid != self.grid || h.window != self.window || h.components.len() != 3 {
                return Err(Error::InvalidArgument("body force must have (h_x, h_t, r) on the solver grid".into()));
            }
        }
        let defect = f.window_defect();
        if self.opts.check_window && defect > WINDOW_DECAY {
            return Err(Error::Window(format!("boundary data reach {defect:.3e} of their maximum at |t| = T")));
        }
        Ok(defect)
    }

    /// Solves `Xi U = (h, r)` on `Omega` with `u = f` on `Gamma`; `h = None` is the homogeneous problem.
    pub fn solve(&self, h: Option<&ArcField>, f: &BoundaryData, method: Method) -> Result<(ArcField, SolveReport)> {
        let defect = self.check_inputs(h, f)?;
        let f_modes = f.modes();
        let h_modes = h.map(|h| h.modes());
        let active = self.active(h_modes.as_deref(), &f_modes);
        let n = self.nodes();
        let (modes, min_sigma, refinement) = match method {
            Method::Direct => {
                let main = self.direct_modes(h_modes.as_deref(), &f_modes, &active, self.opts.direct_degree, true)?;
                let check = self.direct_modes(h_modes.as_deref(), &f_modes, &active, self.opts.check_degree, false)?;
                let scale = main.iter().map(|v| v.camax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                let diff = main.iter().zip(&check).map(|(a, b)| (a - b).camax()).fold(0.0, f64::max);
                (main, f64::NAN, diff / scale)
            }
            _ => {
                let results: Vec<Result<(DVector<C64>, f64)>> = (0..f_modes.len())
                    .into_par_iter()
                    .map(|idx| {
                        if !active[idx] {
                            return Ok((DVector::zeros(3 * n), f64::INFINITY));
                        }
                        let ops = self.mode_ops(idx)?;
                        let (b, sigma) = match method {
                            Method::Single => (&ops.single, ops.sigma_single),
                            _ => (&ops.double, ops.sigma_double),
                        };
                        let Some(hm) = h_modes.as_ref() else {
                            return Ok((b * &f_modes[idx], sigma));
                        };
                        let u1 = self.particular_op(idx)? * self.chebyshev_coefficients(&hm[idx])?;
                        let trace = DVector::from_vec(vec![u1[0], u1[n], u1[n - 1], u1[2 * n - 1]]);
                        let f1 = &f_modes[idx] - trace;
                        Ok((u1 + b * f1, sigma))
                    })
                    .collect();
                let mut modes = Vec::with_capacity(results.len());
                let mut min_sigma = f64::INFINITY;
                for r in results {
                    let (m, s) = r?;
                    modes.push(m);
                    min_sigma = min_sigma.min(s);
                }
                (modes, min_sigma, f64::NAN)
            }
        };
        let u = ArcField::from_modes(&self.grid, &self.window, 3, &modes);
        let report = self.report(&u, h, f, method, active.iter().filter(|&&a| a).count(), min_sigma, refinement, defect);
        Ok((u, report))
    }

    fn direct_modes(
        &self,
        h: Option<&[DVector<C64>]>,
        f: &[DVector<C64>],
        active: &[bool],
        degree: usize,
        check_condition: bool,
    ) -> Result<Vec<DVector<C64>>> {
        let n = self.nodes();
        let dgrid = ChebGrid::new(degree, self.spec.alpha, self.spec.beta)?;
        let nd = dgrid.len();
        let to_fine = complexify(&self.grid.interpolation_matrix(&dgrid.nodes));
        let to_coarse = complexify(&dgrid.interpolation_matrix(&self.grid.nodes));
        let (v, v0) = potentials_on_arc(&self.potentials, &dgrid);
        let results: Vec<Result<DVector<C64>>> = (0..f.len())
            .into_par_iter()
            .map(|idx| {
                if !active[idx] {
                    return Ok(DVector::zeros(3 * n));
                }
                let tau = self.window.tau(idx).unwrap();
                let forcing: [Vec<C64>; 3] = std::array::from_fn(|c| match h {
                    Some(h) => (&to_fine * h[idx].rows(c * n, n)).iter().cloned().collect(),
                    None => vec![ZERO; nd],
                });
                let fm = &f[idx];
                let dirichlet = [[fm[0], fm[1]], [fm[2], fm[3]]];
                let sol = if check_condition {
                    solve_arc_bvp(tau, &dgrid, &v, &v0, &forcing, dirichlet, true)?
                } else {
                    let (mat, rhs) = arc_system(tau, &dgrid, &v, &v0, &forcing, dirichlet);
                    let x = mat.lu().solve(&rhs).ok_or(Error::Singular { what: "arc collocation".into(), tau, min_sigma: 0.0 })?;
                    crate::layer::ArcSolution {
                        grid: dgrid.clone(),
                        fields: std::array::from_fn(|c| x.rows(c * nd, nd).iter().cloned().collect()),
                        condition: f64::NAN,
                    }
                };
                let mut out = DVector::zeros(3 * n);
                for c in 0..3 {
                    let vals = &to_coarse * DVector::from_column_slice(&sol.fields[c]);
                    out.rows_mut(c * n, n).copy_from(&vals);
                }
                Ok(out)
            })
            .collect();
        results.into_iter().collect()
    }

    /// `Xi` applied to a `(u_x, u_t, p)` field, by Chebyshev differentiation in `x` and Fourier in `t`.
    pub fn apply_xi(&self, u: &ArcField) -> ArcField {
        let (v, w, p) = (&u.components[0], &u.components[1], &u.components[2]);
        let d = complexify(&self.grid.diff_matrix());
        let dt = |m: &Cmat| self.window.derivative_rows(m);
        let vx = &d * v;
        let wx = &d * w;
        let vxx = &d * &vx;
        let wxx = &d * &wx;
        let vt = dt(v);
        let wt = dt(w);
        let vtt = dt(&vt);
        let wtt = dt(&wt);
        let vxt = dt(&vx);
        let wxt = dt(&wx);
        let px = &d * p;
        let pt = dt(p);
        let (pv, pv0) = &self.pot_nodes;
        let mut rx = -vxx * C64::new(2.0, 0.0) - vtt - wxt + px;
        let mut rt = -wxx - wtt * C64::new(2.0, 0.0) - vxt + pt;
        let mut rs = -vx - wt;
        for j in 0..self.nodes() {
            let vj = &pv[j];
            for col in 0..v.ncols() {
                let (a, b) = (v[(j, col)], w[(j, col)]);
                rx[(j, col)] += vj[(0, 0)] * a + vj[(0, 1)] * b;
                rt[(j, col)] += vj[(1, 0)] * a + vj[(1, 1)] * b;
                rs[(j, col)] -= p[(j, col)] * pv0[j];
            }
        }
        ArcField { grid: self.grid.clone(), window: self.window, components: vec![rx, rt, rs] }
    }

    /// Velocity-row and scalar-row `L^2` residuals of `Xi U = (h, r)` over interior nodes.
    pub fn residual(&self, u: &ArcField, h: Option<&ArcField>) -> (f64, f64) {
        let mut r = self.apply_xi(u);
        if let Some(h) = h {
            for c in 0..3 {
                r.components[c] -= &h.components[c];
            }
        }
        (l2_norm_arc(&r, &[0, 1], true), l2_norm_arc(&r, &[2], true))
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        u: &ArcField,
        h: Option<&ArcField>,
        f: &BoundaryData,
        method: Method,
        active_modes: usize,
        min_sigma: f64,
        refinement_error: f64,
        window_defect: f64,
    ) -> SolveReport {
        let m = f.m;
        let u_norm = sobolev_norm_arc(u, &[0, 1], m + 1);
        let p_norm = sobolev_norm_arc(u, &[2], m);
        let data_norm = self.data_norm(h, f);
        let (residual, scalar_residual) = self.residual(u, h);
        let trace = u.boundary_values(m);
        let boundary_mismatch = (0..2)
            .flat_map(|b| (0..2).map(move |i| (b, i)))
            .flat_map(|(b, i)| trace.values[b][i].iter().zip(&f.values[b][i]).map(|(a, c)| (a - c).norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        let scale = data_norm.max(1.0);
        let success = residual <= self.opts.residual_tol * scale
            && scalar_residual <= self.opts.residual_tol * scale
            && boundary_mismatch <= self.opts.mismatch_tol * scale;
        SolveReport {
            method,
            m,
            u_norm,
            p_norm,
            data_norm,
            constant_ratio: if data_norm > 0.0 { (u_norm + p_norm) / data_norm } else { 0.0 },
            residual,
            scalar_residual,
            boundary_mismatch,
            active_modes,
            min_sigma: if min_sigma.is_finite() { min_sigma } else { f64::NAN },
            refinement_error,
            window_defect,
            success,
        }
    }

    /// `||h||_{H^{m-1}(Omega)} + ||r||_{H^m(Omega)} + ||f||_{H^{m+1/2}(Gamma)}`.
    pub fn data_norm(&self, h: Option<&ArcField>, f: &BoundaryData) -> f64 {
        let m = f.m;
        let body = h.map_or(0.0, |h| sobolev_norm_arc(h, &[0, 1], m.saturating_sub(1)) + sobolev_norm_arc(h, &[2], m));
        body + f.norm(m as f64 + 0.5)
    }
}

/// Homogeneous Dirichlet problem by a boundary-integral representation.
pub fn solve_dirichlet_bie(
    f: &BoundaryData,
    pot: &PotentialPair,
    spec: &BoundarySpec,
    window: &AxialWindow,
    method: Method,
) -> Result<(ArcField, SolveReport)> {
    if method == Method::Direct {
        return Err(Error::InvalidArgument("use solve_dirichlet_direct for the collocation route".into()));
    }
    DirichletSolver::new(spec, pot, window, SolverOptions::default())?.solve(None, f, method)
}

/// Homogeneous Dirichlet problem by per-`tau` collocation, verified by a finer re-solve.
pub fn solve_dirichlet_direct(f: &BoundaryData, pot: &PotentialPair, spec: &BoundarySpec, window: &AxialWindow) -> Result<(ArcField, SolveReport)> {
    DirichletSolver::new(spec, pot, window, SolverOptions::default())?.solve(None, f, Method::Direct)
}

/// `Xi U = (h, r)` on `Omega`, `u = f` on `Gamma`; `h` carries `(h_x, h_t, r)`.
pub fn solve_nonhomogeneous(
    h: &ArcField,
    f: &BoundaryData,
    pot: &PotentialPair,
    spec: &BoundarySpec,
    window: &AxialWindow,
    method: Method,
) -> Result<(ArcField, SolveReport)> {
    DirichletSolver::new(spec, pot, window, SolverOptions::default())?.solve(Some(h), f, method)
}
