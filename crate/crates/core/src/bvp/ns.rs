use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::{ArcField, AxialWindow, BoundaryData};
use super::norms::{sobolev_norm_arc, sobolev_norm_torus};
use super::{DirichletSolver, Method};
use crate::cheb::ChebGrid;
use crate::error::{Error, Result};
use crate::spectral::{spectral_derivative, PeriodicGrid, VectorField};
use crate::C64;

/// `(grad_u v)_i = u_x d_x v_i + u_t d_t v_i` for the velocity parts of two fields on `Omega`.
pub fn advection(u: &ArcField, v: &ArcField) -> ArcField {
    let mut out = ArcField::zeros(&u.grid, &u.window, 2);
    for i in 0..2 {
        let dx = v.dx(i);
        let dt = v.dt(i);
        out.components[i] = u.components[0].component_mul(&dx) + u.components[1].component_mul(&dt);
    }
    out
}

/// `grad_u v = sum_j u_j d_j v` on a periodic grid.
pub fn advection_periodic(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    let g = &u.grid;
    if *g != v.grid {
        return Err(Error::GridMismatch);
    }
    let mut comps = Vec::new();
    for i in 0..v.components.len() {
        let vi = v.component(i);
        let mut acc = vec![C64::new(0.0, 0.0); g.size()];
        // the field does not depend on directions without a grid axis
        for (j, uj) in u.components.iter().enumerate().take(g.dim()) {
            let d = spectral_derivative(&vi, j)?;
            for (a, (x, y)) in acc.iter_mut().zip(uj.iter().zip(&d.values)) {
                *a += x * y;
            }
        }
        comps.push(acc);
    }
    VectorField::new(g, comps)
}

fn random_periodic_field(grid: &PeriodicGrid, band: i64, rng: &mut ChaCha8Rng) -> VectorField {
    let d = grid.dim();
    let terms: Vec<Vec<(Vec<f64>, f64, f64)>> = (0..d)
        .map(|_| {
            let mut t = Vec::new();
            for a in -band..=band {
                for b in if d == 1 { 0..=0 } else { -band..=band } {
                    let k = if d == 1 { vec![grid.wave_number(a)] } else { vec![grid.wave_number(a), grid.wave_number(b)] };
                    t.push((k, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                }
            }
            t
        })
        .collect();
    VectorField::from_fn(grid, |p| {
        terms
            .iter()
            .map(|t| {
                let s: f64 = t
                    .iter()
                    .map(|(k, a, b)| {
                        let ph: f64 = k.iter().zip(p).map(|(k, x)| k * x).sum();
                        a * ph.cos() + b * ph.sin()
                    })
                    .sum();
                C64::new(s, 0.0)
            })
            .chain(std::iter::once(C64::new(0.0, 0.0)))
            .collect()
    })
}

fn vector_norm_torus(v: &VectorField, s: f64) -> f64 {
    (0..v.components.len()).map(|i| sobolev_norm_torus(&v.component(i), s).powi(2)).sum::<f64>().sqrt()
}

/// Sampled `max ||grad_u v||_{H^{m-1}} / (||u||_{H^{m+1}} ||v||_{H^{m+1}})` over random
/// band-limited real pairs on a full torus.
pub fn product_constant_torus(grid: &PeriodicGrid, m: i32, samples: usize, band: i64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let u = random_periodic_field(grid, band, &mut rng);
        let v = random_periodic_field(grid, band, &mut rng);
        let a = advection_periodic(&u, &v)?;
        let r = vector_norm_torus(&a, (m - 1) as f64) / (vector_norm_torus(&u, (m + 1) as f64) * vector_norm_torus(&v, (m + 1) as f64));
        best = best.max(r);
    }
    Ok(best)
}

/// Parameters per component: five Chebyshev coefficients in `x`, then center, width,
/// frequency and phase of a modulated Gaussian in `t`.
const FIELD_PARAMS: usize = 9;

/// Axial length scale of the random fields: 1 on the default window, shrinking with shorter ones.
fn axial_scale(window: &AxialWindow) -> f64 {
    (window.half_length / 16.0).min(1.0)
}

fn random_params(ncomp: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut p = Vec::with_capacity(ncomp * FIELD_PARAMS);
    for _ in 0..ncomp {
        p.extend((0..5).map(|_| rng.random_range(-1.0..1.0)));
        p.extend([
            scale * rng.random_range(-4.0..4.0),
            scale * rng.random_range(0.8..2.0),
            rng.random_range(0.0..1.5) / scale,
            rng.random_range(0.0..6.3),
        ]);
    }
    p
}

/// Smooth field on `Omega`: low Chebyshev degree in `x` times a modulated Gaussian in `t`.
fn arc_field_from_params(grid: &ChebGrid, window: &AxialWindow, ncomp: usize, p: &[f64]) -> ArcField {
    let (a, b) = (grid.a, grid.b);
    ArcField::from_fn(grid, window, ncomp, |x, t| {
        let s = (2.0 * x - a - b) / (b - a);
        p.chunks(FIELD_PARAMS)
            .map(|c| {
                let (mut tk, mut tk1, mut px) = (1.0, s, 0.0);
                for coef in &c[..5] {
                    px += coef * tk;
                    let next = 2.0 * s * tk1 - tk;
                    tk = tk1;
                    tk1 = next;
                }
                let g = (-(t - c[5]).powi(2) / (2.0 * c[6] * c[6])).exp() * (c[7] * t + c[8]).cos();
                C64::new(px * g, 0.0)
            })
            .collect()
    })
}

fn random_arc_field(grid: &ChebGrid, window: &AxialWindow, ncomp: usize, rng: &mut ChaCha8Rng) -> ArcField {
    let p = random_params(ncomp, axial_scale(window), rng);
    arc_field_from_params(grid, window, ncomp, &p)
}

/// Chebyshev degree in `x` and Hermite-function degree in `t` of the product-constant space.
pub const PRODUCT_BASIS: (usize, usize) = (5, 7);
/// Alternating-maximization starts taken from the best random pairs.
pub const PRODUCT_STARTS: usize = 2;
const PRODUCT_SWEEPS: usize = 12;

/// Real fields stored as (value, d_x, d_t) per component, flattened over (node, axial).
struct ProductBasis {
    /// Per basis element: its component and `[value, d_x, d_t]` samples.
    elems: Vec<(usize, [Vec<f64>; 3])>,
    weights: Vec<f64>,
    /// Gram matrix of the `H^{m+1}` inner product.
    gram: DMatrix<f64>,
    rows: usize,
    cols: usize,
}

fn hermite_functions(t: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let g = (-t * t / 2.0).exp() / std::f64::consts::PI.sqrt().sqrt();
    let (mut h0, mut h1) = (g, std::f64::consts::SQRT_2 * t * g);
    for k in 0..count {
        out.push(h0);
        let kk = (k + 1) as f64;
        let next = (2.0 / (kk + 1.0)).sqrt() * t * h1 - (kk / (kk + 1.0)).sqrt() * h0;
        h0 = h1;
        h1 = next;
    }
    out
}

fn real_parts(m: &DMatrix<C64>) -> Vec<f64> {
    m.iter().map(|v| v.re).collect()
}

impl ProductBasis {
    fn new(grid: &ChebGrid, window: &AxialWindow, m: usize) -> Self {
        let (dx, dt) = PRODUCT_BASIS;
        let (a, b) = (grid.a, grid.b);
        let mut elems = Vec::new();
        let mut fields = Vec::new();
        for comp in 0..2 {
            for i in 0..=dx {
                for j in 0..=dt {
                    let f = ArcField::from_fn(grid, window, 1, |x, t| {
                        let s = (2.0 * x - a - b) / (b - a);
                        let tx = (i as f64 * s.clamp(-1.0, 1.0).acos()).cos();
                        vec![C64::new(tx * hermite_functions(t, dt + 1)[j], 0.0)]
                    });
                    elems.push((comp, [real_parts(&f.components[0]), real_parts(&f.dx(0)), real_parts(&f.dt(0))]));
                    let mut v = ArcField::zeros(grid, window, 2);
                    v.components[comp] = f.components[0].clone();
                    fields.push(v);
                }
            }
        }
        let w = grid.weights();
        let h = window.spacing();
        let (rows, cols) = (grid.len(), window.n_axial);
        // nalgebra stores column-major: flat index = col * rows + row.
        let weights = (0..rows * cols).map(|k| w[k % rows] * h).collect();
        let gram = sobolev_gram(&fields, m + 1);
        Self { elems, weights, gram, rows, cols }
    }

    fn combine(&self, coef: &[f64]) -> [[Vec<f64>; 3]; 2] {
        let size = self.rows * self.cols;
        let mut out: [[Vec<f64>; 3]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| vec![0.0; size]));
        for ((comp, parts), &c) in self.elems.iter().zip(coef) {
            if c == 0.0 {
                continue;
            }
            for (o, p) in out[*comp].iter_mut().zip(parts) {
                o.iter_mut().zip(p).for_each(|(a, b)| *a += c * b);
            }
        }
        out
    }

    fn h_norm(&self, coef: &[f64]) -> f64 {
        let x = nalgebra::DVector::from_column_slice(coef);
        (x.dot(&(&self.gram * &x))).max(0.0).sqrt()
    }

    /// Weighted `L^2` Gram matrix of the columns `[comp][node]`.
    fn image_gram(&self, cols: &[[Vec<f64>; 2]]) -> DMatrix<f64> {
        let size = self.rows * self.cols;
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut r = DMatrix::zeros(2 * size, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for comp in 0..2 {
                for k in 0..size {
                    r[(comp * size + k, j)] = col[comp][k] * sw[k];
                }
            }
        }
        r.transpose() * r
    }

    /// Largest `x^T q x / x^T gram x` and its maximizer.
    fn top_eigen(&self, q: &DMatrix<f64>) -> (f64, Vec<f64>) {
        let l = self.gram.clone().cholesky().expect("Gram matrix of a basis is positive definite").l();
        let linv = l.clone().try_inverse().expect("triangular factor is invertible");
        let mm = &linv * q * linv.transpose();
        let mm = (&mm + mm.transpose()) * 0.5;
        let e = nalgebra::SymmetricEigen::new(mm);
        let (k, lam) = e.eigenvalues.iter().cloned().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
        let y = e.eigenvectors.column(k).into_owned();
        let x = linv.transpose() * y;
        (lam.max(0.0), x.iter().cloned().collect())
    }

    /// `||grad_u v||_{L^2}` for coefficient vectors.
    fn ratio(&self, u: &[f64], v: &[f64]) -> f64 {
        let (uf, vf) = (self.combine(u), self.combine(v));
        let mut total = 0.0;
        for comp in 0..2 {
            for k in 0..self.weights.len() {
                let a = uf[0][0][k] * vf[comp][1][k] + uf[1][0][k] * vf[comp][2][k];
                total += self.weights[k] * a * a;
            }
        }
        total.sqrt() / (self.h_norm(u) * self.h_norm(v))
    }

    /// Best `v` for fixed `u` (`fix_u = true`) or best `u` for fixed `v`.
    fn best_partner(&self, fixed: &[f64], fix_u: bool) -> (f64, Vec<f64>) {
        let ff = self.combine(fixed);
        let cols: Vec<[Vec<f64>; 2]> = self
            .elems
            .iter()
            .map(|(comp, parts)| {
                let size = self.weights.len();
                let mut col = [vec![0.0; size], vec![0.0; size]];
                if fix_u {
                    // grad_u phi: only component `comp` is nonzero.
                    for k in 0..size {
                        col[*comp][k] = ff[0][0][k] * parts[1][k] + ff[1][0][k] * parts[2][k];
                    }
                } else {
                    // grad_phi v = phi_comp d_comp v.
                    for c in 0..2 {
                        for k in 0..size {
                            col[c][k] = parts[0][k] * ff[c][1 + comp][k];
                        }
                    }
                }
                col
            })
            .collect();
        let (lam, x) = self.top_eigen(&self.image_gram(&cols));
        (lam.sqrt() / self.h_norm(fixed), x)
    }
}

/// Gram matrix of the weighted derivative-sum `H^m` inner product of real fields.
fn sobolev_gram(fields: &[ArcField], m: usize) -> DMatrix<f64> {
    let stacks: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| {
            let mut out = Vec::new();
            for c in 0..f.ncomp() {
                let g = ArcField { grid: f.grid.clone(), window: f.window, components: vec![f.components[c].clone()] };
                out.extend(super::norms::derivative_stack(&g, m));
            }
            out
        })
        .collect();
    let r = DMatrix::from_fn(stacks[0].len(), stacks.len(), |i, j| stacks[j][i]);
    r.transpose() * r
}

/// Sampled product constant `sup ||grad_u v||_{L^2} / (||u||_{H^2} ||v||_{H^2})` on `Omega`
/// (`m = 1`) over real fields spanned by Chebyshev polynomials in `x` times Hermite functions
/// in `t`: the best of `samples` random pairs, refined by alternating maximization.
pub fn product_constant_arc(grid: &ChebGrid, window: &AxialWindow, m: usize, samples: usize, seed: u64) -> Result<f64> {
    if m != 1 {
        return Err(Error::InvalidArgument("the product constant on Omega is sampled for m = 1".into()));
    }
    let basis = ProductBasis::new(grid, window, m);
    let dim = basis.elems.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..samples)
        .map(|_| {
            let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            (basis.ratio(&u, &v), u, v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = pairs.first().map_or(0.0, |p| p.0);
    for (_, u0, _) in pairs.into_iter().take(PRODUCT_STARTS) {
        let mut u = u0;
        let mut last = 0.0;
        for _ in 0..PRODUCT_SWEEPS {
            let (_, v) = basis.best_partner(&u, true);
            let (r, nu) = basis.best_partner(&v, false);
            u = nu;
            best = best.max(r);
            if (r - last).abs() <= 1e-6 * r {
                break;
            }
            last = r;
        }
    }
    Ok(best)
}

/// Random smooth `(h, r = 0)` and Gaussian boundary data decaying inside the window.
pub fn random_data(solver: &DirichletSolver, m: usize, rng: &mut ChaCha8Rng) -> (ArcField, BoundaryData) {
    let mut h = random_arc_field(&solver.grid, &solver.window, 3, rng);
    h.components[2] = DMatrix::zeros(solver.grid.len(), solver.window.n_axial);
    let amp = rng.random_range(0.1..1.0);
    h = h.scaled(amp);
    let vectors: [[C64; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)));
    let s = axial_scale(&solver.window);
    let center = s * rng.random_range(-3.0..3.0);
    let width = s * rng.random_range(0.8..1.6);
    (h, BoundaryData::gaussian(&solver.window, m, vectors, center, width))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsEstimate {
    pub m: usize,
    /// Product constant `C`.
    pub c_product: f64,
    /// Solution-operator norm `C_m` of the non-homogeneous problem.
    pub c_solution: f64,
    pub zeta: f64,
    pub eta: f64,
    pub solution_samples: usize,
    pub product_samples: usize,
}

impl ConstantsEstimate {
    pub fn from_constants(m: usize, c_product: f64, c_solution: f64, solution_samples: usize, product_samples: usize) -> Self {
        Self {
            m,
            c_product,
            c_solution,
            zeta: 3.0 / (16.0 * c_product * c_solution * c_solution),
            eta: 1.0 / (4.0 * c_product * c_solution),
            solution_samples,
            product_samples,
        }
    }
}

/// Sampled `C` and `C_m`; `extra` data are included in the solution-norm sampling.
pub fn estimate_constants(
    solver: &DirichletSolver,
    m: usize,
    solution_samples: usize,
    product_samples: usize,
    seed: u64,
    extra: &[(ArcField, BoundaryData)],
) -> Result<ConstantsEstimate> {
    let c_product = product_constant_arc(&solver.grid, &solver.window, m, product_samples, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut c_solution: f64 = 0.0;
    let mut run = |h: &ArcField, f: &BoundaryData| -> Result<()> {
        let f = BoundaryData { m, ..f.clone() };
        let (_, rep) = solver.solve(Some(h), &f, Method::Double)?;
        c_solution = c_solution.max(rep.constant_ratio);
        Ok(())
    };
    for _ in 0..solution_samples {
        let (h, f) = random_data(solver, m, &mut rng);
        run(&h, &f)?;
    }
    for (h, f) in extra {
        run(h, f)?;
    }
    Ok(ConstantsEstimate::from_constants(m, c_product, c_solution, solution_samples + extra.len(), product_samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NsOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Refuse data above `zeta` instead of warning.
    pub strict: bool,
    pub method: Method,
}

impl Default for NsOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100, strict: false, method: Method::Double }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsReport {
    pub iterations: usize,
    pub converged: bool,
    /// `||u^{k+1} - u^k||_{H^{m+1}}`.
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub iterate_norms: Vec<f64>,
    pub max_iterate_norm: f64,
    /// Velocity rows of `Xi U + grad_u u - h` in `L^2` over interior nodes.
    pub residual: f64,
    pub scalar_residual: f64,
    pub constants: ConstantsEstimate,
    pub data_norm: f64,
    pub data_within_zeta: bool,
    pub within_eta: bool,
    /// `||u||_{H^{m+1}} + ||p||_{H^m}`.
    pub solution_norm: f64,
    /// `(4/3) C_m * data_norm`.
    pub apriori_bound: f64,
    pub bound_holds: bool,
    pub warnings: Vec<String>,
}

/// Picard iteration `u -> velocity of A(h - grad_u u, f)`; `h` carries `(h_x, h_t)` and an
/// optional zero scalar row.
pub fn solve_navier_stokes(
    solver: &DirichletSolver,
    h: &ArcField,
    f: &BoundaryData,
    constants: &ConstantsEstimate,
    opts: &NsOptions,
) -> Result<(ArcField, NsReport)> {
    let m = constants.m;
    if m == 0 {
        return Err(Error::InvalidArgument("the Picard iteration is run for m >= 1".into()));
    }
    let f = BoundaryData { m, ..f.clone() };
    let mut h3 = ArcField::zeros(&solver.grid, &solver.window, 3);
    for c in 0..2 {
        h3.components[c] = h.components[c].clone();
    }
    let data_norm = solver.data_norm(Some(&h3), &f);
    let data_within_zeta = data_norm <= constants.zeta;
    let mut warnings = Vec::new();
    if !data_within_zeta {
        let msg = format!("data norm {data_norm:.3e} exceeds zeta = {:.3e} (factor {:.2})", constants.zeta, data_norm / constants.zeta);
        if opts.strict {
            return Err(Error::Divergence(format!("{msg}; contraction is not guaranteed")));
        }
        warnings.push(msg);
    }
    let mut u = ArcField::zeros(&solver.grid, &solver.window, 3);
    let (mut increments, mut ratios, mut iterate_norms) = (Vec::new(), Vec::new(), Vec::new());
    let mut expansions = 0;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let adv = advection(&u, &u);
        let mut forcing = h3.clone();
        for c in 0..2 {
            forcing.components[c] -= &adv.components[c];
        }
        let (next, _) = solver.solve(Some(&forcing), &f, opts.method)?;
        let inc = sobolev_norm_arc(&next.sub(&u), &[0, 1], m + 1);
        if let Some(&prev) = increments.last() {
            let r: f64 = if prev > 0.0 { inc / prev } else { 0.0 };
            ratios.push(r);
            if r > 1.0 {
                expansions += 1;
                if expansions >= 2 {
                    return Err(Error::Divergence(format!(
                        "increment ratio {r:.3} > 1 twice; data norm {data_norm:.3e} vs zeta {:.3e}",
                        constants.zeta
                    )));
                }
            }
        }
        increments.push(inc);
        iterate_norms.push(sobolev_norm_arc(&next, &[0, 1], m + 1));
        u = next;
        if inc < opts.tol {
            converged = true;
            break;
        }
    }
    let adv = advection(&u, &u);
    let mut r = solver.apply_xi(&u);
    for c in 0..2 {
        r.components[c] += &adv.components[c];
        r.components[c] -= &h3.components[c];
    }
    let residual = super::norms::l2_norm_arc(&r, &[0, 1], true);
    let scalar_residual = super::norms::l2_norm_arc(&r, &[2], true);
    let solution_norm = sobolev_norm_arc(&u, &[0, 1], m + 1) + sobolev_norm_arc(&u, &[2], m);
    let max_iterate_norm = iterate_norms.iter().cloned().fold(0.0, f64::max);
    let apriori_bound = 4.0 / 3.0 * constants.c_solution * data_norm;
    let report = NsReport {
        iterations: increments.len(),
        converged,
        max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        increments,
        ratios,
        iterate_norms,
        max_iterate_norm,
        residual,
        scalar_residual,
        constants: constants.clone(),
        data_norm,
        data_within_zeta,
        within_eta: max_iterate_norm <= constants.eta,
        solution_norm,
        apriori_bound,
        bound_holds: solution_norm <= apriori_bound,
        warnings,
    };
    Ok((u, report))
}

