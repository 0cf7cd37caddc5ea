//! Principal symbols of the Stokes family on flat space, the inverse of the
//! mixed-order symbol, jump coefficients and boundary symbols.
//!
//! Covectors are plain coordinate vectors in `R^n` (flat metric), so `xi^#` and `xi`
//! share components. Matrices act on columns; `v w^T` is the map `x -> (w . x) v`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_vec, QuadOptions};
use crate::C64;

type Cmat = DMatrix<C64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

fn outer(a: &[f64], b: &[f64]) -> Cmat {
    Cmat::from_fn(a.len(), b.len(), |i, j| c(a[i] * b[j]))
}

fn col(a: &[f64]) -> Cmat {
    Cmat::from_fn(a.len(), 1, |i, _| c(a[i]))
}

fn row(a: &[f64]) -> Cmat {
    Cmat::from_fn(1, a.len(), |_, j| c(a[j]))
}

/// Covector `xi = xi' + t nu` split along a unit normal `nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentVector {
    pub xi_prime: Vec<f64>,
    pub xi_n: f64,
    pub nu: Vec<f64>,
}

impl CotangentVector {
    pub fn full(&self) -> Vec<f64> {
        self.xi_prime.iter().zip(&self.nu).map(|(a, n)| a + self.xi_n * n).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        norm2(&self.xi_prime) + self.xi_n * self.xi_n
    }
}

/// Sampled matrix-valued symbol of a given order.
#[derive(Clone)]
pub struct SymbolMatrix {
    pub order: f64,
    pub odd: bool,
    pub homogeneous: bool,
    eval: Arc<dyn Fn(&[f64], &[f64]) -> Cmat + Send + Sync>,
}

impl std::fmt::Debug for SymbolMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolMatrix").field("order", &self.order).field("odd", &self.odd).finish()
    }
}

impl SymbolMatrix {
    pub fn new(
        order: f64,
        odd: bool,
        eval: impl Fn(&[f64], &[f64]) -> Cmat + Send + Sync + 'static,
    ) -> Self {
        Self { order, odd, homogeneous: true, eval: Arc::new(eval) }
    }

    /// Value at base point `x` and covector `xi`.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Cmat {
        (self.eval)(x, xi)
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let inner = self.eval.clone();
        Self { order: self.order, odd: self.odd, homogeneous: self.homogeneous, eval: Arc::new(move |x, xi| inner(x, xi).adjoint()) }
    }

    /// Oddness observed at a covector: `|a(-xi) + a(xi)| / |a(xi)|`.
    pub fn odd_defect(&self, x: &[f64], xi: &[f64]) -> f64 {
        let m: Vec<f64> = xi.iter().map(|v| -v).collect();
        let a = self.eval(x, xi);
        (self.eval(x, &m) + &a).norm() / a.norm().max(f64::MIN_POSITIVE)
    }
}

/// Constants `f = (V0 + 1)/(2 V0 + 1)` and `g = 1/(2 V0 + 1)` of the inverse symbol.
pub fn inverse_constants(v0: f64) -> (f64, f64) {
    let d = 2.0 * v0 + 1.0;
    ((v0 + 1.0) / d, 1.0 / d)
}

fn check_covector(xi: &[f64]) -> Result<f64> {
    let r = norm2(xi);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::InvalidArgument("zero covector".into()));
    }
    Ok(r)
}

/// `[[|xi|^2 + xi xi^T, i xi], [-i xi^T, -V0]]`.
pub fn stokes_symbol(xi: &[f64], v0: f64) -> Result<Cmat> {
    let r = check_covector(xi)?;
    let n = xi.len();
    let mut m = Cmat::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&(Cmat::identity(n, n) * c(r) + outer(xi, xi)));
    m.view_mut((0, n), (n, 1)).copy_from(&(col(xi) * I));
    m.view_mut((n, 0), (1, n)).copy_from(&(row(xi) * (-I)));
    m[(n, n)] = c(-v0);
    Ok(m)
}

/// Blocks of the inverse symbol: velocity-velocity `A` (order -2), velocity-pressure `B`,
/// pressure-velocity `C` (order -1) and the constant corner `D`.
pub struct InverseBlocks {
    pub a: Cmat,
    pub b: Cmat,
    pub c: Cmat,
    pub d: C64,
}

pub fn inverse_blocks(xi: &[f64], v0: f64) -> Result<InverseBlocks> {
    let r = check_covector(xi)?;
    let n = xi.len();
    let (f, g) = inverse_constants(v0);
    Ok(InverseBlocks {
        a: (Cmat::identity(n, n) - outer(xi, xi) * c(f / r)) * c(1.0 / r),
        b: col(xi) * (I * (g / r)),
        c: row(xi) * (-I * (g / r)),
        d: c(-2.0 * g),
    })
}

/// Closed-form inverse of [`stokes_symbol`].
pub fn stokes_symbol_inverse(xi: &[f64], v0: f64) -> Result<Cmat> {
    let blk = inverse_blocks(xi, v0)?;
    let n = xi.len();
    let mut m = Cmat::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&blk.a);
    m.view_mut((0, n), (n, 1)).copy_from(&blk.b);
    m.view_mut((n, 0), (1, n)).copy_from(&blk.c);
    m[(n, n)] = blk.d;
    Ok(m)
}

/// First-order symbols of the deformation operator, the gradient, the normal traction part
/// and their adjoints at one covector.
#[derive(Clone, Debug)]
pub struct DefSymbols {
    /// `X -> (i/2)(xi X^T + X xi^T)`, flattened row-major to `n^2` entries.
    pub def: Cmat,
    pub def_adj: Cmat,
    /// `i xi` as an `n x 1` matrix.
    pub grad: Cmat,
    /// `-i xi^T`.
    pub grad_adj: Cmat,
    /// `(i/2)[(xi . nu) I + xi nu^T]`, the symbol of `u -> Def(u) nu`.
    pub d_nu: Cmat,
    /// `-(i/2)[(xi . nu) I + nu xi^T]`.
    pub d_nu_adj: Cmat,
    /// `def_adj * def = (|xi|^2 I + xi xi^T) / 2`.
    pub def_star_def: Cmat,
}

pub fn def_symbols(xi: &[f64], nu: &[f64]) -> DefSymbols {
    let n = xi.len();
    let def = Cmat::from_fn(n * n, n, |ij, k| {
        let (i, j) = (ij / n, ij % n);
        let dik = if i == k { 1.0 } else { 0.0 };
        let djk = if j == k { 1.0 } else { 0.0 };
        I * (0.5 * (xi[i] * djk + dik * xi[j]))
    });
    let def_adj = def.adjoint();
    let grad = col(xi) * I;
    let grad_adj = grad.adjoint();
    let xn = dot(xi, nu);
    let d_nu = (Cmat::identity(n, n) * c(xn) + outer(xi, nu)) * (I * 0.5);
    let d_nu_adj = d_nu.adjoint();
    let def_star_def = &def_adj * &def;
    DefSymbols { def, def_adj, grad, grad_adj, d_nu, d_nu_adj, def_star_def }
}

/// Symbol of the traction map `U -> -2 Dnu(u) + p nu`, an `n x (n+1)` matrix.
pub fn conormal_symbol(xi: &[f64], nu: &[f64]) -> Cmat {
    let n = xi.len();
    let s = def_symbols(xi, nu);
    let mut m = Cmat::zeros(n, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&(s.d_nu * c(-2.0)));
    m.view_mut((0, n), (n, 1)).copy_from(&col(nu));
    m
}

/// Symbol of the adjoint traction map `h -> (-2 Dnu* h, nu . h)`, an `(n+1) x n` matrix.
pub fn conormal_adjoint_symbol(xi: &[f64], nu: &[f64]) -> Cmat {
    conormal_symbol(xi, nu).adjoint()
}

/// Velocity trace symbol of the single layer with velocity density, the block `A` (order -2, even).
pub fn single_layer_velocity(v0: f64) -> SymbolMatrix {
    SymbolMatrix::new(-2.0, false, move |_, xi| {
        inverse_blocks(xi, v0).map(|b| b.a).unwrap_or_else(|_| Cmat::zeros(xi.len(), xi.len()))
    })
}

/// Pressure symbol of the single layer, the block `C` (order -1, odd).
pub fn single_layer_pressure(v0: f64) -> SymbolMatrix {
    SymbolMatrix::new(-1.0, true, move |_, xi| {
        inverse_blocks(xi, v0).map(|b| b.c).unwrap_or_else(|_| Cmat::zeros(1, xi.len()))
    })
}

/// Velocity part of the double layer, `-2 A Dnu* + B nu^T` (order -1, odd).
pub fn double_layer_velocity(v0: f64, nu: Vec<f64>) -> SymbolMatrix {
    SymbolMatrix::new(-1.0, true, move |_, xi| {
        let n = xi.len();
        match inverse_blocks(xi, v0) {
            Ok(b) => {
                let s = def_symbols(xi, &nu);
                &b.a * s.d_nu_adj * c(-2.0) + &b.b * row(&nu)
            }
            Err(_) => Cmat::zeros(n, n),
        }
    })
}

/// Traction of the single layer, `(-2 Dnu) A + nu C` (order -1, odd).
pub fn conormal_single_layer(v0: f64, nu: Vec<f64>) -> SymbolMatrix {
    SymbolMatrix::new(-1.0, true, move |_, xi| {
        let n = xi.len();
        match inverse_blocks(xi, v0) {
            Ok(b) => {
                let s = def_symbols(xi, &nu);
                s.d_nu * &b.a * c(-2.0) + col(&nu) * &b.c
            }
            Err(_) => Cmat::zeros(n, n),
        }
    })
}

/// Laplacian double-layer symbol `-i (xi . e_n) / |xi|^2` with `e_n = -nu`.
pub fn laplace_double_layer(nu: Vec<f64>) -> SymbolMatrix {
    SymbolMatrix::new(-1.0, true, move |_, xi| {
        let r = norm2(xi);
        let xn = -dot(xi, &nu);
        Cmat::from_element(1, 1, -I * xn / r)
    })
}

fn refuse_even(a: &SymbolMatrix, x: &[f64], nu: &[f64]) -> Result<()> {
    if !a.odd {
        return Err(Error::Hypothesis("jump coefficient needs an odd principal part".into()));
    }
    let defect = a.odd_defect(x, nu);
    if defect > 1e-10 {
        return Err(Error::Hypothesis(format!("principal part is not odd (defect {defect:.2e})")));
    }
    Ok(())
}

/// Jump coefficient in the manifold convention: `sigma_{-1}(a; -nu)`.
pub fn jump_coefficient(a: &SymbolMatrix, x: &[f64], nu: &[f64]) -> Result<Cmat> {
    refuse_even(a, x, nu)?;
    let m: Vec<f64> = nu.iter().map(|v| -v).collect();
    Ok(a.eval(x, &m))
}

/// Jump coefficient in the half-space convention: `sigma_{-1}(a; e_n)`. It agrees with
/// [`jump_coefficient`] when `e_n = -nu`.
pub fn jump_coefficient_half_space(a: &SymbolMatrix, x: &[f64], e_n: &[f64]) -> Result<Cmat> {
    refuse_even(a, x, e_n)?;
    Ok(a.eval(x, e_n))
}

/// Boundary values of a symbol: jump coefficient, average `a0` and one-sided `a0_+-`.
#[derive(Clone, Debug, Serialize)]
pub struct JumpData {
    pub jc: Cmat,
    pub a0: Cmat,
    pub a0_plus: Cmat,
    pub a0_minus: Cmat,
    pub error_estimate: f64,
}

impl JumpData {
    fn assemble(jc: Cmat, a0: Cmat, err: f64) -> Self {
        let half = &jc * (I * 0.5);
        Self { a0_plus: &a0 + &half, a0_minus: &a0 - &half, jc, a0, error_estimate: err }
    }
}

/// `a0(xi') = (1/4 pi) \int [a(xi' + t nu) + a(xi' - t nu)] dt` for order -1, or
/// `(1/2 pi) \int a(xi' + t nu) dt` for order below -1.
///
/// Adaptive panels on `[0, T]`, `T = 50 max(1, |xi'|)`; beyond `T` the symmetrized
/// integrand is fitted by a power series in `1/t` from samples at `T, 2T, .., 16T` and
/// integrated in closed form.
pub fn boundary_symbol_a0(a: &SymbolMatrix, x: &[f64], xi_prime: &[f64], nu: &[f64]) -> Result<JumpData> {
    let xp = norm2(xi_prime).sqrt();
    if xp == 0.0 {
        return Err(Error::InvalidArgument("xi' must be nonzero".into()));
    }
    if dot(xi_prime, nu).abs() > 1e-12 * xp {
        return Err(Error::InvalidArgument("xi' must be orthogonal to nu".into()));
    }
    if a.order > -1.0 + 1e-12 {
        return Err(Error::InvalidArgument("boundary symbols need order <= -1".into()));
    }
    let shape = a.eval(x, xi_prime).shape();
    let sym = |t: f64| -> Vec<C64> {
        let p: Vec<f64> = xi_prime.iter().zip(nu).map(|(a, n)| a + t * n).collect();
        let m: Vec<f64> = xi_prime.iter().zip(nu).map(|(a, n)| a - t * n).collect();
        let s = a.eval(x, &p) + a.eval(x, &m);
        s.iter().cloned().collect()
    };
    let big_t = 50.0 * xp.max(1.0);
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-14, max_panels: 20000 };
    let (mut total, err) = integrate_vec(sym, 0.0, big_t, opts)?;

    // Tail: t^2 F(t) = sum_j c_j t^{-j}, fitted at t = T 2^k.
    let nfit = 5;
    let ts: Vec<f64> = (0..nfit).map(|k| big_t * 2f64.powi(k as i32)).collect();
    let vand = DMatrix::<f64>::from_fn(nfit, nfit, |i, j| ts[i].powi(-(j as i32)));
    let lu = vand.lu();
    let samples: Vec<Vec<C64>> = ts.iter().map(|&t| sym(t).into_iter().map(|v| v * t * t).collect()).collect();
    for e in 0..total.len() {
        let re = nalgebra::DVector::from_fn(nfit, |i, _| samples[i][e].re);
        let im = nalgebra::DVector::from_fn(nfit, |i, _| samples[i][e].im);
        let cr = lu.solve(&re).ok_or_else(|| Error::Quadrature("tail fit failed".into()))?;
        let ci = lu.solve(&im).ok_or_else(|| Error::Quadrature("tail fit failed".into()))?;
        for j in 0..nfit {
            let w = 1.0 / ((1 + j) as f64 * big_t.powi(1 + j as i32));
            total[e] += C64::new(cr[j], ci[j]) * w;
        }
    }
    let a0 = Cmat::from_iterator(shape.0, shape.1, total.into_iter().map(|v| v / (2.0 * PI)));
    let jc = if (a.order + 1.0).abs() < 1e-12 {
        jump_coefficient(a, x, nu)?
    } else {
        Cmat::zeros(shape.0, shape.1)
    };
    Ok(JumpData::assemble(jc, a0, err / (2.0 * PI)))
}

/// Closed-form boundary symbols of the Stokes layer potentials at `(V0, xi', nu)`.
#[derive(Clone, Debug, Serialize)]
pub struct StokesBoundarySymbols {
    /// `sigma_{-1}` of the single-layer velocity trace.
    pub single_layer_velocity: Cmat,
    /// `sigma_0` of the average single-layer pressure trace (a row).
    pub single_layer_pressure: Cmat,
    /// `-(g/2) nu^T` and `+(g/2) nu^T`: pressure jump parts on the plus and minus sides.
    pub pressure_jump_plus: Cmat,
    pub pressure_jump_minus: Cmat,
    /// `sigma_0` of the double-layer average `K`.
    pub double_layer: Cmat,
    pub jc_double_layer: Cmat,
    pub jc_conormal_single_layer: Cmat,
    pub jc_single_layer_pressure: Cmat,
}

pub fn stokes_boundary_symbols(v0: f64, xi_prime: &[f64], nu: &[f64]) -> Result<StokesBoundarySymbols> {
    let xp = check_covector(xi_prime)?.sqrt();
    let n = nu.len();
    let (f, g) = inverse_constants(v0);
    let eta: Vec<f64> = xi_prime.iter().map(|v| v / xp).collect();
    let id = Cmat::identity(n, n);
    let single_layer_velocity = (&id * c(2.0) - outer(nu, nu) * c(f) - outer(&eta, &eta) * c(f)) * c(0.25 / xp);
    let single_layer_pressure = row(xi_prime) * (-I * g / (2.0 * xp));
    let pressure_jump_plus = row(nu) * c(-0.5 * g);
    let pressure_jump_minus = row(nu) * c(0.5 * g);
    let double_layer = (outer(nu, xi_prime) - outer(xi_prime, nu)) * (I * v0 / (2.0 * (2.0 * v0 + 1.0) * xp));
    Ok(StokesBoundarySymbols {
        single_layer_velocity,
        single_layer_pressure,
        pressure_jump_plus,
        pressure_jump_minus,
        double_layer,
        jc_double_layer: &id * (-I),
        jc_conormal_single_layer: &id * I,
        jc_single_layer_pressure: row(nu) * (I * g),
    })
}
