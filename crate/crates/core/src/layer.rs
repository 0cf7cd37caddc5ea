//! Indicial layer potentials for an arc `(alpha, beta)` of the cross-section circle.
//!
//! For constant potentials a response to a point source is a mode series
//! `f(y) = sum_k c(k) exp(i k y)` in `y = x - a`. The coefficients `c(k)` are rational
//! in `k`; their Laurent expansion at `k = infinity` is subtracted and summed in closed
//! form through Bernoulli polynomials, which makes one-sided limits exact up to the
//! truncation of a rapidly decaying remainder. Nonconstant potentials add a smooth
//! correction obtained from a dense nodal solve.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cheb::{complexify, ChebGrid};
use crate::cylinder::{assemble_xi_hat, kernel_report, mode_matrix};
use crate::error::{Error, Result};
use crate::spectral::{delta_mode_coefficients, derivative_matrix_1d, interpolation_matrix, PotentialPair, ScalarField, StateField, VectorField};
use crate::C64;

pub type Cmat = DMatrix<C64>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Highest Laurent power subtracted from the mode coefficients.
pub const LAURENT_ORDER: i32 = 6;

/// Two-point boundary `{alpha, beta}` of the arc `(alpha, beta)`, outward normals `-e_x`, `+e_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub alpha: f64,
    pub beta: f64,
    pub circumference: f64,
}

impl BoundarySpec {
    pub fn new(alpha: f64, beta: f64, circumference: f64) -> Result<Self> {
        let len = beta - alpha;
        if !(circumference > 0.0) || !(len > 0.0 && len < circumference) {
            return Err(Error::InvalidArgument(format!("arc ({alpha}, {beta}) must satisfy 0 < beta - alpha < {circumference}")));
        }
        Ok(Self { alpha, beta, circumference })
    }

    pub fn points(&self) -> [f64; 2] {
        [self.alpha, self.beta]
    }

    /// Outward normal (as a multiple of `e_x`) at boundary point `b`.
    pub fn normal(&self, b: usize) -> f64 {
        if b == 0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn length(&self) -> f64 {
        self.beta - self.alpha
    }

    /// Strictly inside the arc, modulo the circumference.
    pub fn contains(&self, x: f64) -> bool {
        let s = (x - self.alpha).rem_euclid(self.circumference);
        s > 0.0 && s < self.length()
    }

    /// Dimension `|Gamma'| (d + 1)` of trace vectors.
    pub fn trace_dim(&self) -> usize {
        4
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Interior,
    Exterior,
}

impl Side {
    /// Sign of `x - a` when approaching the boundary point with outward normal `nu`.
    fn approach(self, nu: f64) -> f64 {
        match self {
            Side::Interior => -nu,
            Side::Exterior => nu,
        }
    }
}

/// Conormal symbol `b(k) = b0 + k b1` of `-2 D_nu(u) + p nu` for `nu = nu e_x`.
fn conormal_parts(tau: f64, nu: f64) -> (Cmat, Cmat) {
    let mut b0 = Cmat::zeros(2, 3);
    b0[(0, 2)] = c(nu);
    b0[(1, 0)] = -I * (nu * tau);
    let mut b1 = Cmat::zeros(2, 3);
    b1[(0, 0)] = -I * (2.0 * nu);
    b1[(1, 1)] = -I * nu;
    (b0, b1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceKind {
    /// Velocity polarization, zero pressure source.
    Single,
    /// Adjoint conormal source at a boundary point with normal `nu e_x`.
    Double { nu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Readout {
    /// `(u_x, u_t, p)`.
    Value,
    /// Traction `-2 D_nu(u) + p nu` for `nu = nu e_x`.
    Traction { nu: f64 },
}

/// Matrix Laurent series `sum_i terms[i] k^-(lo + i)`.
#[derive(Clone, Debug)]
struct Laurent {
    lo: i32,
    terms: Vec<Cmat>,
}

impl Laurent {
    fn mul(&self, o: &Laurent, hi: i32) -> Laurent {
        let lo = self.lo + o.lo;
        let len = (hi - lo + 1).max(0) as usize;
        let rows = self.terms[0].nrows();
        let cols = o.terms[0].ncols();
        let mut terms = vec![Cmat::zeros(rows, cols); len];
        for (i, a) in self.terms.iter().enumerate() {
            for (j, b) in o.terms.iter().enumerate() {
                let p = i + j;
                if p < len {
                    terms[p] += a * b;
                }
            }
        }
        Laurent { lo, terms }
    }
}

/// Bernoulli numbers `B_0 .. B_12` with `B_1 = -1/2`.
const BERNOULLI: [f64; 13] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
];

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn bernoulli_polynomial(n: usize, x: f64) -> f64 {
    (0..=n).map(|k| binomial(n, k) * BERNOULLI[k] * x.powi((n - k) as i32)).sum()
}

/// `sum_{m != 0} k_m^-p exp(i k_m y)` with `k_m = 2 pi m / L`, as a function of `theta = y / L`
/// in `[0, 1]` (the endpoints give the one-sided limits at `y = 0`).
fn power_sum(p: i32, theta: f64, l: f64) -> C64 {
    match p {
        p if p < 0 => c(0.0),
        0 => c(-1.0),
        _ => {
            let fact: f64 = (1..=p).map(|i| i as f64).product();
            -(I * l).powi(p) * (bernoulli_polynomial(p as usize, theta) / fact)
        }
    }
}

/// Per-mode Green data for constant potentials.
#[derive(Clone, Debug)]
pub struct ConstantKernel {
    pub tau: f64,
    pub circumference: f64,
    pub v: Cmat,
    pub v0: f64,
    /// Retained mode indices `|m| <= modes`.
    pub modes: usize,
    inverses: Vec<Cmat>,
    laurent_q: Vec<Cmat>,
}

impl ConstantKernel {
    pub fn new(tau: f64, circumference: f64, v: &Cmat, v0: f64) -> Result<Self> {
        let scale = 1.0 + tau.abs() + (v.norm() + v0.abs()).sqrt();
        let kmax = 160.0 * scale.powf(7.0 / 6.0);
        let modes = ((kmax * circumference / (2.0 * PI)).ceil() as usize).clamp(256, 1 << 15);
        Self::with_modes(tau, circumference, v, v0, modes)
    }

    pub fn with_modes(tau: f64, circumference: f64, v: &Cmat, v0: f64, modes: usize) -> Result<Self> {
        let l = circumference;
        let inverses = (-(modes as i64)..=modes as i64)
            .map(|m| {
                let k = 2.0 * PI * m as f64 / l;
                let mm = mode_matrix(&[k], tau, v, v0);
                mm.clone().try_inverse().ok_or_else(|| {
                    let s = mm.singular_values().min();
                    Error::Singular { what: format!("mode matrix at k = {k}"), tau, min_sigma: s }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let p0 = Cmat::from_row_slice(3, 3, &[c(2.0), c(0.0), I, c(0.0), c(1.0), c(0.0), -I, c(0.0), c(-v0)]);
        let mut p1 = Cmat::zeros(3, 3);
        p1[(0, 1)] = c(tau);
        p1[(1, 0)] = c(tau);
        p1[(1, 2)] = I * tau;
        p1[(2, 1)] = -I * tau;
        let mut p2 = Cmat::zeros(3, 3);
        p2[(0, 0)] = c(tau * tau) + v[(0, 0)];
        p2[(0, 1)] = v[(0, 1)];
        p2[(1, 0)] = v[(1, 0)];
        p2[(1, 1)] = c(2.0 * tau * tau) + v[(1, 1)];
        let q0 = p0.try_inverse().ok_or_else(|| Error::Singular { what: "principal part".into(), tau, min_sigma: 0.0 })?;
        let mut laurent_q = vec![q0.clone()];
        for j in 1..=(LAURENT_ORDER + 2) as usize {
            let mut acc = &p1 * &laurent_q[j - 1];
            if j >= 2 {
                acc += &p2 * &laurent_q[j - 2];
            }
            laurent_q.push(-(&q0 * acc));
        }
        Ok(Self { tau, circumference, v: v.clone(), v0, modes, inverses, laurent_q })
    }

    fn wave(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.circumference
    }

    fn source(&self, kind: SourceKind) -> (Cmat, Cmat) {
        match kind {
            SourceKind::Single => {
                let mut s0 = Cmat::zeros(3, 2);
                s0[(0, 0)] = c(1.0);
                s0[(1, 1)] = c(1.0);
                (s0, Cmat::zeros(3, 2))
            }
            SourceKind::Double { nu } => {
                let (b0, b1) = conormal_parts(self.tau, nu);
                (b0.adjoint(), b1.adjoint())
            }
        }
    }

    fn readout(&self, r: Readout) -> (Cmat, Cmat) {
        match r {
            Readout::Value => (Cmat::identity(3, 3), Cmat::zeros(3, 3)),
            Readout::Traction { nu } => conormal_parts(self.tau, nu),
        }
    }

    /// Mode series of `R(k) M(k)^-1 S(k) / L` for a source at the origin.
    pub fn series(&self, kind: SourceKind, readout: Readout) -> ModeSeries {
        let (s0, s1) = self.source(kind);
        let (r0, r1) = self.readout(readout);
        let l = self.circumference;
        let hi = LAURENT_ORDER;
        let mut d0 = Cmat::zeros(3, 3);
        d0[(2, 2)] = c(1.0);
        let mut d1 = Cmat::zeros(3, 3);
        d1[(0, 0)] = c(1.0);
        d1[(1, 1)] = c(1.0);
        let lam = Laurent { lo: 0, terms: vec![d0, d1] };
        let q = Laurent { lo: 0, terms: self.laurent_q.clone() };
        let rr = Laurent { lo: -1, terms: vec![r1.clone(), r0.clone()] };
        let ss = Laurent { lo: -1, terms: vec![s1.clone(), s0.clone()] };
        let series = rr.mul(&lam, hi + 2).mul(&q, hi + 2).mul(&lam, hi + 2).mul(&ss, hi);
        let laurent: Vec<Cmat> = series.terms.iter().map(|t| t / c(l)).collect();
        let lo = series.lo;
        let kk = self.modes as i64;
        let mut rem = Vec::with_capacity(2 * self.modes + 1);
        let mut full = Vec::with_capacity(2 * self.modes + 1);
        for m in -kk..=kk {
            let k = self.wave(m);
            let cm = (&r0 + &r1 * c(k)) * &self.inverses[(m + kk) as usize] * (&s0 + &s1 * c(k)) / c(l);
            let mut r = cm.clone();
            if m != 0 {
                for (i, a) in laurent.iter().enumerate() {
                    r -= a * c(k.powi(-(lo + i as i32)));
                }
            }
            rem.push(r);
            full.push(cm);
        }
        let k_last = self.wave(kk);
        let next = laurent.last().map(|a| a.norm()).unwrap_or(0.0) * (1.0 + self.tau.abs());
        ModeSeries {
            circumference: l,
            modes: self.modes,
            rows: full[0].nrows(),
            cols: full[0].ncols(),
            rem,
            full,
            laurent_lo: lo,
            laurent,
            tail_estimate: 2.0 * next * k_last.powi(-hi) / hi as f64,
        }
    }
}

/// Matrix-valued mode series for a point source at the origin.
#[derive(Clone, Debug)]
pub struct ModeSeries {
    pub circumference: f64,
    pub modes: usize,
    pub rows: usize,
    pub cols: usize,
    /// Remainders `c(k) - sum_p A_p k^-p` (plain `c(0)` at `m = 0`), index `m + modes`.
    rem: Vec<Cmat>,
    full: Vec<Cmat>,
    laurent_lo: i32,
    laurent: Vec<Cmat>,
    /// Size of the neglected remainder tail.
    pub tail_estimate: f64,
}

impl ModeSeries {
    /// Value at `y`; at `y = 0 (mod L)` the one-sided limit from the side `sign(y) = approach`.
    pub fn eval(&self, y: f64, approach: f64) -> Cmat {
        let l = self.circumference;
        let mut theta = (y / l).rem_euclid(1.0);
        let at_source = theta < 1e-13 || theta > 1.0 - 1e-13;
        if at_source {
            theta = if approach >= 0.0 { 0.0 } else { 1.0 };
        }
        let kk = self.modes as i64;
        let mut out = self.rem[kk as usize].clone();
        let step = C64::from_polar(1.0, 2.0 * PI * theta);
        let mut z = C64::new(1.0, 0.0);
        for m in 1..=kk {
            z *= step;
            if m % 64 == 0 {
                z = C64::from_polar(1.0, 2.0 * PI * theta * m as f64);
            }
            let zc = z.conj();
            let a = &self.rem[(kk + m) as usize];
            let b = &self.rem[(kk - m) as usize];
            for (o, (x, w)) in out.iter_mut().zip(a.iter().zip(b.iter())) {
                *o += x * z + w * zc;
            }
        }
        for (i, a) in self.laurent.iter().enumerate() {
            let p = self.laurent_lo + i as i32;
            out += a * power_sum(p, theta, l);
        }
        out
    }

    /// Scalar mode coefficients of entry `(r, col)` for a source moved to `a`.
    pub fn coefficients(&self, r: usize, col: usize, a: f64) -> ModeCoefficients {
        let kk = self.modes as i64;
        let l = self.circumference;
        let modes: Vec<i64> = (-kk..=kk).collect();
        let coeffs = modes
            .iter()
            .map(|&m| self.full[(m + kk) as usize][(r, col)] * C64::from_polar(1.0, -2.0 * PI * m as f64 * a / l))
            .collect();
        ModeCoefficients { circumference: l, modes, coeffs }
    }
}

/// Scalar Fourier series `sum_m c_m exp(2 pi i m x / L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCoefficients {
    pub circumference: f64,
    pub modes: Vec<i64>,
    pub coeffs: Vec<C64>,
}

impl ModeCoefficients {
    pub fn band(&self) -> i64 {
        self.modes.iter().map(|m| m.abs()).max().unwrap_or(0)
    }

    /// Series value with the exponential filter `exp(-36 (|m|/K)^order)` (`order = 0`: unfiltered).
    pub fn eval_filtered(&self, x: f64, order: i32) -> C64 {
        let kb = self.band().max(1) as f64;
        self.modes
            .iter()
            .zip(&self.coeffs)
            .map(|(&m, cm)| {
                let sigma = if order == 0 { 1.0 } else { (-36.0 * (m.abs() as f64 / kb).powi(order)).exp() };
                cm * C64::from_polar(sigma, 2.0 * PI * m as f64 * x / self.circumference)
            })
            .sum()
    }

    /// Sampled partial sum of `sgn(x - a)` on a circle of length `L`, used as a test field.
    pub fn sign_series(a: f64, band: i64, circumference: f64) -> Self {
        // sgn on (a, a + L/2) positive, negative on (a - L/2, a): odd square wave.
        let modes: Vec<i64> = (-band..=band).collect();
        let coeffs = modes
            .iter()
            .map(|&m| {
                if m % 2 == 0 {
                    c(0.0)
                } else {
                    C64::new(0.0, -2.0 / (PI * m as f64)) * C64::from_polar(1.0, -2.0 * PI * m as f64 * a / circumference)
                }
            })
            .collect();
        Self { circumference, modes, coeffs }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceOptions {
    /// `eps_j = c 2^-j / K`.
    pub c: f64,
    pub levels: usize,
    pub filter_order: i32,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { c: 1024.0, levels: 4, filter_order: 4 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceValue {
    pub value: C64,
    pub error_estimate: f64,
    pub eps: Vec<f64>,
    /// Richardson table corrections decreased monotonically.
    pub monotone: bool,
}

/// One-sided limit at `point` from the side `approach` (sign of `x - point`) by filtered
/// evaluation at `point + approach eps_j` and polynomial extrapolation to `eps = 0`.
pub fn one_sided_trace(field: &ModeCoefficients, point: f64, approach: f64, opts: TraceOptions) -> Result<TraceValue> {
    let kb = field.band().max(1) as f64;
    let s = if approach >= 0.0 { 1.0 } else { -1.0 };
    let eps: Vec<f64> = (0..opts.levels).map(|j| opts.c * 0.5f64.powi(j as i32) / kb).collect();
    if eps[0] >= 0.25 * field.circumference {
        return Err(Error::Extraction(format!("offset {} too large for the circle", eps[0])));
    }
    let vals: Vec<C64> = eps.iter().map(|e| field.eval_filtered(point + s * e, opts.filter_order)).collect();
    // Neville table in eps, evaluated at 0.
    let n = eps.len();
    let mut table = vals.clone();
    let mut diag = vec![vals[n - 1]];
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (eps[i], eps[i + level]);
            table[i] = (table[i + 1] * xa - table[i] * xb) / c(xa - xb);
        }
        diag.push(table[0]);
    }
    let corrections: Vec<f64> = diag.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let floor = 1e-12 * (1.0 + table[0].norm());
    let monotone = corrections.windows(2).all(|w| w[1] <= w[0] * 1.5 || w[1] < floor);
    Ok(TraceValue { value: table[0], error_estimate: *corrections.last().unwrap_or(&0.0), eps, monotone })
}

/// Potentials at a point by band-limited interpolation.
pub fn potentials_at(pot: &PotentialPair, x: f64) -> (Cmat, f64) {
    let row = interpolation_matrix(&pot.grid, &[x]);
    let mut v = Cmat::zeros(2, 2);
    let mut v0 = 0.0;
    for (j, w) in row.iter().enumerate() {
        v += &pot.v[j] * *w;
        v0 += (w * pot.v0[j]).re;
    }
    let v = (&v + v.adjoint()) * c(0.5);
    (v.map(|z| if z.im.abs() < 1e-15 { c(z.re) } else { z }), v0)
}

/// Reference-kernel series attached to one boundary point.
#[derive(Clone, Debug)]
struct PointKernel {
    point: f64,
    nu: f64,
    sl_value: ModeSeries,
    sl_traction: [ModeSeries; 2],
    dl_value: ModeSeries,
    dl_traction: [ModeSeries; 2],
}

fn traction_index(nu: f64) -> usize {
    if nu < 0.0 {
        0
    } else {
        1
    }
}

/// Nodal samples of a correction field for both polarizations.
#[derive(Clone, Debug)]
struct Correction {
    /// `3N x 2` stacked `(u_x, u_t, p)` samples.
    values: Cmat,
    derivative: Cmat,
}

/// Indicial single and double layers for one `tau`.
#[derive(Clone, Debug)]
pub struct IndicialGreen {
    pub tau: f64,
    pub spec: BoundarySpec,
    pub potentials: PotentialPair,
    kernels: Vec<PointKernel>,
    /// Per boundary point: (single, double) corrections for nonconstant potentials.
    corrections: Option<Vec<(Correction, Correction)>>,
    grid_n: usize,
}

impl IndicialGreen {
    pub fn new(tau: f64, spec: &BoundarySpec, pot: &PotentialPair) -> Result<Self> {
        let g = &pot.grid;
        if g.dim() != 1 || (g.circumference() - spec.circumference).abs() > 1e-12 {
            return Err(Error::InvalidArgument("layer potentials need a 1-d grid matching the boundary circle".into()));
        }
        let constant = pot.constant_values();
        let mut kernels = Vec::new();
        for (b, &a) in spec.points().iter().enumerate() {
            let (v, v0) = match &constant {
                Some(cv) => cv.clone(),
                None => potentials_at(pot, a),
            };
            let ck = ConstantKernel::new(tau, spec.circumference, &v, v0)?;
            let nu = spec.normal(b);
            let dl = SourceKind::Double { nu };
            kernels.push(PointKernel {
                point: a,
                nu,
                sl_value: ck.series(SourceKind::Single, Readout::Value),
                sl_traction: [ck.series(SourceKind::Single, Readout::Traction { nu: -1.0 }), ck.series(SourceKind::Single, Readout::Traction { nu: 1.0 })],
                dl_value: ck.series(dl, Readout::Value),
                dl_traction: [ck.series(dl, Readout::Traction { nu: -1.0 }), ck.series(dl, Readout::Traction { nu: 1.0 })],
            });
        }
        let corrections = if constant.is_some() { None } else { Some(Self::corrections(tau, spec, pot, &kernels)?) };
        Ok(Self { tau, spec: *spec, potentials: pot.clone(), kernels, corrections, grid_n: g.n_points() })
    }

    fn corrections(tau: f64, spec: &BoundarySpec, pot: &PotentialPair, kernels: &[PointKernel]) -> Result<Vec<(Correction, Correction)>> {
        let g = &pot.grid;
        let n = g.n_points();
        let xi = assemble_xi_hat(tau, g, pot)?;
        let rep = kernel_report(tau, &xi.matrix);
        if rep.kernel_dim > 0 {
            return Err(Error::Singular { what: "Xi(tau) on the circle".into(), tau, min_sigma: rep.min_sigma });
        }
        let lu = xi.matrix.lu();
        let nodes = g.axis_nodes();
        let d = derivative_matrix_1d(g);
        let mut out = Vec::new();
        for pk in kernels {
            let (va, v0a) = potentials_at(pot, pk.point);
            let mut pair = Vec::new();
            for series in [&pk.sl_value, &pk.dl_value] {
                let mut rhs = Cmat::zeros(3 * n, 2);
                for (j, &x) in nodes.iter().enumerate() {
                    let gval = series.eval(x - pk.point, 1.0);
                    let dv = &pot.v[j] - &va;
                    let vel = &dv * gval.rows(0, 2);
                    for col in 0..2 {
                        rhs[(j, col)] = -vel[(0, col)];
                        rhs[(n + j, col)] = -vel[(1, col)];
                        rhs[(2 * n + j, col)] = gval[(2, col)] * (pot.v0[j] - v0a);
                    }
                }
                let values = lu.solve(&rhs).ok_or(Error::Singular { what: "Xi(tau) on the circle".into(), tau, min_sigma: rep.min_sigma })?;
                let mut derivative = Cmat::zeros(3 * n, 2);
                for blk in 0..3 {
                    let part = &d * values.rows(blk * n, n);
                    derivative.rows_mut(blk * n, n).copy_from(&part);
                }
                pair.push(Correction { values, derivative });
            }
            let dl = pair.pop().unwrap();
            let sl = pair.pop().unwrap();
            out.push((sl, dl));
        }
        let _ = spec;
        Ok(out)
    }

    /// Constant reference potentials of the series attached to boundary point `b`.
    pub fn reference(&self, b: usize) -> (Cmat, f64) {
        self.potentials.constant_values().unwrap_or_else(|| potentials_at(&self.potentials, self.spec.points()[b]))
    }

    /// Whether a nodal correction for nonconstant potentials is present.
    pub fn is_corrected(&self) -> bool {
        self.corrections.is_some()
    }

    fn corr_value(&self, corr: &Correction, x: f64) -> Cmat {
        let n = self.grid_n;
        let row = interpolation_matrix(&self.potentials.grid, &[x]);
        let mut out = Cmat::zeros(3, 2);
        for blk in 0..3 {
            let v = &row * corr.values.rows(blk * n, n);
            out.row_mut(blk).copy_from(&v);
        }
        out
    }

    fn corr_traction(&self, corr: &Correction, x: f64, nu: f64) -> Cmat {
        let n = self.grid_n;
        let row = interpolation_matrix(&self.potentials.grid, &[x]);
        let val = |blk: usize, m: &Cmat| &row * m.rows(blk * n, n);
        let (vx, vt, p) = (val(0, &corr.values), val(1, &corr.values), val(2, &corr.values));
        let (dvx, dvt) = (val(0, &corr.derivative), val(1, &corr.derivative));
        let mut out = Cmat::zeros(2, 2);
        for col in 0..2 {
            out[(0, col)] = (dvx[(0, col)] * (-2.0) + p[(0, col)]) * nu;
            out[(1, col)] = -(dvt[(0, col)] + I * self.tau * vx[(0, col)]) * nu;
        }
        let _ = vt;
        out
    }

    /// Single layer `(u_x, u_t, p)` at `x`: a `3 x 4` matrix acting on `(h_alpha, h_beta)`.
    pub fn single_layer(&self, x: f64, side: Side) -> Cmat {
        self.layer(x, side, false)
    }

    /// Double layer at `x`, `3 x 4`.
    pub fn double_layer(&self, x: f64, side: Side) -> Cmat {
        self.layer(x, side, true)
    }

    fn layer(&self, x: f64, side: Side, double: bool) -> Cmat {
        let mut out = Cmat::zeros(3, 4);
        for (b, pk) in self.kernels.iter().enumerate() {
            let s = if double { &pk.dl_value } else { &pk.sl_value };
            let mut blk = s.eval(x - pk.point, side.approach(pk.nu));
            if let Some(corr) = &self.corrections {
                let cr = if double { &corr[b].1 } else { &corr[b].0 };
                blk += self.corr_value(cr, x);
            }
            out.view_mut((0, 2 * b), (3, 2)).copy_from(&blk);
        }
        out
    }

    /// Traction of the single layer at boundary point `target`, `2 x 4`.
    pub fn single_layer_traction(&self, target: usize, side: Side) -> Cmat {
        self.traction(target, side, false)
    }

    /// Traction of the double layer at boundary point `target`, `2 x 4`.
    pub fn double_layer_traction(&self, target: usize, side: Side) -> Cmat {
        self.traction(target, side, true)
    }

    fn traction(&self, target: usize, side: Side, double: bool) -> Cmat {
        let x = self.spec.points()[target];
        let nu = self.spec.normal(target);
        let ti = traction_index(nu);
        let mut out = Cmat::zeros(2, 4);
        for (b, pk) in self.kernels.iter().enumerate() {
            let s = if double { &pk.dl_traction[ti] } else { &pk.sl_traction[ti] };
            let mut blk = s.eval(x - pk.point, side.approach(nu));
            if let Some(corr) = &self.corrections {
                let cr = if double { &corr[b].1 } else { &corr[b].0 };
                blk += self.corr_traction(cr, x, nu);
            }
            out.view_mut((0, 2 * b), (2, 2)).copy_from(&blk);
        }
        out
    }

    /// Single-layer velocity series from a source at `a` (constant potentials only).
    fn free_series(&self) -> Result<&ModeSeries> {
        if self.corrections.is_some() {
            return Err(Error::InvalidArgument("free point sources need constant potentials".into()));
        }
        Ok(&self.kernels[0].sl_value)
    }

    /// Largest neglected remainder over the stored series.
    pub fn tail_estimate(&self) -> f64 {
        self.kernels
            .iter()
            .flat_map(|k| [&k.sl_value, &k.dl_value, &k.sl_traction[0], &k.sl_traction[1], &k.dl_traction[0], &k.dl_traction[1]])
            .map(|s| s.tail_estimate)
            .fold(0.0, f64::max)
    }

    pub fn series_modes(&self) -> usize {
        self.kernels[0].sl_value.modes
    }
}

/// Path used by [`green_response`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GreenPath {
    /// Per-mode `3 x 3` solves; constant potentials only.
    Fast,
    /// Dense solve of the assembled `Xi(tau)`.
    Generic,
}

/// `Xi(tau)^-1` applied to the band-limited point mass at `a` with velocity polarization `e`.
pub fn green_response(tau: f64, a: f64, e: [C64; 2], pot: &PotentialPair, path: GreenPath) -> Result<StateField> {
    let g = &pot.grid;
    let n = g.n_points();
    let delta = delta_mode_coefficients(g, a)?;
    match path {
        GreenPath::Generic => {
            let xi = assemble_xi_hat(tau, g, pot)?;
            let rep = kernel_report(tau, &xi.matrix);
            if rep.kernel_dim > 0 {
                return Err(Error::Singular { what: "Xi(tau)".into(), tau, min_sigma: rep.min_sigma });
            }
            let samples = delta.to_samples();
            let mut rhs = DVector::zeros(3 * n);
            for j in 0..n {
                rhs[j] = samples[j] * e[0];
                rhs[n + j] = samples[j] * e[1];
            }
            let sol = xi.matrix.lu().solve(&rhs).ok_or(Error::Singular { what: "Xi(tau)".into(), tau, min_sigma: rep.min_sigma })?;
            StateField::from_vector(g, &sol)
        }
        GreenPath::Fast => {
            let (v, v0) = pot
                .constant_values()
                .ok_or_else(|| Error::InvalidArgument("the per-mode path needs constant potentials".into()))?;
            let band = delta.band() as i64;
            let nodes = g.axis_nodes();
            let mut comps = vec![vec![C64::new(0.0, 0.0); n]; 3];
            let src = DVector::from_vec(vec![e[0], e[1], c(0.0)]);
            for m in -band..=band {
                let k = g.wave_number(m);
                let mm = mode_matrix(&[k], tau, &v, v0);
                let sol = mm.clone().lu().solve(&src).ok_or_else(|| Error::Singular {
                    what: format!("mode matrix at k = {k}"),
                    tau,
                    min_sigma: mm.singular_values().min(),
                })?;
                let coef = delta.coeffs[(m + band) as usize];
                for (j, &x) in nodes.iter().enumerate() {
                    let ph = coef * C64::from_polar(1.0, k * x);
                    for r in 0..3 {
                        comps[r][j] += sol[r] * ph;
                    }
                }
            }
            let p = ScalarField::new(g, comps.pop().unwrap())?;
            StateField::new(VectorField::new(g, comps)?, p)
        }
    }
}

/// Extraction metadata recorded with every boundary-operator family.
#[derive(Clone, Debug, Serialize)]
pub struct ExtractionInfo {
    pub grid_n: usize,
    pub series_modes: usize,
    pub laurent_order: i32,
    pub tail_estimate: f64,
    pub nodal_correction: bool,
    /// Richardson offsets used for the cross-check of the double-layer jump.
    pub eps_levels: Vec<f64>,
    pub richardson_half_jump_error: f64,
}

/// `S(tau)`, `K(tau)`, `K*(tau)` on `Gamma' = {alpha, beta}`, rows and columns indexed by
/// (boundary point, component).
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryOperatorFamily {
    pub tau: f64,
    pub s_hat: Cmat,
    pub k_hat: Cmat,
    pub k_hat_star: Cmat,
    /// Dirichlet-to-Neumann operator from the layer identity `S N = -1/2 + K`.
    pub n_hat: Option<Cmat>,
    /// Traction of the double layer (both sides averaged).
    pub w_hat: Cmat,
    /// `(interior - exterior) / 2` of the double layer, expected `I / 2`.
    pub half_jump_double: Cmat,
    /// `(interior - exterior) / 2` of the conormal single layer, expected `-I / 2`.
    pub half_jump_conormal: Cmat,
    /// `|| interior - exterior ||` of the single-layer velocity.
    pub single_layer_jump: f64,
    /// `|| interior - exterior ||` of the double-layer traction.
    pub double_traction_jump: f64,
    pub info: ExtractionInfo,
}

/// Tolerance on the measured half-jumps.
pub const HALF_JUMP_TOL: f64 = 1e-3;

fn stack_points(f: impl Fn(usize) -> Cmat, rows: usize) -> Cmat {
    let mut m = Cmat::zeros(2 * rows, 4);
    for b in 0..2 {
        m.view_mut((rows * b, 0), (rows, 4)).copy_from(&f(b));
    }
    m
}

impl IndicialGreen {
    /// Velocity traces of the single layer on `Gamma'` from one side, `4 x 4`.
    pub fn single_layer_trace(&self, side: Side) -> Cmat {
        let pts = self.spec.points();
        stack_points(|b| self.single_layer(pts[b], side).rows(0, 2).into_owned(), 2)
    }

    pub fn double_layer_trace(&self, side: Side) -> Cmat {
        let pts = self.spec.points();
        stack_points(|b| self.double_layer(pts[b], side).rows(0, 2).into_owned(), 2)
    }

    pub fn conormal_single_trace(&self, side: Side) -> Cmat {
        stack_points(|b| self.single_layer_traction(b, side), 2)
    }

    pub fn conormal_double_trace(&self, side: Side) -> Cmat {
        stack_points(|b| self.double_layer_traction(b, side), 2)
    }
}

/// Mode count per unit of `max(1, |tau|)` used by the Richardson cross-check.
pub const RICHARDSON_MODES: usize = 4096;

/// Richardson cross-check of the double-layer half-jump at `alpha` for polarization `e_x`.
fn richardson_half_jump(green: &IndicialGreen) -> Result<(f64, Vec<f64>)> {
    let pk = &green.kernels[0];
    let (v, v0) = green.reference(0);
    let ck = ConstantKernel::with_modes(green.tau, green.spec.circumference, &v, v0, RICHARDSON_MODES * green.tau.abs().max(1.0).ceil().min(16.0) as usize)?;
    let field = ck.series(SourceKind::Double { nu: pk.nu }, Readout::Value).coefficients(0, 0, 0.0);
    let opts = TraceOptions::default();
    let plus = one_sided_trace(&field, 0.0, Side::Interior.approach(pk.nu), opts)?;
    let minus = one_sided_trace(&field, 0.0, Side::Exterior.approach(pk.nu), opts)?;
    let hj = (plus.value - minus.value) * 0.5;
    Ok(((hj - c(0.5)).norm() + plus.error_estimate + minus.error_estimate, plus.eps))
}

pub fn boundary_operators(tau: f64, spec: &BoundarySpec, pot: &PotentialPair) -> Result<BoundaryOperatorFamily> {
    let green = IndicialGreen::new(tau, spec, pot)?;
    family_from_green(&green)
}

pub fn family_from_green(green: &IndicialGreen) -> Result<BoundaryOperatorFamily> {
    let tau = green.tau;
    let s_in = green.single_layer_trace(Side::Interior);
    let s_out = green.single_layer_trace(Side::Exterior);
    let d_in = green.double_layer_trace(Side::Interior);
    let d_out = green.double_layer_trace(Side::Exterior);
    let t_in = green.conormal_single_trace(Side::Interior);
    let t_out = green.conormal_single_trace(Side::Exterior);
    let w_in = green.conormal_double_trace(Side::Interior);
    let w_out = green.conormal_double_trace(Side::Exterior);
    let half = c(0.5);
    let s_hat = (&s_in + &s_out) * half;
    let k_hat = (&d_in + &d_out) * half;
    let k_hat_star = (&t_in + &t_out) * half;
    let w_hat = (&w_in + &w_out) * half;
    let half_jump_double = (&d_in - &d_out) * half;
    let half_jump_conormal = (&t_in - &t_out) * half;
    let id = Cmat::identity(4, 4);
    let dev_d = (&half_jump_double - &id * half).norm();
    let dev_c = (&half_jump_conormal + &id * half).norm();
    if dev_d > HALF_JUMP_TOL || dev_c > HALF_JUMP_TOL {
        return Err(Error::Extraction(format!(
            "half-jumps deviate from +-1/2 at tau = {tau}: double {dev_d:.3e}, conormal {dev_c:.3e}"
        )));
    }
    let n_hat = s_hat.clone().lu().solve(&(&k_hat - &id * half));
    let (rich, eps) = richardson_half_jump(green).unwrap_or((f64::NAN, vec![]));
    Ok(BoundaryOperatorFamily {
        tau,
        single_layer_jump: (&s_in - &s_out).norm(),
        double_traction_jump: (&w_in - &w_out).norm(),
        s_hat,
        k_hat,
        k_hat_star,
        n_hat,
        w_hat,
        half_jump_double,
        half_jump_conormal,
        info: ExtractionInfo {
            grid_n: green.grid_n,
            series_modes: green.series_modes(),
            laurent_order: LAURENT_ORDER,
            tail_estimate: green.tail_estimate(),
            nodal_correction: green.is_corrected(),
            eps_levels: eps,
            richardson_half_jump_error: rich,
        },
    })
}

/// `|| (1/2 + K) S - S (1/2 + K*) ||`.
pub fn operator_identity_check(f: &BoundaryOperatorFamily) -> f64 {
    let h = Cmat::identity(4, 4) * c(0.5);
    ((&h + &f.k_hat) * &f.s_hat - &f.s_hat * (&h + &f.k_hat_star)).norm()
}

/// Per-`tau` collocation solve of `Xi(tau) U = F` on the arc with Dirichlet velocity data.
#[derive(Clone, Debug)]
pub struct ArcSolution {
    pub grid: ChebGrid,
    /// `(u_x, u_t, p)` at the Chebyshev nodes.
    pub fields: [Vec<C64>; 3],
    pub condition: f64,
}

impl ArcSolution {
    /// Traction `-2 D_nu(u) + p nu` at `alpha` (`b = 0`) and `beta` (`b = 1`).
    pub fn traction(&self, tau: f64, b: usize) -> [C64; 2] {
        let d = complexify(&self.grid.diff_matrix());
        let j = if b == 0 { 0 } else { self.grid.degree };
        let nu = if b == 0 { -1.0 } else { 1.0 };
        let dv = (d.row(j) * DVector::from_column_slice(&self.fields[0]))[0];
        let dw = (d.row(j) * DVector::from_column_slice(&self.fields[1]))[0];
        [(dv * (-2.0) + self.fields[2][j]) * nu, -(dw + I * tau * self.fields[0][j]) * nu]
    }
}

/// Upper bound accepted for the collocation condition number.
pub const MAX_CONDITION: f64 = 1e12;

/// Collocation of the three rows of `Xi(tau)` on Chebyshev nodes of the arc.
/// Potentials are given at the nodes; `forcing` holds the three right-hand sides at the nodes.
pub fn solve_arc_bvp(
    tau: f64,
    grid: &ChebGrid,
    v: &[Cmat],
    v0: &[f64],
    forcing: &[Vec<C64>; 3],
    dirichlet: [[C64; 2]; 2],
    check_condition: bool,
) -> Result<ArcSolution> {
    let (mat, rhs) = arc_system(tau, grid, v, v0, forcing, dirichlet);
    let condition = if check_condition {
        let sv = mat.singular_values();
        let cond = sv.max() / sv.min().max(f64::MIN_POSITIVE);
        if cond > MAX_CONDITION {
            return Err(Error::Singular { what: format!("arc collocation (condition {cond:.2e})"), tau, min_sigma: sv.min() });
        }
        cond
    } else {
        f64::NAN
    };
    let sol = mat.lu().solve(&rhs).ok_or(Error::Singular { what: "arc collocation".into(), tau, min_sigma: 0.0 })?;
    let m = grid.len();
    let fields = [
        sol.rows(0, m).iter().cloned().collect(),
        sol.rows(m, m).iter().cloned().collect(),
        sol.rows(2 * m, m).iter().cloned().collect(),
    ];
    Ok(ArcSolution { grid: grid.clone(), fields, condition })
}

/// Collocation matrix and right-hand side; exposed for batched solves.
pub fn arc_system(
    tau: f64,
    grid: &ChebGrid,
    v: &[Cmat],
    v0: &[f64],
    forcing: &[Vec<C64>; 3],
    dirichlet: [[C64; 2]; 2],
) -> (Cmat, DVector<C64>) {
    let m = grid.len();
    let d = complexify(&grid.diff_matrix());
    let d2 = &d * &d;
    let s = I * tau;
    let t2 = c(tau * tau);
    let mut a = Cmat::zeros(3 * m, 3 * m);
    let mut rhs = DVector::zeros(3 * m);
    for i in 0..m {
        let boundary = i == 0 || i == m - 1;
        if boundary {
            let b = if i == 0 { 0 } else { 1 };
            a[(i, i)] = c(1.0);
            a[(m + i, m + i)] = c(1.0);
            rhs[i] = dirichlet[b][0];
            rhs[m + i] = dirichlet[b][1];
        } else {
            // x-row: -2 v'' + tau^2 v - s w' + (V u)_x + p'
            for j in 0..m {
                a[(i, j)] = -d2[(i, j)] * 2.0;
                a[(i, m + j)] = -s * d[(i, j)];
                a[(i, 2 * m + j)] = d[(i, j)];
                // t-row: -w'' + 2 tau^2 w - s v' + (V u)_t + s p
                a[(m + i, m + j)] = -d2[(i, j)];
                a[(m + i, j)] = -s * d[(i, j)];
            }
            a[(i, i)] += t2 + v[i][(0, 0)];
            a[(i, m + i)] += v[i][(0, 1)];
            a[(m + i, m + i)] += t2 * 2.0 + v[i][(1, 1)];
            a[(m + i, i)] += v[i][(1, 0)];
            a[(m + i, 2 * m + i)] += s;
            rhs[i] = forcing[0][i];
            rhs[m + i] = forcing[1][i];
        }
        // scalar row at every node: -v' - s w - V0 p
        for j in 0..m {
            a[(2 * m + i, j)] = -d[(i, j)];
        }
        a[(2 * m + i, m + i)] = -s;
        a[(2 * m + i, 2 * m + i)] = c(-v0[i]);
        rhs[2 * m + i] = forcing[2][i];
    }
    (a, rhs)
}

/// Potentials sampled at Chebyshev nodes of the arc.
pub fn potentials_on_arc(pot: &PotentialPair, grid: &ChebGrid) -> (Vec<Cmat>, Vec<f64>) {
    grid.nodes.iter().map(|&x| potentials_at(pot, x)).unzip()
}

#[derive(Clone, Debug, Serialize)]
pub struct DtnReport {
    pub tau: f64,
    /// Collocation Dirichlet-to-Neumann matrix.
    pub n_hat: Cmat,
    /// `|| S N - (-1/2 + K) ||`.
    pub identity_residual: f64,
    /// `|| W_int - W_ext ||` for the double-layer traction.
    pub no_jump_residual: f64,
    /// `|| W_int - (1/2 + K*) N ||`.
    pub conormal_residual: f64,
    pub condition: f64,
}

/// Dirichlet-to-Neumann map by interior collocation, checked against the layer operators.
pub fn dtn_matrix(tau: f64, spec: &BoundarySpec, pot: &PotentialPair, degree: usize) -> Result<DtnReport> {
    let grid = ChebGrid::new(degree, spec.alpha, spec.beta)?;
    let (v, v0) = potentials_on_arc(pot, &grid);
    let zero = vec![c(0.0); grid.len()];
    let forcing = [zero.clone(), zero.clone(), zero];
    let mut n_hat = Cmat::zeros(4, 4);
    let mut condition: f64 = 0.0;
    for col in 0..4 {
        let mut h = [[c(0.0); 2]; 2];
        h[col / 2][col % 2] = c(1.0);
        let sol = solve_arc_bvp(tau, &grid, &v, &v0, &forcing, h, col == 0)?;
        if col == 0 {
            condition = sol.condition;
        }
        for b in 0..2 {
            let t = sol.traction(tau, b);
            n_hat[(2 * b, col)] = t[0];
            n_hat[(2 * b + 1, col)] = t[1];
        }
    }
    let green = IndicialGreen::new(tau, spec, pot)?;
    let fam = family_from_green(&green)?;
    let id = Cmat::identity(4, 4) * c(0.5);
    let identity_residual = (&fam.s_hat * &n_hat - (&fam.k_hat - &id)).norm();
    let w_in = green.conormal_double_trace(Side::Interior);
    let w_out = green.conormal_double_trace(Side::Exterior);
    let no_jump_residual = (&w_in - &w_out).norm();
    let conormal_residual = (&w_in - (&id + &fam.k_hat_star) * &n_hat).norm();
    Ok(DtnReport { tau, n_hat, identity_residual, no_jump_residual, conormal_residual, condition })
}

#[derive(Clone, Debug, Serialize)]
pub struct PompeiuReport {
    pub tau: f64,
    pub interior_relative_error: f64,
    pub exterior_leakage: f64,
    pub interior_points: usize,
    pub exterior_points: usize,
}

/// Pompeiu reconstruction `D(u) - S(b U) = U` inside, `0` outside, for `U` a sum of
/// single-layer responses with sources `(x_s, e_s)` off the closed arc. Constant potentials only.
pub fn pompeiu_check(tau: f64, spec: &BoundarySpec, pot: &PotentialPair, sources: &[(f64, [C64; 2])], probes: &[f64]) -> Result<PompeiuReport> {
    if sources.iter().any(|(x, _)| spec.contains(*x) || boundary_hit(spec, *x)) {
        return Err(Error::InvalidArgument("Pompeiu sources must lie outside the closed arc".into()));
    }
    let green = IndicialGreen::new(tau, spec, pot)?;
    let sl = green.free_series()?;
    let (cv, cv0) = pot.constant_values().expect("checked by free_series");
    let ck = ConstantKernel::new(tau, spec.circumference, &cv, cv0)?;
    let tr = [ck.series(SourceKind::Single, Readout::Traction { nu: -1.0 }), ck.series(SourceKind::Single, Readout::Traction { nu: 1.0 })];
    let field = |x: f64| -> DVector<C64> {
        let mut u = DVector::zeros(3);
        for (xs, e) in sources {
            u += sl.eval(x - xs, 1.0) * DVector::from_vec(e.to_vec());
        }
        u
    };
    let mut trace = DVector::zeros(4);
    let mut traction = DVector::zeros(4);
    for (b, &a) in spec.points().iter().enumerate() {
        let u = field(a);
        trace[2 * b] = u[0];
        trace[2 * b + 1] = u[1];
        let nu = spec.normal(b);
        let mut t = DVector::zeros(2);
        for (xs, e) in sources {
            t += tr[traction_index(nu)].eval(a - xs, 1.0) * DVector::from_vec(e.to_vec());
        }
        traction[2 * b] = t[0];
        traction[2 * b + 1] = t[1];
    }
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    let mut leak: f64 = 0.0;
    let (mut ni, mut ne) = (0, 0);
    for &x in probes {
        let rec = green.double_layer(x, Side::Interior) * &trace - green.single_layer(x, Side::Interior) * &traction;
        if spec.contains(x) {
            let u = field(x);
            num = num.max((&rec - &u).norm());
            den = den.max(u.norm());
            ni += 1;
        } else if !boundary_hit(spec, x) {
            leak = leak.max(rec.norm());
            ne += 1;
        }
    }
    Ok(PompeiuReport { tau, interior_relative_error: num / den.max(f64::MIN_POSITIVE), exterior_leakage: leak, interior_points: ni, exterior_points: ne })
}

fn boundary_hit(spec: &BoundarySpec, x: f64) -> bool {
    spec.points().iter().any(|&a| {
        let d = (x - a).rem_euclid(spec.circumference);
        d < 1e-12 || spec.circumference - d < 1e-12
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryScanRow {
    pub tau: f64,
    pub min_sigma_xi: f64,
    pub min_sigma_s: f64,
    pub min_sigma_half_plus_k: f64,
    pub flagged: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryScan {
    pub rows: Vec<BoundaryScanRow>,
    /// Hypothesis violations detected on the potentials (the scan still runs).
    pub warnings: Vec<String>,
    pub tolerance: f64,
}

/// Relative threshold for flagging a boundary operator as singular.
pub const BOUNDARY_RTOL: f64 = 1e-8;

/// Minimum singular values of `Xi(tau)`, `S(tau)` and `1/2 + K(tau)` over a `tau` grid.
pub fn invertibility_scan_boundary(taus: &[f64], pot: &PotentialPair, spec: &BoundarySpec) -> BoundaryScan {
    let mut warnings = Vec::new();
    if !pot.is_nonnegative() {
        warnings.push("potentials are not pointwise nonnegative".to_string());
    }
    let inside = |p: &[f64]| spec.contains(p[0]);
    let (pv_in, pv0_in) = pot.positive_somewhere(inside);
    if !pv0_in {
        warnings.push("V0 is not positive anywhere on the arc".to_string());
    }
    if !pv_in {
        warnings.push("V is not positive definite anywhere on the arc".to_string());
    }
    let outside = |p: &[f64]| !spec.contains(p[0]);
    let (pv_out, _) = pot.positive_somewhere(outside);
    if !pv_out {
        warnings.push("V is not positive definite anywhere off the arc".to_string());
    }
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let xi = assemble_xi_hat(tau, &pot.grid, pot).map(|m| kernel_report(tau, &m.matrix));
            let min_xi = xi.as_ref().map(|r| r.min_sigma).unwrap_or(0.0);
            let xi_flag = xi.as_ref().map(|r| r.kernel_dim > 0).unwrap_or(true);
            match boundary_operators(tau, spec, pot) {
                Ok(f) => {
                    let ss = f.s_hat.singular_values();
                    let kk = (&f.k_hat + Cmat::identity(4, 4) * c(0.5)).singular_values();
                    let flag = xi_flag || ss.min() < BOUNDARY_RTOL * ss.max() || kk.min() < BOUNDARY_RTOL * kk.max();
                    BoundaryScanRow { tau, min_sigma_xi: min_xi, min_sigma_s: ss.min(), min_sigma_half_plus_k: kk.min(), flagged: flag, note: None }
                }
                Err(e) => BoundaryScanRow {
                    tau,
                    min_sigma_xi: min_xi,
                    min_sigma_s: 0.0,
                    min_sigma_half_plus_k: 0.0,
                    flagged: true,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect();
    BoundaryScan { rows, warnings, tolerance: BOUNDARY_RTOL }
}

/// Grid-independent check helper: the constant reference potentials in use at each boundary point.
pub fn reference_potentials(spec: &BoundarySpec, pot: &PotentialPair) -> Vec<(Cmat, f64)> {
    spec.points().iter().map(|&a| pot.constant_values().unwrap_or_else(|| potentials_at(pot, a))).collect()
}
