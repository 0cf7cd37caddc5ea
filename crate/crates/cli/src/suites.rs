//! Verification suites, scans and solver runs producing report rows.

use std::path::Path;

use cylstokes::bvp::{
    estimate_constants, l2_norm_arc, solve_navier_stokes, ArcField, DirichletSolver, Method, NsOptions, SolveReport,
};
use cylstokes::cylinder::{assemble_xi_closed_torus, assemble_xi_hat, green_identity_check, invertibility_scan, kernel_report, Arc};
use cylstokes::fourier_jump::{jump_functional, pv_inverse_ft, residue_integrals, JumpOptions, LineSamples};
use cylstokes::layer::{boundary_operators, dtn_matrix, invertibility_scan_boundary, operator_identity_check};
use cylstokes::spectral::{PeriodicGrid, PotentialPair, ScalarField, StateField, VectorField};
use cylstokes::symbols::{
    boundary_symbol_a0, conormal_single_layer, double_layer_velocity, laplace_double_layer, single_layer_pressure,
    single_layer_velocity, stokes_boundary_symbols, stokes_symbol, stokes_symbol_inverse,
};
use cylstokes::{Error, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::report::{write_rows, Row};

type Cmat = DMatrix<C64>;

pub mod anchor {
    pub const ADN: &str = "which is invertible with inverse";
    pub const RESIDUE: &str = "by using the Residue Theorem";
    pub const PV: &str = "F^-1[(1 - chi0) pv 1/x](0+-) = +-i/2";
    pub const JUMP: &str = "jump-values of certain Fourier transforms";
    pub const LAPLACE: &str = "Laplacian double layer: a0 = 0, one-sided limits +-1/2";
    pub const SELF_ADJOINT: &str = "elliptic and have self-adjoint principal symbols";
    pub const PRESSURE_JUMP: &str = "pressure jump -+(g/2) nu";
    pub const JC: &str = "Consequently, JC = -i";
    pub const KERNEL: &str = "kernel of Xi(0) on the circle with V = V0 = 0";
    pub const TORUS: &str = "closed-torus kernel: four potential cases";
    pub const GREEN: &str = "(Xi U, W) = B(U, W) + (bop U, w)'";
    pub const JUMPS: &str = "jump relations of the indicial layer potentials";
    pub const EQUALITY: &str = "We have the equality";
    pub const NO_JUMP: &str = "there is no jump across Gamma";
    pub const INVERTIBLE: &str = "Xi(tau), S(tau), 1/2 + K(tau) invertible for V, V0 positive";
    pub const UNIQUE: &str = "has a unique solution";
    pub const NON_HOMOGENEOUS: &str = "non-homogeneous Dirichlet problem";
    pub const ZETA: &str = "zeta := 3/(16 C Cm^2)";
    pub const PICARD: &str = "The Banach-Picard Fixed Point Theorem";
    pub const APRIORI: &str = "||u|| + ||p|| <= (4/3) Cm ||data||";
}

/// Failure that is not a failed check.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Rows plus free-form diagnostics.
pub struct SuiteOutput {
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl From<Vec<Row>> for SuiteOutput {
    fn from(rows: Vec<Row>) -> Self {
        Self { rows, notes: Vec::new() }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Library errors caused by the configuration rather than by a failed check.
fn config_error(e: &Error) -> bool {
    matches!(e, Error::InvalidGrid(_) | Error::InvalidArgument(_) | Error::Hypothesis(_) | Error::Window(_))
}

pub fn verify_fourier(cfg: &RunConfig) -> SuiteOutput {
    let tol = &cfg.tolerances;
    let mut rows = Vec::new();
    for &a in &cfg.fourier.residue_parameters {
        match residue_integrals(a) {
            Ok(vals) => {
                for (k, (num, exact)) in vals.into_iter().enumerate() {
                    rows.push(Row::close(format!("residue_integral_{}_a={a}", k + 1), anchor::RESIDUE, num, exact, tol.residue));
                }
            }
            Err(e) => rows.push(Row::failed(format!("residue_integrals_a={a}"), anchor::RESIDUE, &e.to_string())),
        }
    }
    let n = 1usize << cfg.fourier.log2_samples;
    let hw = cfg.fourier.half_width;
    match pv_inverse_ft(cfg.fourier.cutoff_radius, n, hw) {
        Ok(r) => {
            rows.push(Row::at_most("pv_transform_right_limit", anchor::PV, (r.right_limit - c(0.0, 0.5)).norm(), tol.pv_limit));
            rows.push(Row::at_most("pv_transform_left_limit", anchor::PV, (r.left_limit - c(0.0, -0.5)).norm(), tol.pv_limit));
        }
        Err(e) => rows.push(Row::failed("pv_transform", anchor::PV, &e.to_string())),
    }
    // Odd symbols with tails L / x; the jump of the inverse transform at 0 is i L.
    let symbols: [(&str, f64, fn(f64) -> f64); 3] = [
        ("x/(1+x^2)", 1.0, |x| x / (1.0 + x * x)),
        ("3x/(1+x^2)+exp(-x^2)", 3.0, |x| 3.0 * x / (1.0 + x * x) + (-x * x).exp()),
        ("2x/(4+x^2)", 2.0, |x| 2.0 * x / (4.0 + x * x)),
    ];
    for (name, l, f) in symbols {
        let u = LineSamples::from_fn(|x| c(f(x), 0.0), n, hw);
        match jump_functional(&u, None, JumpOptions::default()) {
            Ok(r) => rows.push(Row::at_most(format!("jump_functional_{name}"), anchor::JUMP, (r.jump - c(0.0, l)).norm(), tol.jump_functional)),
            Err(e) => rows.push(Row::failed(format!("jump_functional_{name}"), anchor::JUMP, &e.to_string())),
        }
    }
    rows.into()
}

fn symbol_cases() -> [(Vec<f64>, Vec<f64>); 2] {
    [(vec![0.0, 1.0], vec![1.0, 0.0]), (vec![0.0, -2.5], vec![-1.0, 0.0])]
}

pub fn verify_symbols(cfg: &RunConfig) -> SuiteOutput {
    let tol = &cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();

    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < cfg.symbols.inverse_samples {
        let xi = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let v0 = rng.random_range(0.0..10.0);
        if xi[0] * xi[0] + xi[1] * xi[1] < 1e-4 {
            continue;
        }
        count += 1;
        match (stokes_symbol(&xi, v0), stokes_symbol_inverse(&xi, v0)) {
            (Ok(a), Ok(b)) => worst = worst.max((a * b - Cmat::identity(3, 3)).norm()),
            _ => worst = f64::INFINITY,
        }
    }
    rows.push(Row::at_most(format!("adn_symbol_inverse_max_over_{count}"), anchor::ADN, worst, tol.adn_inverse));

    let nu = vec![1.0, 0.0];
    match boundary_symbol_a0(&laplace_double_layer(nu.clone()), &[0.0, 0.0], &[0.0, 1.3], &nu) {
        Ok(jd) => {
            let t = tol.laplace_double_layer;
            rows.push(Row::close("laplace_double_layer_a0", anchor::LAPLACE, jd.a0[(0, 0)].re, 0.0, t));
            rows.push(Row::close("laplace_double_layer_plus", anchor::LAPLACE, jd.a0_plus[(0, 0)].re, 0.5, t));
            rows.push(Row::close("laplace_double_layer_minus", anchor::LAPLACE, jd.a0_minus[(0, 0)].re, -0.5, t));
        }
        Err(e) => rows.push(Row::failed("laplace_double_layer", anchor::LAPLACE, &e.to_string())),
    }

    let t = tol.boundary_symbol;
    for &v0 in &cfg.symbols.v0_values {
        for (case, (xp, nu)) in symbol_cases().into_iter().enumerate() {
            let tag = format!("v0={v0}_case{case}");
            let run = || -> cylstokes::Result<Vec<Row>> {
                let cf = stokes_boundary_symbols(v0, &xp, &nu)?;
                let dl = boundary_symbol_a0(&double_layer_velocity(v0, nu.clone()), &[], &xp, &nu)?;
                let sl = boundary_symbol_a0(&single_layer_velocity(v0), &[], &xp, &nu)?;
                let co = boundary_symbol_a0(&conormal_single_layer(v0, nu.clone()), &[], &xp, &nu)?;
                let pr = boundary_symbol_a0(&single_layer_pressure(v0), &[], &xp, &nu)?;
                let plus = (&pr.a0_plus - (&cf.pressure_jump_plus + &cf.single_layer_pressure)).norm();
                let minus = (&pr.a0_minus - (&cf.pressure_jump_minus + &cf.single_layer_pressure)).norm();
                let n = nu.len();
                Ok(vec![
                    Row::at_most(format!("sigma0_K_{tag}"), anchor::SELF_ADJOINT, (&dl.a0 - &cf.double_layer).norm(), t),
                    Row::at_most(format!("sigma-1_A0_{tag}"), anchor::SELF_ADJOINT, (&sl.a0 - &cf.single_layer_velocity).norm(), t),
                    Row::at_most(format!("sigma0_C0_{tag}"), anchor::SELF_ADJOINT, (&co.a0 - cf.double_layer.adjoint()).norm(), t),
                    Row::at_most(format!("pressure_jump_{tag}"), anchor::PRESSURE_JUMP, plus.max(minus), t),
                    Row::at_most(format!("jc_double_layer_{tag}"), anchor::JC, (&dl.jc - Cmat::identity(n, n) * c(0.0, -1.0)).norm(), t),
                ])
            };
            match run() {
                Ok(r) => rows.extend(r),
                Err(e) => rows.push(Row::failed(format!("boundary_symbols_{tag}"), anchor::SELF_ADJOINT, &e.to_string())),
            }
        }
    }
    rows.into()
}

/// Random band-limited state `(u_x, u_t, p)` on the circle.
pub fn random_state(g: &PeriodicGrid, rng: &mut ChaCha8Rng, band: i64) -> StateField {
    let mut comps = Vec::new();
    for _ in 0..3 {
        let coeffs: Vec<(i64, C64)> = (-band..=band).map(|k| (k, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))).collect();
        comps.push(
            g.axis_nodes()
                .iter()
                .map(|&x| coeffs.iter().map(|(k, a)| a * C64::from_polar(1.0, g.wave_number(*k) * x)).sum())
                .collect::<Vec<C64>>(),
        );
    }
    let p = ScalarField::new(g, comps.pop().expect("three components")).expect("grid size");
    StateField::new(VectorField::new(g, comps).expect("grid size"), p).expect("same grid")
}

pub fn verify_green(cfg: &RunConfig) -> SuiteOutput {
    let g = cfg.periodic_grid();
    let pot = cfg.potential_pair();
    let arc = Arc { alpha: cfg.arc.alpha, beta: cfg.arc.beta };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for &tau in &cfg.green.taus {
        for (label, region) in [("arc", Some(arc)), ("circle", None)] {
            let mut worst: f64 = 0.0;
            let mut err = None;
            for _ in 0..cfg.green.pairs {
                let u = random_state(&g, &mut rng, cfg.green.band);
                let w = random_state(&g, &mut rng, cfg.green.band);
                match green_identity_check(tau, &u, &w, &pot, region) {
                    Ok(r) => worst = worst.max(r.residual),
                    Err(e) => err = Some(e.to_string()),
                }
            }
            let id = format!("green_identity_{label}_tau={tau}");
            rows.push(match err {
                Some(e) => Row::failed(id, anchor::GREEN, &e),
                None => Row::at_most(id, anchor::GREEN, worst, cfg.tolerances.green_identity),
            });
        }
    }
    rows.into()
}

pub fn verify_jumps(cfg: &RunConfig) -> Result<SuiteOutput, RunError> {
    let spec = cfg.boundary_spec()?;
    let pot = cfg.potential_pair();
    let tol = &cfg.tolerances;
    let half = Cmat::identity(4, 4) * c(0.5, 0.0);
    let mut rows = Vec::new();
    for &tau in &cfg.jumps.taus {
        match boundary_operators(tau, &spec, &pot) {
            Ok(f) => {
                rows.push(Row::at_most(format!("double_layer_half_jump_tau={tau}"), anchor::JUMPS, (&f.half_jump_double - &half).norm(), tol.half_jump));
                rows.push(Row::at_most(
                    format!("conormal_single_layer_half_jump_tau={tau}"),
                    anchor::JUMPS,
                    (&f.half_jump_conormal + &half).norm(),
                    tol.half_jump,
                ));
                rows.push(Row::at_most(format!("single_layer_velocity_jump_tau={tau}"), anchor::JUMPS, f.single_layer_jump, tol.single_layer_jump));
                rows.push(Row::at_most(format!("identity_(1/2+K)S=S(1/2+K*)_tau={tau}"), anchor::EQUALITY, operator_identity_check(&f), tol.operator_identity));
                rows.push(Row::at_most(format!("conormal_double_layer_jump_tau={tau}"), anchor::NO_JUMP, f.double_traction_jump, tol.conormal_no_jump));
            }
            Err(e) => rows.push(Row::failed(format!("boundary_operators_tau={tau}"), anchor::JUMPS, &e.to_string())),
        }
        match dtn_matrix(tau, &spec, &pot, cfg.jumps.dtn_degree) {
            Ok(d) => {
                rows.push(Row::at_most(format!("identity_SN=-1/2+K_tau={tau}"), anchor::EQUALITY, d.identity_residual, tol.operator_identity));
                rows.push(Row::at_most(format!("conormal_double_layer_no_jump_dtn_tau={tau}"), anchor::NO_JUMP, d.no_jump_residual, tol.conormal_no_jump));
            }
            Err(e) => rows.push(Row::failed(format!("dtn_tau={tau}"), anchor::EQUALITY, &e.to_string())),
        }
    }
    Ok(rows.into())
}

#[derive(Serialize)]
struct ScanCsvRow {
    potentials: &'static str,
    tau: f64,
    min_sigma_xi: f64,
    min_sigma_s: f64,
    min_sigma_half_plus_k: f64,
    kernel_dim: usize,
    flagged: bool,
}

pub fn scan_invertibility(cfg: &RunConfig, out: &Path) -> Result<SuiteOutput, RunError> {
    let tol = &cfg.tolerances;
    let mut rows = Vec::new();
    for &n in &cfg.scan.kernel_grids {
        let g = PeriodicGrid::new(n, cfg.grid.l, 1).map_err(|e| ConfigError(e.to_string()))?;
        let zero = PotentialPair::constant(&g, 0.0, 0.0);
        match assemble_xi_hat(0.0, &g, &zero) {
            Ok(xi) => {
                let r = kernel_report(0.0, &xi.matrix);
                rows.push(Row::exact(format!("xi_hat_0_kernel_dim_N={n}"), anchor::KERNEL, r.kernel_dim as f64, 3.0));
                rows.push(Row::at_least(format!("xi_hat_0_gap_N={n}"), anchor::KERNEL, r.gap, tol.kernel_gap));
            }
            Err(e) => rows.push(Row::failed(format!("xi_hat_0_N={n}"), anchor::KERNEL, &e.to_string())),
        }
        let cases = [
            ("V=0,V0=0", PotentialPair::constant(&g, 0.0, 0.0), 3.0),
            ("V=0,V0=1", PotentialPair::constant(&g, 0.0, 1.0), 2.0),
            ("V=1+sin,V0=0", PotentialPair::scalar(&g, |p| (1.0 + p[0].sin(), 0.0)), 1.0),
            ("V=1,V0=1", PotentialPair::constant(&g, 1.0, 1.0), 0.0),
        ];
        for (label, pot, dim) in cases {
            match assemble_xi_closed_torus(&pot, n, cfg.grid.l) {
                Ok(s) => {
                    rows.push(Row::exact(format!("torus_kernel_dim_{label}_N={n}"), anchor::TORUS, s.report.kernel_dim as f64, dim));
                    if dim > 0.0 {
                        rows.push(Row::at_least(format!("torus_gap_{label}_N={n}"), anchor::TORUS, s.report.gap, tol.kernel_gap));
                    }
                }
                Err(e) => rows.push(Row::failed(format!("torus_{label}_N={n}"), anchor::TORUS, &e.to_string())),
            }
        }
    }
    let g = cfg.periodic_grid();
    let taus = &cfg.scan.taus;
    let mut csv = Vec::new();
    for (label, pot, control) in [("configured", cfg.potential_pair(), false), ("V=V0=0", PotentialPair::constant(&g, 0.0, 0.0), true)] {
        match invertibility_scan(taus, &pot) {
            Ok(reps) => {
                for r in &reps {
                    csv.push(ScanCsvRow {
                        potentials: label,
                        tau: r.tau,
                        min_sigma_xi: r.min_sigma,
                        min_sigma_s: f64::NAN,
                        min_sigma_half_plus_k: f64::NAN,
                        kernel_dim: r.kernel_dim,
                        flagged: r.kernel_dim > 0,
                    });
                }
                if control {
                    let wrong = reps.iter().filter(|r| (r.kernel_dim > 0) != (r.tau == 0.0)).count();
                    rows.push(Row::exact("negative_control_flags_exactly_tau=0", anchor::INVERTIBLE, wrong as f64, 0.0));
                } else {
                    let floor = reps.iter().map(|r| r.min_sigma).fold(f64::INFINITY, f64::min);
                    rows.push(Row::at_least("xi_hat_min_sigma_over_tau_grid", anchor::INVERTIBLE, floor, cfg.scan.sigma_floor));
                }
            }
            Err(e) => rows.push(Row::failed(format!("scan_{label}"), anchor::INVERTIBLE, &e.to_string())),
        }
    }
    write_rows(&out.join("scan_invertibility_rows.csv"), &csv)?;
    Ok(rows.into())
}

pub fn scan_boundary_invertibility(cfg: &RunConfig, out: &Path, strict: bool) -> Result<SuiteOutput, RunError> {
    let spec = cfg.boundary_spec()?;
    let g = cfg.periodic_grid();
    let taus = &cfg.scan.taus;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut csv = Vec::new();
    for (label, pot, control) in [("configured", cfg.potential_pair(), false), ("V=V0=0", PotentialPair::constant(&g, 0.0, 0.0), true)] {
        let scan = invertibility_scan_boundary(taus, &pot, &spec);
        for r in &scan.rows {
            csv.push(ScanCsvRow {
                potentials: label,
                tau: r.tau,
                min_sigma_xi: r.min_sigma_xi,
                min_sigma_s: r.min_sigma_s,
                min_sigma_half_plus_k: r.min_sigma_half_plus_k,
                kernel_dim: 0,
                flagged: r.flagged,
            });
            if let Some(n) = &r.note {
                notes.push(format!("{label}, tau = {}: {n}", r.tau));
            }
        }
        notes.extend(scan.warnings.iter().map(|w| format!("{label}: {w}")));
        if control {
            let wrong = scan.rows.iter().filter(|r| r.flagged != (r.tau == 0.0)).count();
            rows.push(Row::exact("negative_control_flags_exactly_tau=0", anchor::INVERTIBLE, wrong as f64, 0.0));
        } else {
            let floor = |f: fn(&cylstokes::layer::BoundaryScanRow) -> f64| scan.rows.iter().map(f).fold(f64::INFINITY, f64::min);
            rows.push(Row::at_least("xi_hat_min_sigma", anchor::INVERTIBLE, floor(|r| r.min_sigma_xi), cfg.scan.sigma_floor));
            rows.push(Row::at_least("s_hat_min_sigma", anchor::INVERTIBLE, floor(|r| r.min_sigma_s), cfg.scan.sigma_floor));
            rows.push(Row::at_least("half_plus_k_hat_min_sigma", anchor::INVERTIBLE, floor(|r| r.min_sigma_half_plus_k), cfg.scan.sigma_floor));
            rows.push(Row::exact("configured_flagged_taus", anchor::INVERTIBLE, scan.rows.iter().filter(|r| r.flagged).count() as f64, 0.0));
            if strict {
                rows.push(Row::exact("configured_hypothesis_warnings", anchor::INVERTIBLE, scan.warnings.len() as f64, 0.0));
            }
        }
    }
    write_rows(&out.join("scan_boundary_invertibility_rows.csv"), &csv)?;
    Ok(SuiteOutput { rows, notes })
}

#[derive(Serialize)]
struct FieldCsvRow {
    x: f64,
    t: f64,
    u_x_re: f64,
    u_x_im: f64,
    u_t_re: f64,
    u_t_im: f64,
    p_re: f64,
    p_im: f64,
}

fn write_field(path: &Path, u: &ArcField) -> std::io::Result<()> {
    let t = u.window.nodes();
    let mut rows = Vec::with_capacity(u.grid.len() * t.len());
    for (r, &x) in u.grid.nodes.iter().enumerate() {
        for (col, &tt) in t.iter().enumerate() {
            let v = |k: usize| u.components.get(k).map_or(c(0.0, 0.0), |m| m[(r, col)]);
            rows.push(FieldCsvRow { x, t: tt, u_x_re: v(0).re, u_x_im: v(0).im, u_t_re: v(1).re, u_t_im: v(1).im, p_re: v(2).re, p_im: v(2).im });
        }
    }
    write_rows(path, &rows)
}

fn build_solver(cfg: &RunConfig) -> Result<DirichletSolver, RunError> {
    let spec = cfg.boundary_spec()?;
    DirichletSolver::new(&spec, &cfg.potential_pair(), &cfg.axial_window(), cfg.dirichlet.solver.clone()).map_err(|e| ConfigError(e.to_string()).into())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Single => "single",
        Method::Double => "double",
        Method::Direct => "direct",
    }
}

pub fn solve_dirichlet(cfg: &RunConfig, out: &Path) -> Result<SuiteOutput, RunError> {
    let solver = build_solver(cfg)?;
    let h = cfg.sources(&solver.grid);
    let f = cfg.boundary_data();
    let tol = &cfg.tolerances;
    let anchor = if h.is_some() { anchor::NON_HOMOGENEOUS } else { anchor::UNIQUE };
    let mut methods = vec![cfg.method];
    if cfg.dirichlet.compare_routes {
        methods.extend([Method::Single, Method::Double, Method::Direct].into_iter().filter(|m| *m != cfg.method));
    }
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut solved: Vec<(Method, ArcField, SolveReport)> = Vec::new();
    for m in methods {
        let name = method_name(m);
        match solver.solve(h.as_ref(), &f, m) {
            Ok((u, rep)) => {
                let scale = rep.data_norm.max(1.0);
                rows.push(Row::at_most(format!("{name}_residual"), anchor, rep.residual, tol.residual * scale));
                rows.push(Row::at_most(format!("{name}_scalar_residual"), anchor, rep.scalar_residual, tol.residual * scale));
                rows.push(Row::at_most(format!("{name}_boundary_mismatch"), anchor, rep.boundary_mismatch, tol.boundary_mismatch * scale));
                notes.push(format!("{name}: constant ratio {:.6e}, active modes {}", rep.constant_ratio, rep.active_modes));
                solved.push((m, u, rep));
            }
            Err(e) if config_error(&e) => return Err(ConfigError(e.to_string()).into()),
            Err(e) => rows.push(Row::failed(format!("{name}_solve"), anchor, &e.to_string())),
        }
    }
    for i in 0..solved.len() {
        for j in i + 1..solved.len() {
            let (a, b) = (&solved[i].1, &solved[j].1);
            let rel = l2_norm_arc(&a.sub(b), &[0, 1, 2], true) / l2_norm_arc(b, &[0, 1, 2], true).max(f64::MIN_POSITIVE);
            let id = format!("route_agreement_{}_vs_{}", method_name(solved[i].0), method_name(solved[j].0));
            rows.push(Row::at_most(id, anchor::UNIQUE, rel, tol.route_agreement));
        }
    }
    if let Some((_, u, _)) = solved.first() {
        write_field(&out.join("dirichlet_solution.csv"), u)?;
    }
    let reports: Vec<&SolveReport> = solved.iter().map(|s| &s.2).collect();
    std::fs::write(out.join("dirichlet_report.json"), serde_json::to_string_pretty(&reports).map_err(std::io::Error::other)? + "\n")?;
    Ok(SuiteOutput { rows, notes })
}

pub fn solve_ns(cfg: &RunConfig, out: &Path, strict: bool) -> Result<SuiteOutput, RunError> {
    if cfg.m != 1 {
        return Err(ConfigError(format!("solve ns runs at m = 1, config has m = {}", cfg.m)).into());
    }
    if cfg.data.r != crate::config::SourceExpr::Zero {
        return Err(ConfigError("solve ns takes no scalar source: data.r must be zero".into()).into());
    }
    let solver = build_solver(cfg)?;
    let h = cfg.sources(&solver.grid).unwrap_or_else(|| ArcField::zeros(&solver.grid, &solver.window, 3));
    let f = cfg.boundary_data();
    let constants = match estimate_constants(&solver, 1, cfg.ns.solution_samples, cfg.ns.product_samples, cfg.seed, &[(h.clone(), f.clone())]) {
        Ok(k) => k,
        Err(e) if config_error(&e) => return Err(ConfigError(e.to_string()).into()),
        Err(e) => return Ok(vec![Row::failed("constants", anchor::ZETA, &e.to_string())].into()),
    };
    let mut notes = vec![format!(
        "C = {:.6e}, Cm = {:.6e}, zeta = {:.6e}, eta = {:.6e}",
        constants.c_product, constants.c_solution, constants.zeta, constants.eta
    )];
    let (mut h, mut f) = (h, f);
    if let Some(s) = cfg.ns.data_scale {
        let norm = solver.data_norm(Some(&h), &f);
        if norm > 0.0 {
            let k = s * constants.zeta / norm;
            h = h.scaled(k);
            f = f.scaled(k);
            notes.push(format!("data rescaled by {k:.6e} to {s} zeta"));
        }
    }
    let opts = NsOptions { strict: strict || cfg.ns.options.strict, ..cfg.ns.options.clone() };
    let tol = &cfg.tolerances;
    let (u, rep) = match solve_navier_stokes(&solver, &h.leading(2), &f, &constants, &opts) {
        Ok(x) => x,
        Err(e @ Error::Divergence(_)) => {
            notes.push(format!("diagnostics: {e}"));
            notes.push(format!("data norm {:.6e} vs zeta {:.6e}", solver.data_norm(Some(&h), &f), constants.zeta));
            std::fs::write(out.join("ns_report.json"), serde_json::to_string_pretty(&constants).map_err(std::io::Error::other)? + "\n")?;
            return Ok(SuiteOutput { rows: vec![Row::failed("picard_iteration", anchor::PICARD, &e.to_string())], notes });
        }
        Err(e) if config_error(&e) => return Err(ConfigError(e.to_string()).into()),
        Err(e) => return Ok(SuiteOutput { rows: vec![Row::failed("picard_iteration", anchor::PICARD, &e.to_string())], notes }),
    };
    notes.extend(rep.warnings.iter().cloned());
    let rows = vec![
        Row::at_most("data_norm_vs_zeta", anchor::ZETA, rep.data_norm, constants.zeta),
        Row::exact("converged", anchor::PICARD, f64::from(u8::from(rep.converged)), 1.0),
        Row::at_most("iterations", anchor::PICARD, rep.iterations as f64, tol.ns_iterations as f64),
        Row::at_most("max_contraction_ratio", anchor::PICARD, rep.max_ratio, tol.ns_ratio),
        Row::at_most("ns_velocity_residual", anchor::PICARD, rep.residual, tol.ns_residual),
        Row::at_most("ns_scalar_residual", anchor::PICARD, rep.scalar_residual, tol.ns_residual),
        Row::at_most("max_iterate_norm_vs_eta", anchor::ZETA, rep.max_iterate_norm, constants.eta),
        Row::at_most("apriori_bound", anchor::APRIORI, rep.solution_norm, rep.apriori_bound),
    ];
    write_field(&out.join("ns_solution.csv"), &u)?;
    std::fs::write(out.join("ns_report.json"), serde_json::to_string_pretty(&rep).map_err(std::io::Error::other)? + "\n")?;
    Ok(SuiteOutput { rows, notes })
}
