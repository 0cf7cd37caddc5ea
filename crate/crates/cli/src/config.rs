//! JSON run configuration. Every field has a default, unknown fields are rejected.

use std::f64::consts::PI;

use cylstokes::bvp::{ArcField, AxialWindow, BoundaryData, Method, NsOptions, SolverOptions};
use cylstokes::cheb::ChebGrid;
use cylstokes::layer::BoundarySpec;
use cylstokes::spectral::{PeriodicGrid, PotentialPair};
use cylstokes::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; when present it must name the subcommand being run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub seed: u64,
    pub grid: GridConfig,
    pub window: WindowConfig,
    pub arc: ArcConfig,
    pub potentials: PotentialConfig,
    pub data: DataConfig,
    pub method: Method,
    pub m: usize,
    pub tolerances: Tolerances,
    pub fourier: FourierConfig,
    pub symbols: SymbolConfig,
    pub green: GreenConfig,
    pub jumps: JumpConfig,
    pub scan: ScanConfig,
    pub dirichlet: DirichletConfig,
    pub ns: NsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 20240601,
            grid: GridConfig::default(),
            window: WindowConfig::default(),
            arc: ArcConfig::default(),
            potentials: PotentialConfig::default(),
            data: DataConfig::default(),
            method: Method::Double,
            m: 1,
            tolerances: Tolerances::default(),
            fourier: FourierConfig::default(),
            symbols: SymbolConfig::default(),
            green: GreenConfig::default(),
            jumps: JumpConfig::default(),
            scan: ScanConfig::default(),
            dirichlet: DirichletConfig::default(),
            ns: NsConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub d: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 64, l: 2.0 * PI, d: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(rename = "T")]
    pub t: f64,
    pub n_axial: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { t: 16.0, n_axial: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArcConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ArcConfig {
    fn default() -> Self {
        Self { alpha: 0.0, beta: PI }
    }
}

/// A constant or one sample per cross-section node; `V` acts as a multiple of the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Potential {
    Const(f64),
    Samples(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(rename = "V")]
    pub v: Potential,
    #[serde(rename = "V0")]
    pub v0: Potential,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { v: Potential::Const(1.0), v0: Potential::Const(1.0) }
    }
}

/// Boundary data `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryExpr {
    Zero,
    /// `vectors[b] * exp(-(t - center)^2 / (2 width^2))` at boundary point `b`.
    Gaussian { vectors: [[f64; 2]; 2], center: f64, width: f64 },
}

/// Source terms on `Omega`: `amplitude * sin(pi (x - alpha) / (beta - alpha)) * exp(-(t - center)^2 / (2 width^2))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceExpr {
    Zero,
    SineGaussian { amplitude: Vec<f64>, center: f64, width: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub f: BoundaryExpr,
    pub h: SourceExpr,
    pub r: SourceExpr,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            f: BoundaryExpr::Gaussian { vectors: [[1.0, 0.5], [-0.3, 0.8]], center: 0.0, width: 1.0 },
            h: SourceExpr::SineGaussian { amplitude: vec![1.0, 0.5], center: 0.0, width: 1.0 },
            r: SourceExpr::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub adn_inverse: f64,
    pub residue: f64,
    pub pv_limit: f64,
    pub jump_functional: f64,
    pub laplace_double_layer: f64,
    pub boundary_symbol: f64,
    pub kernel_gap: f64,
    pub green_identity: f64,
    pub half_jump: f64,
    pub single_layer_jump: f64,
    pub operator_identity: f64,
    pub conormal_no_jump: f64,
    pub route_agreement: f64,
    pub residual: f64,
    pub boundary_mismatch: f64,
    pub ns_residual: f64,
    pub ns_ratio: f64,
    pub ns_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            adn_inverse: 1e-12,
            residue: 1e-8,
            pv_limit: 1e-3,
            jump_functional: 1e-3,
            laplace_double_layer: 1e-6,
            boundary_symbol: 1e-8,
            kernel_gap: 1e4,
            green_identity: 1e-6,
            half_jump: 1e-3,
            single_layer_jump: 1e-5,
            operator_identity: 1e-5,
            conormal_no_jump: 1e-4,
            route_agreement: 1e-5,
            residual: 1e-6,
            boundary_mismatch: 1e-5,
            ns_residual: 1e-8,
            ns_ratio: 0.55,
            ns_iterations: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FourierConfig {
    pub log2_samples: u32,
    pub half_width: f64,
    pub cutoff_radius: f64,
    pub residue_parameters: Vec<f64>,
}

impl Default for FourierConfig {
    fn default() -> Self {
        Self { log2_samples: 20, half_width: 1024.0, cutoff_radius: 1.0, residue_parameters: vec![0.5, 1.0, 2.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolConfig {
    pub v0_values: Vec<f64>,
    pub inverse_samples: usize,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        Self { v0_values: vec![0.0, 1.0, 5.0], inverse_samples: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenConfig {
    pub taus: Vec<f64>,
    pub pairs: usize,
    pub band: i64,
}

impl Default for GreenConfig {
    fn default() -> Self {
        Self { taus: vec![0.0, 1.0, 3.0], pairs: 10, band: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpConfig {
    pub taus: Vec<f64>,
    pub dtn_degree: usize,
}

impl Default for JumpConfig {
    fn default() -> Self {
        Self { taus: vec![0.0, 1.0, 3.0], dtn_degree: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub taus: Vec<f64>,
    pub kernel_grids: Vec<usize>,
    /// Smallest singular value accepted as "bounded below".
    pub sigma_floor: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { taus: (-10..=10).map(f64::from).collect(), kernel_grids: vec![32, 64], sigma_floor: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirichletConfig {
    /// Also run the other two routes and report pairwise agreement.
    pub compare_routes: bool,
    pub solver: SolverOptions,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        Self { compare_routes: true, solver: SolverOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NsConfig {
    /// When set, the data are rescaled so that their norm equals this multiple of `zeta`.
    pub data_scale: Option<f64>,
    pub solution_samples: usize,
    pub product_samples: usize,
    pub options: NsOptions,
}

impl Default for NsConfig {
    fn default() -> Self {
        Self { data_scale: Some(0.9), solution_samples: 20, product_samples: 200, options: NsOptions::default() }
    }
}

/// Invalid configuration; mapped to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("invalid config: {0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid.d != 1 {
            return Err(bad(format!("grid.d = {} is not supported; cross-sections are circles (d = 1)", self.grid.d)));
        }
        if self.grid.n < 8 || self.grid.n % 2 != 0 || !(self.grid.l > 0.0) {
            return Err(bad("grid needs an even N >= 8 and L > 0"));
        }
        if !(self.window.t > 0.0) || self.window.n_axial < 4 || self.window.n_axial % 2 != 0 {
            return Err(bad("window needs T > 0 and an even n_axial >= 4"));
        }
        if !(self.arc.alpha < self.arc.beta) || self.arc.beta - self.arc.alpha >= self.grid.l {
            return Err(bad("arc needs alpha < beta and beta - alpha < L"));
        }
        for (name, p) in [("V", &self.potentials.v), ("V0", &self.potentials.v0)] {
            if let Potential::Samples(s) = p {
                if s.len() != self.grid.n {
                    return Err(bad(format!("potentials.{name} has {} samples, grid has {}", s.len(), self.grid.n)));
                }
            }
        }
        if let BoundaryExpr::Gaussian { width, .. } = self.data.f {
            if !(width > 0.0) {
                return Err(bad("data.f.width must be positive"));
            }
        }
        for (name, s, len) in [("h", &self.data.h, 2), ("r", &self.data.r, 1)] {
            if let SourceExpr::SineGaussian { amplitude, width, .. } = s {
                if amplitude.len() != len || !(*width > 0.0) {
                    return Err(bad(format!("data.{name} needs {len} amplitude(s) and a positive width")));
                }
            }
        }
        if self.m > 4 {
            return Err(bad("m must lie in 0..=4"));
        }
        if self.fourier.log2_samples < 8 || self.fourier.log2_samples > 24 {
            return Err(bad("fourier.log2_samples must lie in 8..=24"));
        }
        if self.green.pairs == 0 || self.symbols.inverse_samples == 0 {
            return Err(bad("sample counts must be positive"));
        }
        if self.jumps.dtn_degree < 8 || self.scan.kernel_grids.iter().any(|&n| n < 4 || n % 2 != 0) {
            return Err(bad("jumps.dtn_degree must be >= 8 and kernel grids even"));
        }
        if self.ns.solution_samples == 0 || self.ns.product_samples == 0 {
            return Err(bad("ns sample counts must be positive"));
        }
        if let Some(s) = self.ns.data_scale {
            if !(s >= 0.0) {
                return Err(bad("ns.data_scale must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn periodic_grid(&self) -> PeriodicGrid {
        PeriodicGrid::new(self.grid.n, self.grid.l, 1).expect("validated grid")
    }

    pub fn boundary_spec(&self) -> Result<BoundarySpec, ConfigError> {
        BoundarySpec::new(self.arc.alpha, self.arc.beta, self.grid.l).map_err(|e| bad(e.to_string()))
    }

    pub fn axial_window(&self) -> AxialWindow {
        AxialWindow::new(self.window.t, self.window.n_axial).expect("validated window")
    }

    pub fn potential_pair(&self) -> PotentialPair {
        let g = self.periodic_grid();
        let sample = |p: &Potential, j: usize| match p {
            Potential::Const(c) => *c,
            Potential::Samples(s) => s[j],
        };
        let v = (0..g.size()).map(|j| DMatrix::from_diagonal_element(2, 2, C64::new(sample(&self.potentials.v, j), 0.0))).collect();
        let v0 = (0..g.size()).map(|j| sample(&self.potentials.v0, j)).collect();
        PotentialPair::from_samples(&g, v, v0).expect("validated samples")
    }

    pub fn boundary_data(&self) -> BoundaryData {
        let w = self.axial_window();
        match self.data.f {
            BoundaryExpr::Zero => BoundaryData::zeros(&w, self.m),
            BoundaryExpr::Gaussian { vectors, center, width } => {
                let v = vectors.map(|r| r.map(|x| C64::new(x, 0.0)));
                BoundaryData::gaussian(&w, self.m, v, center, width)
            }
        }
    }

    /// `(h, r)` stacked as a three-component field on the solver grid, or `None` when both vanish.
    pub fn sources(&self, grid: &ChebGrid) -> Option<ArcField> {
        if self.data.h == SourceExpr::Zero && self.data.r == SourceExpr::Zero {
            return None;
        }
        let w = self.axial_window();
        let (a, b) = (self.arc.alpha, self.arc.beta);
        let eval = |s: &SourceExpr, i: usize, x: f64, t: f64| match s {
            SourceExpr::Zero => 0.0,
            SourceExpr::SineGaussian { amplitude, center, width } => {
                amplitude[i] * (PI * (x - a) / (b - a)).sin() * (-(t - center).powi(2) / (2.0 * width * width)).exp()
            }
        };
        Some(ArcField::from_fn(grid, &w, 3, |x, t| {
            vec![C64::new(eval(&self.data.h, 0, x, t), 0.0), C64::new(eval(&self.data.h, 1, x, t), 0.0), C64::new(eval(&self.data.r, 0, x, t), 0.0)]
        }))
    }
}
