//! Generalized Stokes operator `Xi = [[2 Def* Def + V, grad], [grad*, -V0]]` on flat
//! product cylinders: symbol calculus, indicial families, layer potentials and
//! Dirichlet / Navier-Stokes solvers.

pub mod bvp;
pub mod cheb;
pub mod cylinder;
pub mod error;
pub mod fourier_jump;
pub mod layer;
pub mod quad;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
