//! Numerical laboratory for the damped nonlinear wave equation
//! u_tt + h(t) g(u_t) - laplacian(u) = f(u)
//! on finite-difference meshes: time integration, damping certification,
//! equilibrium solving, Lojasiewicz-exponent probing, and decay-rate
//! analysis.

pub mod analysis;
pub mod damping;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod fitutil;
pub mod galerkin;
pub mod io;
pub mod mesh;
pub mod nonlinearity;

pub use error::{Error, Result};
