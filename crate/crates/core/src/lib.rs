//! Two-layer internal capillary-gravity waves.
//!
//! The crate covers the dimensionless parameter plane and its bifurcation
//! curves, the linear dispersion symbol, Dirichlet-Neumann operators for the
//! upper and lower layers (flat multipliers and a finite-difference solver for
//! curved interfaces), solitary-wave profiles, dense spectra of the linearized
//! operators, and the moment-of-instability stability test.
//!
//! Everything lives on a uniform periodic grid that stands in for the real
//! line; zero Fourier modes are excluded wherever an operator is singular.

pub mod dispersion;
pub mod dno;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod params;
pub mod profiles;
pub mod spectra;
pub mod stability;

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use grid::{Grid, GridProfile};
pub use params::{NonDimParams, PhysicalParams};
