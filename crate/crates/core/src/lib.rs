//! First-order Gaussian beam superpositions for the constant-speed wave equation.
//!
//! Modules:
//! - [`analytic`]: worked examples and closed-form oracles.
//! - [`beam`]: rays, actions, complex Hessians and single-beam evaluation.
//! - [`quadrature`]: composite Gauss-Legendre rules.
//! - [`superposition`]: phase-space integration of beam families.
//! - [`spectral`]: exact-in-time Fourier reference solver on a periodic box.
//! - [`metrics`]: norms, relative errors, convergence orders and rate fits.
//! - [`experiment`]: configured convergence studies, presets and self-checks.

pub mod analytic;
pub mod beam;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod quadrature;
pub mod spectral;
pub mod superposition;

pub use error::{Error, Result};
