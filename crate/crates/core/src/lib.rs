//! Construction and three-dimensional stability of Burgers vortices.
//!
//! The crate builds stationary vortices of the strained Navier-Stokes
//! vorticity equation by Picard iteration, provides the exact
//! Fokker-Planck propagators and Biot-Savart laws that drive them, and
//! evolves three-dimensional perturbations to measure convergence back
//! to a (shifted) vortex.
//!
//! Everything works in the nondimensional frame in which the strain rate
//! and viscosity are one, so the axisymmetric vortex with circulation
//! `rho` has vorticity `rho * G_0` with `G_0` a fixed Gaussian profile.
//!
//! Organization:
//!
//! - [`grid`], [`field`]: truncated cell-centered grids and the weighted
//!   norms (`L²(m)`, `Lᵖ(m)`, `X²(m)`) used throughout.
//! - [`semigroup`]: exact kernels of the 1D/2D/3D drift-diffusion
//!   semigroups, their divergence-form variants, and the Laplace-formula
//!   resolvent.
//! - [`biot_savart`]: velocity reconstruction from vorticity (2D and 3D
//!   free-space laws, modulated-vortex velocity).
//! - [`vortex`]: the fixed-point construction of non-axisymmetric
//!   vortices and their circulation derivatives.
//! - [`axial`]: the scalar axial mode, its closed-form evolution, a
//!   finite-difference cross-check, and the limiting circulation shift.
//! - [`evolution`]: the Duhamel time stepper for 3D perturbations and
//!   its diagnostics.
//! - [`snapshot`]: on-disk field format (JSON header + flat binary).
//! - [`cli`]: configuration, run orchestration and the command-line
//!   drivers used by the `burgers-vortex` binary.
//!
//! Each major capability also has a runnable demo under `examples/`.

pub mod axial;
pub mod biot_savart;
pub mod cli;
mod conv;
pub mod error;
pub mod evolution;
mod fd;
pub mod field;
pub mod grid;
pub mod semigroup;
pub mod snapshot;
pub mod verify;
pub mod vortex;

pub use error::{Error, Result};
pub use field::{weight_b, Field2D, SlicedField3D, WeightParams};
pub use grid::{Axis1D, Grid2D, Grid3D};
