//! Axisymmetric Navier-Stokes-Boussinesq laboratory.
//!
//! Evolves the swirl-free axisymmetric Boussinesq system in the
//! vorticity variables (zeta = omega_theta / r, rho) on a cell-centered
//! meridian grid, and verifies the operator identities and a priori
//! estimates that make the system globally well posed: the singular
//! elliptic operator L = (Delta + (2/r) d_r)^{-1} (d_r / r), the
//! diagonalizing unknowns Gamma_kappa and Gamma_1, Littlewood-Paley
//! block estimates, and the energy / maximum-principle envelopes.

pub mod error;
pub mod grid;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod coupling;
pub mod evolve;
pub mod presets;
pub mod lpbesov;
pub mod monitor;
pub mod singell;
pub mod spectral;
pub mod solver;
pub mod diffops;

pub use error::{Error, Result};
