//! Numerical laboratory for sparse SYK Hamiltonians.
//!
//! Modules build on each other bottom-up: [`algebra`] (Majorana monomials and
//! dense operators), [`ensembles`] (seeded instance sampling), [`spectral`]
//! (exact top eigenvalues), [`gaussian`] (fermionic Gaussian states),
//! [`ho`] (the two-color variational family), [`lovasz`] (commutation graphs
//! and theta), and [`experiment`] (config-driven runs with manifests).

pub mod algebra;
pub mod cli;
pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod hamiltonian;
pub mod ho;
pub mod io;
pub mod lovasz;
pub mod rng;
pub mod selfcheck;
pub mod spectral;

pub use error::{Error, Result};
