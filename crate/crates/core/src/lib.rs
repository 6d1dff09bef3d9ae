//! Numerical laboratory for the spectral density of products of spectral
//! projections of a free and a perturbed one-dimensional Schrödinger operator.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense real-symmetric spectral core (eigendecomposition,
//!   spectral projections, functional calculus, Schatten norms).
//! - [`quadrature`]: adaptive Gauss–Kronrod and Gauss–Legendre rules.
//! - [`hankel`]: the model Hankel operator `Γ_ε`, the Carleman symbol
//!   `π / cosh(πξ)`, the Laplace matrix and Schatten bound checks.
//! - [`schrodinger`]: discretised `H₀ = -d²/dx²`, `H = H₀ + V` and the
//!   projection products built from their spectra.
//! - [`scattering`]: the 2×2 scattering matrix, eigenphases, the limiting
//!   density and every predicted asymptotic constant.
//! - [`experiments`]: end-to-end sweeps and verification reports.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod hankel;
pub mod linalg;
pub mod quadrature;
pub mod scattering;
pub mod schrodinger;

pub use error::{LabError, Result};
