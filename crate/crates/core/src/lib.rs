//! Overlapping Schwarz preconditioners for the P1 finite-element Helmholtz equation.
//!
//! The crate assembles `-Δu - (k² + iε)u = f` with an impedance condition on the
//! boundary of the unit square or cube, and solves the pure (ε = 0) system with
//! right-preconditioned GMRES. Preconditioners are built from an absorptive
//! problem (ε_prec > 0):
//!
//! - one-level ORAS: `Σ_j R_jᵀ D_j A_j⁻¹ R_j` with local impedance solves,
//! - two-level additive or hybrid (balancing) variants with either a nested
//!   coarse grid or a spectral Dirichlet-to-Neumann coarse space.
//!
//! [`solver::solve`] ties everything together; [`harness`] drives parameter sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod decomposition;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod preconditioner;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
