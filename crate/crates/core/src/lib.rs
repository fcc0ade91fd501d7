//! Generalized concurrence of pure continuous-variable states.
//!
//! States are either Gaussian wavefunctions described by a complex symmetric
//! precision matrix, or wavefunctions sampled on a product quadrature grid.
//! For a bipartition `M | M̄` of the degrees of freedom the squared
//! concurrence `E²_M = 2[1 - Tr ρ_M²]` is computed by several independent
//! routes (wedge integral, overlap kernel, reduced purity, the doubled-space
//! permutation `Λ_m`, Hilbert–Schmidt distance of `ρ̃` from its partial
//! transpose and the fourth power of `ρ_PT`) which must all agree on the
//! same discrete data.
//!
//! Modules map onto the pieces of that pipeline:
//!
//! - [`state`]: grids, Gaussian states, bipartitions and their index layouts.
//! - [`quadrature`]: midpoint and Gauss–Hermite product rules.
//! - [`wedge`]: wedge products of sampled functions and the Lagrange identity.
//! - [`concurrence`]: routes A, B and Λ, the `(f, p, q)` measure family and
//!   separability certificates.
//! - [`gaussian`]: closed forms for two-mode Gaussians and the precision
//!   matrix separability criterion.
//! - [`transpose`]: `ρ̃`, `ρ_PT` and friends as discrete operators.
//! - [`wigner`]: Wigner functions of Gaussian and gridded states.
//! - [`spectral`]: reduced density matrices, purity and entropy.
//! - [`verify`]: the aggregated identity checks behind `cvconc verify`.
//! - [`io`]: JSON state files and the sweep CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concurrence;
pub mod corpus;
pub mod error;
pub mod gaussian;
pub mod io;
mod linalg;
pub mod quadrature;
pub mod spectral;
pub mod state;
pub mod transpose;
pub mod verify;
pub mod wedge;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
