//! One-dimensional isentropic compressible Navier-Stokes with
//! density-dependent viscosity `mu = alpha rho^delta`, on data that decays
//! to vacuum at infinity.
//!
//! The crate evolves the primitive system and its `(phi, u, psi)`
//! reformulation on a truncated grid, measures conserved quantities and
//! entropy identities along the way, and checks them with manufactured
//! solutions and refinement ladders.

// `!(x > 0.0)` is how inputs reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod initdata;
pub mod io;
pub mod params;
pub mod reformulate;
pub mod solver;
pub mod state;
pub mod tridiag;
pub mod verification;

pub use error::{GridError, ParamError, SolverError, StateError};
pub use grid::{Field, Grid};
pub use params::{ModelParams, Regime};
pub use state::FluidState;
