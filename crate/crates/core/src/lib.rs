//! Solver and verifier for the short pulse equation
//! `∂x(∂t u + 3u² ∂x u) = u` on the half-line with a Dirichlet datum at `x = 0`,
//! built on its vanishing-viscosity approximation.

pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod field;
pub mod io;
pub mod nonlocal;
pub mod presets;
pub mod runner;
pub mod scenario;
pub mod scheme;
pub mod tags;
mod tridiag;

pub use error::{Result, SpeError, Violation};
pub use field::{make_uniform_grid, Field, Grid, Norm};
pub use scheme::{BoundaryData, SchemeKind, SolverConfig, State, Trajectory};
