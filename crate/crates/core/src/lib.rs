//! Numerical laboratory for the strongly competing elliptic system
//!
//! ```text
//! -Δu_i = -β Σ_{j≠i} u_j² u_i,    u_i ≥ 0,
//! ```
//!
//! and for the segregated limit profiles it produces. The crate covers:
//!
//! - [`grid`]: polar disk grids, sphere grids, quadrature and field snapshots;
//! - [`elliptic`]: Dirichlet solves of the competitive system by projected
//!   block descent with β continuation, and symmetry projection;
//! - [`almgren`]: boundary mass `H`, energy `E`, frequency `N = E/H`,
//!   doubling checks, growth-rate estimates and Alt–Caffarelli–Friedman
//!   type product functionals;
//! - [`blowdown`]: rescaled families and classification of limits against
//!   homogeneous cone profiles `|r^d sin(dθ)|`;
//! - [`spectral`]: first Dirichlet eigenvalues of arcs, lunes and masked
//!   regions of the sphere, optimal partition values and the `γ` map;
//! - [`profiles1d`]: the one-dimensional two-component profile by shooting
//!   and the exponential decay experiment;
//! - [`cli`]: JSON-configured experiments and the verification report.
//!
//! Each capability has a runnable program under `examples/`.

pub mod almgren;
pub mod blowdown;
pub mod cli;
pub mod cones;
pub mod elliptic;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod profiles1d;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{MultiField, PolarGrid2D, SphereGrid};
