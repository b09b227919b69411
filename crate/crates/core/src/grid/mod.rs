//! Structured grids, field storage and quadrature.
//!
//! The disk is discretised in polar coordinates so that circle integrals
//! (boundary mass `H`) and ball integrals (energy `E`) need no clipping.
//! Every reduction runs in a fixed order, so results do not depend on the
//! number of worker threads.

mod field;
mod polar;
mod sphere;

pub use field::{fmt_float, read_field_csv, sample_rescaled, write_field_csv, MultiField};
pub use polar::{
    apply_stiffness, dirichlet_integral, dirichlet_integral_cumulative, gradient_sq,
    integrate_circle, integrate_disk, interpolate, laplacian, PolarGrid2D,
};
pub use sphere::SphereGrid;
