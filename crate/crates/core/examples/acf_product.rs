//! Product functional of two disjointly supported components. With the
//! exponent q below 2 the product is non-decreasing for r > 1.
//!
//! Run with `cargo run --release --example acf_product`.

use seglab::almgren::{acf_diagnostics, log_radii};
use seglab::cones::{ConeProfile, HalfInt};
use seglab::PolarGrid2D;

fn main() -> seglab::Result<()> {
    let grid = PolarGrid2D::new(128, 256, 4.0)?;
    let p = ConeProfile::alternating(HalfInt::from_twice(2)?, 0.0);
    let field = p.to_field(grid, 2, 1.0)?;
    let radii = log_radii(1.0, 3.6, 4);
    for q in [1.5, 1.9, 2.5] {
        let acf = acf_diagnostics(&field, 0.0, &[0, 1], q, &radii, 1e-3)?;
        println!(
            "q = {q}: product from {:.4e} to {:.4e}, worst drop {:.2e}, monotone from {:?}",
            acf.product[0],
            acf.product[acf.product.len() - 1],
            acf.worst_drop_in(1.0, 3.6),
            acf.monotone_from
        );
    }
    Ok(())
}
