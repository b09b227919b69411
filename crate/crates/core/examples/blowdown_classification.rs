//! Rescale a degree-2 solution to the unit disk at several radii and fit
//! each window against the segregated cone profile.
//!
//! Run with `cargo run --release --example blowdown_classification`.

use seglab::blowdown::{blowdown_family, classify_family, vanishing_diagnostic};
use seglab::cones::{ConeProfile, HalfInt};
use seglab::elliptic::{solve_dirichlet, BoundarySpec, SolveConfig};
use seglab::PolarGrid2D;

fn main() -> seglab::Result<()> {
    let d = HalfInt::from_twice(4)?;
    let grid = PolarGrid2D::new(64, 192, 1.0)?;
    let boundary = BoundarySpec::profile(ConeProfile::alternating(d, 0.3), 1000.0);
    let beta = 50.0;
    let (field, _) = solve_dirichlet(grid, 2, &boundary, &SolveConfig::continuation(beta))?;

    let target = PolarGrid2D::new(48, 192, 1.0)?;
    let family = blowdown_family(&field, &[0.25, 0.5, 1.0], &target, beta)?;
    let fits = classify_family(&family, d)?;
    for (m, fit) in family.members.iter().zip(&fits) {
        println!(
            "R = {:.2}: residual {:.3}, θ₀ = {:.3}, cones → components {:?}, scaled segregation {:.2e}",
            m.radius, fit.residual, fit.theta0, fit.assignment, fit.segregation
        );
    }
    let v = vanishing_diagnostic(&family.fields())?;
    println!("smallest unit-circle masses {:?}", v.min_mass);
    Ok(())
}
