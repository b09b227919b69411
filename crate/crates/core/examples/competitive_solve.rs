//! Dirichlet solve of the two-component system with degree-1 data, then the
//! frequency along the radius and the growth-rate estimate.
//!
//! Run with `cargo run --release --example competitive_solve`.

use seglab::almgren::{check_doubling, frequency_trace, growth_rate, log_radii};
use seglab::cones::{ConeProfile, HalfInt};
use seglab::elliptic::{solve_dirichlet, BoundarySpec, SolveConfig};
use seglab::PolarGrid2D;

fn main() -> seglab::Result<()> {
    let d = HalfInt::from_twice(2)?;
    let grid = PolarGrid2D::new(64, 192, 1.0)?;
    // large amplitude so that the effective competition β A² is strong
    let boundary = BoundarySpec::profile(ConeProfile::alternating(d, 0.0), 1000.0);
    let cfg = SolveConfig::continuation(50.0);
    let (field, report) = solve_dirichlet(grid, 2, &boundary, &cfg)?;
    println!(
        "converged {} after {} iterations, residual {:.2e}",
        report.converged, report.iterations, report.final_residual
    );
    for s in &report.stages {
        println!("  β = {:>4}: {:>3} iterations, ∫u₁²u₂² = {:.3e}", s.beta, s.iterations, s.segregation);
    }

    let trace = frequency_trace(&field, cfg.beta, &log_radii(0.05, 1.0, 4))?;
    for (r, n) in trace.radii.iter().zip(&trace.n) {
        println!("  N({r:.3}) = {n:.4}");
    }
    let worst = trace.violations().into_iter().fold(0.0, f64::max);
    let (lo, up) = check_doubling(&trace, d.value()).worst_for_ratio(2.0);
    println!("largest decrease of N {worst:.1e}; ratio-2 doubling margins {lo:.3} / {up:.3}");
    println!("growth rate {:.3}", growth_rate(&trace)?.d_hat);
    Ok(())
}
