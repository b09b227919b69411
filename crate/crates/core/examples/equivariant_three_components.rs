//! Three components on three cones of opening 2π/3 (degree 3/2 data). The
//! initial field is projected onto fields invariant under the rotation by
//! 2π/3 combined with a cyclic shift of components, and under conjugation
//! combined with index reversal. The solve keeps that symmetry.
//!
//! Run with `cargo run --release --example equivariant_three_components`.

use seglab::almgren::{frequency_trace, growth_rate, log_radii};
use seglab::cli::{run_solve_experiment, symmetry_defect, GridConfig, SolveExperiment};
use seglab::cones::{ConeProfile, HalfInt};
use seglab::elliptic::{BoundarySpec, SolveConfig};

fn main() -> seglab::Result<()> {
    let d = HalfInt::from_twice(3)?;
    let exp = SolveExperiment {
        grid: GridConfig { n_r: 64, n_theta: 192, r_max: 1.0 },
        k: 3,
        boundary: BoundarySpec::profile(ConeProfile::one_per_cone(d, 0.0), 1000.0),
        solve: SolveConfig::continuation(50.0),
        theorem_b: true,
        bump: None,
    };
    let s = run_solve_experiment(&exp, 0)?;
    println!("converged {} in {} iterations", s.report.converged, s.report.iterations);
    println!("relative distance to the symmetric fields {:.1e}", symmetry_defect(&s.field, d)?);

    let trace = frequency_trace(&s.field, 50.0, &log_radii(0.05, 1.0, 8))?;
    println!("growth rate {:.3} (degree {d})", growth_rate(&trace)?.d_hat);
    let flat: Vec<f64> = trace
        .radii
        .iter()
        .zip(&trace.h)
        .filter(|(r, _)| (0.3..=0.7).contains(*r))
        .map(|(r, h)| h / r.powf(2.0 * d.value()))
        .collect();
    let (lo, hi) = flat.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    println!("H(r)/r^3 on [0.3, 0.7] between {lo:.4} and {hi:.4}");
    Ok(())
}
