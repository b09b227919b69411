//! The one-dimensional two-component profile by shooting, its planar
//! extension (growth rate one) and the radial exponential decay experiment.
//!
//! Run with `cargo run --release --example one_dimensional_profile`.

use seglab::almgren::{frequency_trace, growth_rate, log_radii};
use seglab::profiles1d::{decay_fit, find_profile};
use seglab::PolarGrid2D;

fn main() -> seglab::Result<()> {
    let t = find_profile(1.0, 40.0, 1e-6)?;
    println!(
        "u'(0) = {:.9}, asymptote u ≈ {:.6} x + {:.6}, symmetry defect {:.1e}",
        t.m,
        t.b,
        t.intercept,
        t.symmetry_defect.unwrap_or(f64::NAN)
    );
    for x in [-4.0, -1.0, 0.0, 1.0, 4.0] {
        println!("  x = {x:>4}: u = {:.6}, v = {:.3e}", t.value_at(0, x), t.value_at(1, x));
    }
    let field = t.to_plane_field(PolarGrid2D::new(128, 192, 40.0)?)?;
    let trace = frequency_trace(&field, 1.0, &log_radii(2.0, 40.0, 8))?;
    println!("planar extension growth rate {:.3}", growth_rate(&trace)?.d_hat);

    for n in [1, 2, 3] {
        let fit = decay_fit(&[1.0, 4.0, 9.0, 16.0], 1.0, 5.0, n)?;
        println!("N = {n}: log sup v ≈ {:.3} {:+.4} √K (slope error {:.2}%)", fit.intercept, fit.slope, 100.0 * fit.slope_error);
    }
    Ok(())
}
