//! Almgren frequency of the homogeneous cone profiles `|r^d sin(dθ)|` split
//! among components. The frequency should be the constant `d` at every radius.
//!
//! Run with `cargo run --release --example frequency_of_cone_profiles`.

use seglab::almgren::{check_doubling, frequency_trace, growth_rate, log_radii};
use seglab::cones::{ConeProfile, HalfInt};
use seglab::PolarGrid2D;

fn main() -> seglab::Result<()> {
    let grid = PolarGrid2D::new(256, 384, 1.0)?;
    let radii = log_radii(0.1, 0.9, 8);
    for twice in [1, 2, 3, 4, 6] {
        let d = HalfInt::from_twice(twice)?;
        let profile = ConeProfile::alternating(d, 0.0);
        let field = profile.to_field(grid, profile.components(), 1.0)?;
        let trace = frequency_trace(&field, 0.0, &radii)?;
        let worst = trace
            .n
            .iter()
            .map(|n| (n - d.value()).abs() / d.value())
            .fold(0.0, f64::max);
        let doubling = check_doubling(&trace, d.value());
        let (lo2, up2) = doubling.worst_for_ratio(2.0);
        let gr = growth_rate(&trace)?;
        println!(
            "d = {d:>3}: N(0.1) = {:.5}, N(0.9) = {:.5}, worst rel. dev {worst:.2e}, \
             d_hat {:.4}, doubling margins (ratio 2) lower {lo2:.2e} upper {up2:.2e}",
            trace.n[0],
            trace.n[trace.n.len() - 1],
            gr.d_hat
        );
    }
    Ok(())
}
