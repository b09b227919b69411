//! First eigenvalues of lunes on the sphere, the Y-partition value and the
//! circle partition sequence `k²/4`.
//!
//! Run with `cargo run --release --example sphere_partitions`.

use std::f64::consts::PI;
use std::time::Instant;

use seglab::spectral::{
    evaluate_partition, gamma, lambda1_lune, lambda1_masked, lune_mask, optimize_arcs, Partition,
    SphereDomain,
};
use seglab::SphereGrid;

fn main() -> seglab::Result<()> {
    // n_lam divisible by 3 so the 2π/3 lune edges fall on grid longitudes
    let grid = SphereGrid::new(128, 384)?;
    println!("{:>10} {:>12} {:>12} {:>9} {:>8}", "alpha", "masked", "exact", "rel.err", "secs");
    for (name, alpha) in [("π", PI), ("2π/3", 2.0 * PI / 3.0), ("2π", 2.0 * PI)] {
        let t = Instant::now();
        let mask = lune_mask(&grid, 0.0, alpha)?;
        let lam = lambda1_masked(&grid, &mask)?;
        let exact = lambda1_lune(alpha)?;
        println!(
            "{name:>10} {lam:>12.6} {exact:>12.6} {:>9.2e} {:>8.2}",
            (lam - exact) / exact,
            t.elapsed().as_secs_f64()
        );
    }

    let y = Partition::Sphere(vec![SphereDomain::Lune { alpha: 2.0 * PI / 3.0 }; 3]);
    let r = evaluate_partition(&y)?;
    println!(
        "Y-partition: value {} beta {} gamma {}",
        r.partition_value, r.beta_value, r.gamma_of_value
    );
    println!("gamma(2, 3) = {}", gamma(2.0, 3)?);

    for k in 2..=6 {
        let (arcs, value) = optimize_arcs(k, 8, 42)?;
        let lengths: Vec<String> = arcs.lengths().iter().map(|l| format!("{l:.6}")).collect();
        println!("k = {k}: L_k(S¹) ≈ {value:.10} (k²/4 = {}), arcs [{}]", (k * k) as f64 / 4.0, lengths.join(", "));
    }
    Ok(())
}
