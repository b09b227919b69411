//! Eigenvalues of spherical domains, the `γ` map and optimal partition
//! values.
//!
//! `γ(t) = sqrt(((N−2)/2)² + t) − (N−2)/2` converts a first eigenvalue on
//! `S^{N−1}` into the homogeneity degree of the harmonic extension; its
//! inverse is `d ↦ d(d + N − 2)`.

mod eigen;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::SphereGrid;

pub use eigen::{
    is_connected, lambda1_masked, lambda1_masked_with, lune_mask, read_masks_csv, write_masks_csv,
    EigenOptions, MaskedEigen,
};

/// `γ(t) = sqrt(((N−2)/2)² + t) − (N−2)/2` for `t ≥ 0`.
pub fn gamma(t: f64, n: u32) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("γ needs t ≥ 0, got {t}"));
    }
    if n < 2 {
        return domain("dimension must be at least 2");
    }
    let h = (n as f64 - 2.0) / 2.0;
    // rationalised form t / (sqrt(h² + t) + h) avoids cancellation for small t
    let s = (h * h + t).sqrt();
    Ok(if h > 0.0 { t / (s + h) } else { s })
}

/// `d(d + N − 2)`, the eigenvalue whose `γ` is `d`.
pub fn gamma_inverse(d: f64, n: u32) -> f64 {
    d * (d + n as f64 - 2.0)
}

/// First Dirichlet eigenvalue `(π/ℓ)²` of an arc of length `ℓ`.
pub fn lambda1_arc(length: f64) -> Result<f64> {
    if !(length > 0.0 && length <= 2.0 * PI * (1.0 + 1e-12)) {
        return domain(format!("arc length {length} outside (0, 2π]"));
    }
    Ok((PI / length).powi(2))
}

/// First Dirichlet eigenvalue `ν(ν+1)`, `ν = π/α`, of a lune of angle `α` on `S²`.
pub fn lambda1_lune(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0 * PI * (1.0 + 1e-12)) {
        return domain(format!("lune angle {alpha} outside (0, 2π]"));
    }
    let nu = PI / alpha;
    Ok(nu * (nu + 1.0))
}

/// Disjoint open arcs `(a_i, b_i)` of the unit circle, sorted by start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcPartition {
    arcs: Vec<(f64, f64)>,
}

impl ArcPartition {
    pub fn new(arcs: Vec<(f64, f64)>) -> Result<Self> {
        if arcs.is_empty() {
            return domain("a partition needs at least one arc");
        }
        let tol = 1e-12;
        for (i, &(a, b)) in arcs.iter().enumerate() {
            if !(a >= -tol && b > a && b <= 2.0 * PI + tol) {
                return domain(format!("arc {i} = ({a}, {b}) is not inside [0, 2π]"));
            }
            if i > 0 && a < arcs[i - 1].1 - tol {
                return domain(format!("arcs {} and {i} overlap or are unsorted", i - 1));
            }
        }
        Ok(Self { arcs })
    }

    /// `k` arcs of length `2π/k` starting at 0.
    pub fn equal(k: usize) -> Result<Self> {
        if k == 0 {
            return domain("k must be positive");
        }
        let l = 2.0 * PI / k as f64;
        Self::new((0..k).map(|i| (i as f64 * l, (i + 1) as f64 * l)).collect())
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.arcs.iter().map(|(a, b)| b - a).collect()
    }
}

/// A region of `S²`: a lune given by its angle, or a node mask.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereDomain {
    Lune { alpha: f64 },
    Mask { grid: SphereGrid, mask: Vec<bool> },
}

impl SphereDomain {
    /// Closed form for lunes, inverse power iteration for masks.
    pub fn lambda1(&self) -> Result<f64> {
        match self {
            SphereDomain::Lune { alpha } => lambda1_lune(*alpha),
            SphereDomain::Mask { grid, mask } => lambda1_masked(grid, mask),
        }
    }
}

/// A candidate partition of `S¹` or `S²`.
#[derive(Debug, Clone, PartialEq)]
pub enum Partition {
    Arcs(ArcPartition),
    Sphere(Vec<SphereDomain>),
}

impl Partition {
    /// Dimension `N` of the ambient space (`S^{N−1}`).
    pub fn dimension(&self) -> u32 {
        match self {
            Partition::Arcs(_) => 2,
            Partition::Sphere(_) => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Partition::Arcs(_) => Ok(()),
            Partition::Sphere(parts) => {
                if parts.is_empty() {
                    return domain("a partition needs at least one part");
                }
                let mut lune_total = 0.0;
                let mut union: Option<(SphereGrid, Vec<bool>)> = None;
                for p in parts {
                    match p {
                        SphereDomain::Lune { alpha } => {
                            lambda1_lune(*alpha)?;
                            lune_total += alpha;
                        }
                        SphereDomain::Mask { grid, mask } => {
                            let (g, u) = union
                                .get_or_insert_with(|| (*grid, vec![false; grid.node_count()]));
                            if g != grid || mask.len() != u.len() {
                                return domain("masks live on different sphere grids");
                            }
                            for (a, &b) in u.iter_mut().zip(mask) {
                                if *a && b {
                                    return domain("masks overlap");
                                }
                                *a |= b;
                            }
                        }
                    }
                }
                // lunes are laid side by side around the polar axis
                if lune_total > 2.0 * PI * (1.0 + 1e-12) {
                    return domain(format!("lune angles sum to {lune_total} > 2π"));
                }
                if union.is_some() && lune_total > 0.0 {
                    return domain("mixing lunes and masks is not supported");
                }
                Ok(())
            }
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.validate()?;
        match self {
            Partition::Arcs(a) => a.lengths().into_iter().map(lambda1_arc).collect(),
            Partition::Sphere(parts) => parts.iter().map(SphereDomain::lambda1).collect(),
        }
    }
}

/// `max_i λ₁(ω_i)`, an upper bound for the optimal partition value.
pub fn partition_value(partition: &Partition) -> Result<f64> {
    Ok(partition.eigenvalues()?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `(2/k) Σ_i γ(λ₁(ω_i))` with `γ` taken in dimension `n`.
pub fn beta_value(partition: &Partition, n: u32) -> Result<f64> {
    let ev = partition.eigenvalues()?;
    let k = ev.len() as f64;
    let mut s = 0.0;
    for l in ev {
        s += gamma(l, n)?;
    }
    Ok(2.0 * s / k)
}

/// Per-candidate numbers in the form written by the `partition` command.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionResults {
    pub lambda1_per_part: Vec<f64>,
    pub partition_value: f64,
    pub beta_value: f64,
    pub gamma_of_value: f64,
}

pub fn evaluate_partition(partition: &Partition) -> Result<PartitionResults> {
    let ev = partition.eigenvalues()?;
    let n = partition.dimension();
    let value = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for &l in &ev {
        s += gamma(l, n)?;
    }
    Ok(PartitionResults {
        beta_value: 2.0 * s / ev.len() as f64,
        gamma_of_value: gamma(value, n)?,
        partition_value: value,
        lambda1_per_part: ev,
    })
}

fn arcs_value(cuts: &[f64]) -> f64 {
    let k = cuts.len();
    (0..k)
        .map(|i| {
            let l = if i + 1 < k {
                cuts[i + 1] - cuts[i]
            } else {
                cuts[0] + 2.0 * PI - cuts[i]
            };
            (PI / l).powi(2)
        })
        .fold(0.0, f64::max)
}

/// Minimise `max_i λ₁(arc_i)` over `k` arcs by coordinate descent from
/// `n_starts` random configurations.
///
/// Arcs are parametrised by `k` cyclic cut points, so there are no gaps
/// (leaving a gap only shortens an arc and raises its eigenvalue). Moving
/// cut `t_i` only changes its two neighbouring arcs, and the maximum of their
/// eigenvalues is smallest when the lengths agree, so each coordinate step
/// sets `t_i` to the midpoint of its neighbours.
pub fn optimize_arcs(k: usize, n_starts: usize, seed: u64) -> Result<(ArcPartition, f64)> {
    if k < 2 {
        return domain(format!("optimisation needs k ≥ 2, got {k}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..n_starts.max(1) {
        let mut cuts: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
        cuts.sort_by(f64::total_cmp);
        for sweep in 0..200_000 {
            let mut moved = 0.0f64;
            for i in 0..k {
                let prev = if i == 0 { cuts[k - 1] - 2.0 * PI } else { cuts[i - 1] };
                let next = if i + 1 == k { cuts[0] + 2.0 * PI } else { cuts[i + 1] };
                let mid = 0.5 * (prev + next);
                moved = moved.max((mid - cuts[i]).abs());
                cuts[i] = mid;
            }
            if moved < 1e-15 || sweep > 100 && moved < 1e-13 {
                break;
            }
        }
        let v = arcs_value(&cuts);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((cuts, v));
        }
    }
    let (cuts, value) = best.unwrap();
    let t0 = cuts[0];
    let mut arcs: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let a = cuts[i] - t0;
            let b = if i + 1 < k { cuts[i + 1] - t0 } else { 2.0 * PI };
            (a, b)
        })
        .collect();
    arcs[0].0 = 0.0;
    Ok((ArcPartition::new(arcs)?, value))
}

/// Strict growth of `L_k` in `k`.
#[derive(Debug, Clone, Serialize)]
pub struct LkMonotonicity {
    /// `(k, optimised value)` on `S¹`.
    pub circle: Vec<(usize, f64)>,
    pub circle_strict: bool,
    /// `L_2(S²)` (hemispheres) and `L_3(S²)` (three lunes of angle 2π/3).
    pub sphere_l2: f64,
    pub sphere_l3: f64,
    pub sphere_strict: bool,
}

pub fn monotonicity_lk_check(k_max: usize, n_starts: usize, seed: u64) -> Result<LkMonotonicity> {
    if k_max < 3 {
        return domain(format!("k_max must be at least 3, got {k_max}"));
    }
    let mut circle = Vec::new();
    for k in 2..=k_max {
        circle.push((k, optimize_arcs(k, n_starts, seed.wrapping_add(k as u64))?.1));
    }
    let circle_strict = circle.windows(2).all(|w| w[1].1 > w[0].1);
    let sphere_l2 = gamma_inverse(1.0, 3);
    let y = Partition::Sphere(vec![SphereDomain::Lune { alpha: 2.0 * PI / 3.0 }; 3]);
    let sphere_l3 = partition_value(&y)?;
    Ok(LkMonotonicity {
        circle,
        circle_strict,
        sphere_l2,
        sphere_l3,
        sphere_strict: sphere_l3 > sphere_l2,
    })
}

/// JSON form of a candidate partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSpec {
    Arcs(Vec<[f64; 2]>),
    Lunes(Vec<f64>),
    MaskFile(String),
    ArcsEqual { k: usize },
}
