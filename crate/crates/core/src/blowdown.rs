//! Blow-down families `u(R x) / H(R)^{1/2}` and their classification
//! against segregated homogeneous profiles `(χ_{A_i}) |Ψ_d|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::almgren::compute_h;
use crate::cones::{psi_abs, ConeProfile, HalfInt};
use crate::error::{domain, Result};
use crate::grid::{integrate_circle, integrate_disk, sample_rescaled, MultiField, PolarGrid2D};

/// Components whose smallest unit-circle mass falls below this are reported
/// as asymptotically vanishing.
pub const VANISHING_THRESHOLD: f64 = 1e-4;

/// Relative margin under which two cone masses count as a tie.
const TIE_MARGIN: f64 = 0.01;

/// One rescaled window.
#[derive(Debug, Clone, Serialize)]
pub struct BlowdownMember {
    pub radius: f64,
    /// `H(u, 0, R)` of the source field.
    pub h_source: f64,
    /// `H(u, 0, R) R²`, the weight in the rescaled segregation term.
    pub scale_factor: f64,
    /// The member solves the system with competition `β H(R) R²`.
    pub effective_beta: f64,
    /// `H(u_R, 0, 1)`; equal to one up to quadrature error.
    pub h_unit: f64,
    #[serde(skip)]
    pub field: MultiField,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedWindow {
    pub radius: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowdownFamily {
    pub members: Vec<BlowdownMember>,
    pub skipped: Vec<SkippedWindow>,
}

impl BlowdownFamily {
    pub fn fields(&self) -> Vec<MultiField> {
        self.members.iter().map(|m| m.field.clone()).collect()
    }
}

/// Resample `u(R x) / H(u, 0, R)^{1/2}` onto `target` for every `R`.
///
/// Windows reaching past the source disk, or with vanishing `H(R)`, are
/// skipped and listed in [`BlowdownFamily::skipped`]. The target must
/// contain the unit disk.
pub fn blowdown_family(
    field: &MultiField,
    radii: &[f64],
    target: &PolarGrid2D,
    beta: f64,
) -> Result<BlowdownFamily> {
    target.validate()?;
    if target.r_max < 1.0 {
        return domain(format!("target radius {} must contain the unit disk", target.r_max));
    }
    let src_r = field.grid().r_max;
    let results: Vec<std::result::Result<BlowdownMember, SkippedWindow>> = radii
        .par_iter()
        .map(|&r| {
            let skip = |reason: String| SkippedWindow { radius: r, reason };
            if !(r > 0.0) || r * target.r_max > src_r * (1.0 + 1e-12) {
                return Err(skip(format!(
                    "window R * r_max = {} exceeds source radius {src_r}",
                    r * target.r_max
                )));
            }
            let h = compute_h(field, r).map_err(|e| skip(e.to_string()))?;
            if !(h > 0.0) {
                return Err(skip(format!("H vanishes at R = {r}")));
            }
            let f = sample_rescaled(field, r, target, h.sqrt()).map_err(|e| skip(e.to_string()))?;
            let h_unit = compute_h(&f, 1.0).map_err(|e| skip(e.to_string()))?;
            Ok(BlowdownMember {
                radius: r,
                h_source: h,
                scale_factor: h * r * r,
                effective_beta: beta * h * r * r,
                h_unit,
                field: f,
            })
        })
        .collect();
    let mut members = Vec::new();
    let mut skipped = Vec::new();
    for res in results {
        match res {
            Ok(m) => members.push(m),
            Err(s) => skipped.push(s),
        }
    }
    Ok(BlowdownFamily { members, skipped })
}

/// Best fit of a unit-scale field by `(χ_{A_i}) |Ψ_d(·, θ − θ₀)|` on `B_1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileFit {
    pub d: HalfInt,
    pub theta0: f64,
    /// Component of each cone, counterclockwise from `θ₀`.
    pub assignment: Vec<usize>,
    pub residual: f64,
    /// `∫_{B_1} Σ_{i<j} u_i² u_j²`, weighted by the window's scale factor
    /// when produced by [`classify_family`].
    pub segregation: f64,
    /// Cones whose two largest component masses are within 1%.
    pub ties: Vec<usize>,
    /// Whether adjacent cones received distinct components.
    pub admissible: bool,
}

fn disk_l2_sq(grid: &PolarGrid2D, values: impl Iterator<Item = f64>) -> Result<f64> {
    let sq: Vec<f64> = values.map(|v| v * v).collect();
    integrate_disk(grid, &sq, 1.0)
}

/// Fit `θ₀ ∈ [0, π/d)` by grid search over multiples of `Δθ` with parabolic
/// refinement, comparing `Σ_i u_i` with `|Ψ_d|`, then give each cone to the
/// component carrying the most mass in it (lowest index on ties).
pub fn classify_profile(field: &MultiField, d: HalfInt) -> Result<ProfileFit> {
    let g = *field.grid();
    if g.r_max < 1.0 {
        return domain(format!("grid radius {} must contain the unit disk", g.r_max));
    }
    let n = g.n_theta;
    let dt = g.dtheta();
    let dv = d.value();
    let width = std::f64::consts::PI / dv;
    let sum = field.sum();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    // |sin(d θ_m)| on node angles; a rotation by m0 Δθ is an index shift
    let base: Vec<f64> = (0..n).map(|m| psi_abs(d, 1.0, g.angle(m), 0.0) * sqrt_pi).collect();
    let radial: Vec<f64> = (0..=g.n_r).map(|j| g.radius(j).powf(dv) / sqrt_pi).collect();

    let misfit = |m0: i64| -> Result<f64> {
        let mut diff = vec![0.0; g.node_count()];
        diff[0] = sum[0];
        for j in 1..=g.n_r {
            let ring = g.ring(j);
            for m in 0..n {
                let s = (m as i64 - m0).rem_euclid(n as i64) as usize;
                diff[ring.start + m] = sum[ring.start + m] - radial[j] * base[s];
            }
        }
        disk_l2_sq(&g, diff.into_iter())
    };

    let offsets = ((width / dt).round() as i64).max(1);
    let values: Vec<f64> = (0..offsets).map(misfit).collect::<Result<_>>()?;
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let f0 = values[best];
    let fm = misfit(best as i64 - 1)?;
    let fp = misfit(best as i64 + 1)?;
    let curv = fm - 2.0 * f0 + fp;
    let shift = if curv > 0.0 {
        (0.5 * (fm - fp) / curv).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let mut theta0 = ((best as f64 + shift) * dt).rem_euclid(width);
    if width - theta0 < 1e-9 * width {
        theta0 = 0.0;
    }

    let cones = d.cones();
    let mut profile = ConeProfile {
        d,
        rotation: theta0,
        assignment: vec![0; cones],
    };
    let cone_index: Vec<usize> = (0..g.node_count())
        .map(|idx| profile.cone_of(g.position(idx).1))
        .collect();
    let k = field.k();
    let mut mass = vec![vec![0.0; k]; cones];
    for (i, u) in field.components().iter().enumerate() {
        for (c, row) in mass.iter_mut().enumerate() {
            let vals: Vec<f64> = u
                .iter()
                .zip(&cone_index)
                .map(|(v, &ci)| if ci == c { v * v } else { 0.0 })
                .collect();
            row[i] = integrate_disk(&g, &vals, 1.0)?;
        }
    }
    let mut ties = Vec::new();
    for (c, row) in mass.iter().enumerate() {
        let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let contenders: Vec<usize> =
            (0..k).filter(|&i| row[i] >= top - TIE_MARGIN * top.abs()).collect();
        if contenders.len() > 1 {
            ties.push(c);
        }
        profile.assignment[c] = contenders[0];
    }
    let admissible = cones < 2
        || (0..cones).all(|c| profile.assignment[c] != profile.assignment[(c + 1) % cones]);

    let mut err = 0.0;
    let mut norm = 0.0;
    for i in 0..k {
        let u = field.component(i);
        let fit: Vec<f64> = (0..g.node_count())
            .map(|idx| {
                let (r, th) = g.position(idx);
                profile.value(i, r, th)
            })
            .collect();
        err += disk_l2_sq(&g, u.iter().zip(&fit).map(|(a, b)| a - b))?;
        norm += disk_l2_sq(&g, fit.iter().cloned())?;
    }
    Ok(ProfileFit {
        d,
        theta0,
        assignment: profile.assignment,
        residual: (err / norm).sqrt(),
        segregation: segregation_residual(field, 1.0)?,
        ties,
        admissible,
    })
}

/// `scale_factor · ∫_{B_1} Σ_{i<j} u_i² u_j²`, with `scale_factor = H(R) R²`
/// for a window of radius `R`.
pub fn segregation_residual(field: &MultiField, scale_factor: f64) -> Result<f64> {
    if !(scale_factor > 0.0) {
        return domain(format!("scale factor {scale_factor} must be positive"));
    }
    let g = field.grid();
    Ok(scale_factor * integrate_disk(g, &field.pair_coupling(), g.r_max.min(1.0))?)
}

/// Classify every member, weighting segregation by its scale factor.
pub fn classify_family(family: &BlowdownFamily, d: HalfInt) -> Result<Vec<ProfileFit>> {
    family
        .members
        .par_iter()
        .map(|m| {
            let mut fit = classify_profile(&m.field, d)?;
            fit.segregation = segregation_residual(&m.field, m.scale_factor)?;
            Ok(fit)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingReport {
    /// Per component, the minimum over the family of `∫_{∂B_1} u_i²`.
    pub min_mass: Vec<f64>,
    pub vanishing: Vec<bool>,
    pub threshold: f64,
}

pub fn vanishing_diagnostic(family: &[MultiField]) -> Result<VanishingReport> {
    let Some(first) = family.first() else {
        return domain("empty blow-down family");
    };
    let k = first.k();
    let mut min_mass = vec![f64::INFINITY; k];
    for f in family {
        if f.k() != k {
            return domain("family members have different component counts");
        }
        for (i, m) in min_mass.iter_mut().enumerate() {
            let sq: Vec<f64> = f.component(i).iter().map(|v| v * v).collect();
            *m = m.min(integrate_circle(f.grid(), &sq, 1.0)?);
        }
    }
    Ok(VanishingReport {
        vanishing: min_mass.iter().map(|&m| m < VANISHING_THRESHOLD).collect(),
        min_mass,
        threshold: VANISHING_THRESHOLD,
    })
}

/// Nearest multiple of one half and the distance to it.
pub fn quantization_check(d_hat: f64) -> Result<(f64, f64)> {
    if !(d_hat > 0.0) || !d_hat.is_finite() {
        return domain(format!("growth rate {d_hat} must be positive"));
    }
    let q = (2.0 * d_hat).round() / 2.0;
    Ok((q, (d_hat - q).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_grid() -> PolarGrid2D {
        PolarGrid2D::new(96, 192, 1.0).unwrap()
    }

    #[test]
    fn homogeneous_pair_is_its_own_blowdown() {
        let src = PolarGrid2D::new(128, 192, 4.0).unwrap();
        let p = ConeProfile::alternating(HalfInt::from_twice(2).unwrap(), 0.0);
        let f = p.to_field(src, 2, 3.0).unwrap();
        let fam = blowdown_family(&f, &[1.0, 2.0, 8.0], &unit_grid(), 1.0).unwrap();
        assert_eq!(fam.members.len(), 2);
        assert_eq!(fam.skipped.len(), 1);
        assert_eq!(fam.skipped[0].radius, 8.0);
        let exact = p.to_field(unit_grid(), 2, 1.0).unwrap();
        for m in &fam.members {
            assert!((m.h_unit - 1.0).abs() < 1e-3, "{}", m.h_unit);
            // H(R) = 9 R² for amplitude 3
            assert!((m.h_source - 9.0 * m.radius * m.radius).abs() < 1e-3 * m.h_source);
            assert!(m.field.max_abs_diff(&exact) < 2e-3);
        }
    }

    #[test]
    fn self_fit_of_linear_pair() {
        let d = HalfInt::from_twice(2).unwrap();
        let f = ConeProfile::alternating(d, 0.0).to_field(unit_grid(), 2, 1.0).unwrap();
        let fit = classify_profile(&f, d).unwrap();
        assert!(fit.theta0.abs() < 1e-9 || (fit.theta0 - PI).abs() < 1e-9, "{}", fit.theta0);
        assert!(fit.residual < 1e-3);
        assert_eq!(fit.assignment, vec![0, 1]);
        assert!(fit.ties.is_empty() && fit.admissible);
        assert!(fit.segregation < 1e-12);
    }

    use std::f64::consts::PI;

    #[test]
    fn rotated_three_halves_split() {
        let d = HalfInt::from_twice(3).unwrap();
        let g = unit_grid();
        let f = ConeProfile::one_per_cone(d, 0.3).to_field(g, 3, 1.0).unwrap();
        let fit = classify_profile(&f, d).unwrap();
        assert!((fit.theta0 - 0.3).abs() < g.dtheta(), "{}", fit.theta0);
        assert!(fit.residual < 1e-3, "{}", fit.residual);
        assert_eq!(fit.assignment, vec![0, 1, 2]);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let d = HalfInt::from_twice(2).unwrap();
        let g = unit_grid();
        let half = ConeProfile::alternating(d, 0.0).to_field(g, 2, 1.0).unwrap();
        // both components equal on the first cone
        let mut c = half.clone().into_components();
        c[1] = c[0].iter().zip(&c[1]).map(|(a, b)| a + b).collect();
        c[0] = c[1].clone();
        let f = MultiField::from_components(g, c).unwrap();
        let fit = classify_profile(&f, d).unwrap();
        assert_eq!(fit.ties, vec![0, 1]);
        assert_eq!(fit.assignment, vec![0, 0]);
        assert!(!fit.admissible);
    }

    #[test]
    fn vanishing_flags_padded_component() {
        let d = HalfInt::from_twice(2).unwrap();
        let f = ConeProfile::alternating(d, 0.0).to_field(unit_grid(), 2, 1.0).unwrap().padded(3);
        let rep = vanishing_diagnostic(&[f]).unwrap();
        assert_eq!(rep.vanishing, vec![false, false, true]);
        // ∫_0^π sin²/π = 1/2
        assert!((rep.min_mass[0] - 0.5).abs() < 1e-6);
        assert!((rep.min_mass[1] - 0.5).abs() < 1e-6);
        assert!(vanishing_diagnostic(&[]).is_err());
    }

    #[test]
    fn segregated_input_has_zero_residual() {
        let d = HalfInt::from_twice(4).unwrap();
        let f = ConeProfile::alternating(d, 0.0).to_field(unit_grid(), 2, 1.0).unwrap();
        assert_eq!(segregation_residual(&f, 7.0).unwrap(), 0.0);
        assert!(segregation_residual(&f, 0.0).is_err());
    }

    #[test]
    fn quantization_examples() {
        let (q, dev) = quantization_check(1.48).unwrap();
        assert_eq!(q, 1.5);
        assert!((dev - 0.02).abs() < 1e-12);
        assert_eq!(quantization_check(2.0).unwrap(), (2.0, 0.0));
        assert!(quantization_check(-1.0).is_err());
    }

    fn admissible_assignment(cones: usize, k: usize, seed: &[usize]) -> Vec<usize> {
        // walk around the cones choosing a component different from both neighbours
        let mut a = vec![0; cones];
        for c in 0..cones {
            let mut choice = seed[c] % k;
            for _ in 0..k {
                let prev_ok = c == 0 || a[c - 1] != choice;
                let wrap_ok = c + 1 != cones || cones < 2 || a[0] != choice;
                if prev_ok && wrap_ok {
                    break;
                }
                choice = (choice + 1) % k;
            }
            a[c] = choice;
        }
        a
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn exact_profiles_are_recovered(
            twice in 1u32..7,
            seed in proptest::collection::vec(0usize..3, 6),
        ) {
            let d = HalfInt::from_twice(twice).unwrap();
            let g = PolarGrid2D::new(64, 192, 1.0).unwrap();
            let a = admissible_assignment(d.cones(), 3, &seed);
            let p = ConeProfile::new(d, 0.0, a.clone()).unwrap();
            let f = p.to_field(g, 3, 1.0).unwrap();
            let fit = classify_profile(&f, d).unwrap();
            prop_assert!(fit.residual < 1e-3, "{}", fit.residual);
            prop_assert_eq!(fit.assignment, a);
        }

        #[test]
        fn rotation_shifts_theta0(twice in 1u32..7, steps in 0usize..40) {
            let d = HalfInt::from_twice(twice).unwrap();
            let g = PolarGrid2D::new(48, 192, 1.0).unwrap();
            let alpha = steps as f64 * g.dtheta() * 0.37;
            let p = ConeProfile::alternating(d, alpha);
            let fit = classify_profile(&p.to_field(g, p.components(), 1.0).unwrap(), d).unwrap();
            let width = PI / d.value();
            let diff = (fit.theta0 - alpha).rem_euclid(width);
            prop_assert!(diff.min(width - diff) < g.dtheta(), "{} vs {}", fit.theta0, alpha);
        }

        #[test]
        fn vanishing_is_permutation_equivariant(p in Just(vec![2usize, 0, 1])) {
            let d = HalfInt::from_twice(3).unwrap();
            let f = ConeProfile::one_per_cone(d, 0.1).to_field(unit_grid(), 3, 1.0).unwrap();
            let f = MultiField::from_components(*f.grid(), {
                let mut c = f.into_components();
                c[1].iter_mut().for_each(|v| *v *= 1e-3);
                c
            }).unwrap();
            let a = vanishing_diagnostic(&[f.clone()]).unwrap();
            let b = vanishing_diagnostic(&[f.permuted(&p)]).unwrap();
            for i in 0..3 {
                prop_assert_eq!(b.min_mass[i], a.min_mass[p[i]]);
            }
        }
    }
}
