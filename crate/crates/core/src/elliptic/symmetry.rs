use crate::cones::HalfInt;
use crate::error::{domain, Result};
use crate::grid::MultiField;

/// Average a field over the dihedral group generated by
///
/// - `T`: `(Tu)_i(z) = u_{i+1}(G z)`, with `G` the rotation by `π/d`;
/// - `S`: `(Su)_i(z) = u_{k+1-i}(z̄)` (index reversal plus conjugation).
///
/// With cones numbered counterclockwise and cone `c` carrying component
/// `c mod k`, the one-per-cone profile of degree `d` is a fixed point.
/// Requires `k | 2d` (so `T` has order `2d`) and `4d | n_theta` (so the
/// rotation maps nodes to nodes).
pub fn equivariance_project(field: &MultiField, d: HalfInt) -> Result<MultiField> {
    let g = *field.grid();
    let k = field.k();
    let cones = d.cones();
    if g.n_theta % (2 * cones) != 0 {
        return domain(format!(
            "n_theta = {} is not divisible by 4d = {}",
            g.n_theta,
            2 * cones
        ));
    }
    if cones % k != 0 {
        return domain(format!("{k} components cannot cycle through {cones} cones"));
    }
    let n = g.n_theta;
    let shift = n / cones;
    let order = cones;
    let scale = 1.0 / (2 * order) as f64;

    let mut out = vec![vec![0.0; g.node_count()]; k];
    for (i, o) in out.iter_mut().enumerate() {
        let mut pole = 0.0;
        for a in 0..order {
            pole += field.component((i + a) % k)[0];
            pole += field.component((k - 1 - i + a) % k)[0];
        }
        o[0] = pole * scale;
        for j in 1..=g.n_r {
            let base = g.ring(j).start;
            for m in 0..n {
                let mut s = 0.0;
                for a in 0..order {
                    let rot = (m + a * shift) % n;
                    let refl = (n - m % n + a * shift) % n;
                    s += field.component((i + a) % k)[base + rot];
                    s += field.component((k - 1 - i + a) % k)[base + refl];
                }
                o[base + m] = s * scale;
            }
        }
    }
    MultiField::from_components(g, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::ConeProfile;
    use crate::grid::PolarGrid2D;

    #[test]
    fn one_per_cone_profile_is_fixed() {
        let g = PolarGrid2D::new(16, 48, 1.0).unwrap();
        let d = HalfInt::from_twice(3).unwrap();
        let f = ConeProfile::one_per_cone(d, 0.0).to_field(g, 3, 1.0).unwrap();
        let p = equivariance_project(&f, d).unwrap();
        assert!(p.max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn projection_yields_equivariant_field() {
        let g = PolarGrid2D::new(12, 48, 1.0).unwrap();
        let d = HalfInt::from_twice(3).unwrap();
        let f = MultiField::from_fn(g, 3, |i, r, t| {
            (1.0 + i as f64 + r * (3.0 * t + i as f64).sin()).abs()
        });
        let p = equivariance_project(&f, d).unwrap();
        let q = equivariance_project(&p, d).unwrap();
        assert!(q.max_abs_diff(&p) < 1e-14);
        let n = g.n_theta;
        let shift = n / 3;
        for j in 1..=g.n_r {
            for m in 0..n {
                for i in 0..3 {
                    let a = p.component(i)[g.index(j, m)];
                    let b = p.component((i + 1) % 3)[g.index(j, m + shift)];
                    assert!((a - b).abs() < 1e-12);
                    let c = p.component(2 - i)[g.index(j, (n - m) % n)];
                    assert!((a - c).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_incompatible_grid() {
        let g = PolarGrid2D::new(8, 20, 1.0).unwrap();
        let f = MultiField::zeros(g, 3);
        assert!(equivariance_project(&f, HalfInt::from_twice(3).unwrap()).is_err());
    }
}
