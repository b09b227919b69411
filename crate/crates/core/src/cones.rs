//! Homogeneous cone profiles `(χ_{A_1}, ..., χ_{A_k}) |Ψ_d|` with
//! `Ψ_d(r, θ) = r^d sin(dθ) / √π`.
//!
//! For a half-integer `d` the nodal set of `|sin(d(θ - θ₀))|` splits the
//! plane into `2d` cones of opening `π/d`, numbered counterclockwise from
//! `θ₀`. An assignment maps each cone to the component that lives on it.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Result};
use crate::grid::{MultiField, PolarGrid2D};

/// A positive half-integer `d = twice / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(u32);

impl HalfInt {
    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return domain("degree must be positive");
        }
        Ok(Self(twice))
    }

    /// Accepts `x` only if `2x` is a positive integer (to 1e-9).
    pub fn from_f64(x: f64) -> Result<Self> {
        let t = 2.0 * x;
        let r = t.round();
        if !(x > 0.0) || (t - r).abs() > 1e-9 {
            return domain(format!("{x} is not a positive half-integer"));
        }
        Self::from_twice(r as u32)
    }

    #[inline]
    pub fn twice(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Number of nodal cones, `2d`.
    #[inline]
    pub fn cones(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        HalfInt::from_f64(x).map_err(serde::de::Error::custom)
    }
}

/// `|sin(d φ)|` for a half-integer `d`; `φ` is reduced modulo `2π` first so
/// the double-covering profile is single valued on the plane.
#[inline]
pub fn abs_sin(d: HalfInt, phi: f64) -> f64 {
    (d.value() * phi.rem_euclid(2.0 * PI)).sin().abs()
}

/// `|Ψ_d(r, θ - θ₀)| = r^d |sin(d(θ - θ₀))| / √π`.
#[inline]
pub fn psi_abs(d: HalfInt, r: f64, theta: f64, theta0: f64) -> f64 {
    r.powf(d.value()) * abs_sin(d, theta - theta0) / PI.sqrt()
}

/// Split of `|Ψ_d|` among components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeProfile {
    pub d: HalfInt,
    /// Rotation `θ₀` of the first nodal line.
    #[serde(default)]
    pub rotation: f64,
    /// Component index (0-based) of each cone, counterclockwise from `θ₀`.
    pub assignment: Vec<usize>,
}

impl ConeProfile {
    pub fn new(d: HalfInt, rotation: f64, assignment: Vec<usize>) -> Result<Self> {
        let p = Self {
            d,
            rotation,
            assignment,
        };
        p.validate(None)?;
        Ok(p)
    }

    /// Cones alternate between components 0 and 1; with an odd number of
    /// cones (at least three) the last cone gets component 2 so that
    /// neighbours stay distinct around the circle.
    pub fn alternating(d: HalfInt, rotation: f64) -> Self {
        let n = d.cones();
        let mut assignment: Vec<usize> = (0..n).map(|c| c % 2).collect();
        if n % 2 == 1 && n > 1 {
            assignment[n - 1] = 2;
        }
        Self {
            d,
            rotation,
            assignment,
        }
    }

    /// Cone `c` goes to component `c` (the equivariant layout with one cone
    /// per component).
    pub fn one_per_cone(d: HalfInt, rotation: f64) -> Self {
        Self {
            d,
            rotation,
            assignment: (0..d.cones()).collect(),
        }
    }

    /// Number of components the assignment refers to.
    pub fn components(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    pub fn validate(&self, k: Option<usize>) -> Result<()> {
        let n = self.d.cones();
        if self.assignment.len() != n {
            return domain(format!(
                "assignment covers {} cones, degree {} has {n}",
                self.assignment.len(),
                self.d
            ));
        }
        if let Some(k) = k {
            if let Some(bad) = self.assignment.iter().find(|&&c| c >= k) {
                return domain(format!("cone assigned to component {bad}, only {k} exist"));
            }
        }
        if n >= 2 {
            for c in 0..n {
                if self.assignment[c] == self.assignment[(c + 1) % n] {
                    return domain(format!(
                        "adjacent cones {c} and {} share component {}",
                        (c + 1) % n,
                        self.assignment[c]
                    ));
                }
            }
        }
        if !self.rotation.is_finite() {
            return domain("rotation must be finite");
        }
        Ok(())
    }

    pub fn cone_width(&self) -> f64 {
        PI / self.d.value()
    }

    /// Index of the cone containing angle `theta`.
    pub fn cone_of(&self, theta: f64) -> usize {
        let phi = (theta - self.rotation).rem_euclid(2.0 * PI);
        ((phi / self.cone_width()).floor() as usize).min(self.d.cones() - 1)
    }

    /// Value of component `i` at `(r, θ)`.
    pub fn value(&self, i: usize, r: f64, theta: f64) -> f64 {
        if self.assignment[self.cone_of(theta)] == i {
            psi_abs(self.d, r, theta, self.rotation)
        } else {
            0.0
        }
    }

    /// Sample `amplitude * (χ_{A_i}|Ψ_d|)_i` on `grid` with `k` components.
    pub fn to_field(&self, grid: PolarGrid2D, k: usize, amplitude: f64) -> Result<MultiField> {
        self.validate(Some(k))?;
        Ok(MultiField::from_fn(grid, k, |i, r, th| amplitude * self.value(i, r, th)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_int_parsing() {
        assert_eq!(HalfInt::from_f64(1.5).unwrap().twice(), 3);
        assert!(HalfInt::from_f64(1.3).is_err());
        assert!(HalfInt::from_f64(0.0).is_err());
        assert_eq!(HalfInt::from_f64(2.0).unwrap().to_string(), "2");
        assert_eq!(HalfInt::from_f64(2.5).unwrap().to_string(), "5/2");
        let v: HalfInt = serde_json::from_str("1.5").unwrap();
        assert_eq!(v.twice(), 3);
        assert!(serde_json::from_str::<HalfInt>("0.7").is_err());
    }

    #[test]
    fn abs_sin_is_periodic_for_half_integers() {
        for twice in 1..8 {
            let d = HalfInt::from_twice(twice).unwrap();
            for i in 0..50 {
                let th = i as f64 * 0.137;
                assert!((abs_sin(d, th) - abs_sin(d, th + 2.0 * PI)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn alternating_assignments_are_admissible() {
        for twice in 1..9 {
            let d = HalfInt::from_twice(twice).unwrap();
            let p = ConeProfile::alternating(d, 0.0);
            p.validate(Some(3)).unwrap();
        }
    }

    #[test]
    fn adjacent_cones_must_differ() {
        let d = HalfInt::from_twice(3).unwrap();
        assert!(ConeProfile::new(d, 0.0, vec![0, 1, 0]).is_err());
        assert!(ConeProfile::new(d, 0.0, vec![0, 1]).is_err());
        assert!(ConeProfile::new(d, 0.0, vec![0, 1, 2]).is_ok());
    }

    #[test]
    fn cone_lookup() {
        let d = HalfInt::from_twice(3).unwrap();
        let p = ConeProfile::one_per_cone(d, 0.3);
        assert_eq!(p.cone_of(0.31), 0);
        assert_eq!(p.cone_of(0.3 + 2.2), 1);
        assert_eq!(p.cone_of(0.29), 2);
        assert_eq!(p.value(1, 1.0, 0.5), 0.0);
        assert!(p.value(0, 1.0, 0.5) > 0.0);
    }
}
