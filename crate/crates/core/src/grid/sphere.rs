use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Colatitude-longitude grid on the unit sphere `S^2`.
///
/// Nodes sit at `phi_p = p * dphi` for `p = 1..n_phi` (poles excluded) and
/// `lambda_l = l * dlam` for `l = 0..n_lam`, periodic in longitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereGrid {
    pub n_phi: usize,
    pub n_lam: usize,
}

impl SphereGrid {
    pub fn new(n_phi: usize, n_lam: usize) -> Result<Self> {
        if n_phi < 4 {
            return domain(format!("n_phi = {n_phi} must be at least 4"));
        }
        if n_lam < 8 || n_lam % 2 != 0 {
            return domain(format!("n_lam = {n_lam} must be even and at least 8"));
        }
        Ok(Self { n_phi, n_lam })
    }

    #[inline]
    pub fn dphi(&self) -> f64 {
        PI / self.n_phi as f64
    }

    #[inline]
    pub fn dlam(&self) -> f64 {
        2.0 * PI / self.n_lam as f64
    }

    /// Number of colatitude rings (`n_phi - 1`).
    #[inline]
    pub fn rings(&self) -> usize {
        self.n_phi - 1
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.rings() * self.n_lam
    }

    /// Flat index of ring `p` in `1..n_phi` and longitude `l` (taken modulo `n_lam`).
    #[inline]
    pub fn index(&self, p: usize, l: usize) -> usize {
        (p - 1) * self.n_lam + l % self.n_lam
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (1 + idx / self.n_lam, idx % self.n_lam)
    }

    #[inline]
    pub fn colatitude(&self, p: usize) -> f64 {
        p as f64 * self.dphi()
    }

    #[inline]
    pub fn longitude(&self, l: usize) -> f64 {
        l as f64 * self.dlam()
    }

    /// Quadrature weight `sin(phi_p) dphi dlam`.
    pub fn weights(&self) -> Vec<f64> {
        let (dp, dl) = (self.dphi(), self.dlam());
        (0..self.node_count())
            .map(|idx| self.colatitude(self.coords(idx).0).sin() * dp * dl)
            .collect()
    }

    /// Value at a pole, the mean over the adjacent colatitude ring.
    pub fn pole_value(&self, values: &[f64], north: bool) -> f64 {
        let p = if north { 1 } else { self.n_phi - 1 };
        let start = self.index(p, 0);
        values[start..start + self.n_lam].iter().sum::<f64>() / self.n_lam as f64
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sphere_area() {
        let g = SphereGrid::new(128, 256).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 4.0 * PI).abs() / (4.0 * PI) < 0.005);
        let coarse: f64 = SphereGrid::new(16, 32).unwrap().weights().iter().sum();
        assert!((coarse - 4.0 * PI).abs() > (total - 4.0 * PI).abs());
    }

    #[test]
    fn pole_value_is_ring_mean() {
        let g = SphereGrid::new(8, 16).unwrap();
        let v: Vec<f64> = (0..g.node_count())
            .map(|i| {
                let (_, l) = g.coords(i);
                1.0 + g.longitude(l).cos()
            })
            .collect();
        assert!((g.pole_value(&v, true) - 1.0).abs() < 1e-14);
        assert!((g.pole_value(&v, false) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(SphereGrid::new(2, 16).is_err());
        assert!(SphereGrid::new(8, 9).is_err());
    }
}
