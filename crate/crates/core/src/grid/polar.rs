use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Structured polar grid on the disk `B_{r_max}`.
///
/// Nodes are `r_j = j * dr` for `j = 0..=n_r` and `theta_m = m * dtheta` for
/// `m = 0..n_theta`. The pole `j = 0` is a single node shared by every `m`.
/// Flat storage puts the pole at index 0 and ring `j >= 1` at
/// `1 + (j - 1) * n_theta + m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarGrid2D {
    pub n_r: usize,
    pub n_theta: usize,
    pub r_max: f64,
}

impl PolarGrid2D {
    pub fn new(n_r: usize, n_theta: usize, r_max: f64) -> Result<Self> {
        let grid = Self { n_r, n_theta, r_max };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r < 8 {
            return domain(format!("n_r = {} must be at least 8", self.n_r));
        }
        if self.n_theta < 16 || self.n_theta % 2 != 0 {
            return domain(format!("n_theta = {} must be even and at least 16", self.n_theta));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return domain(format!("r_max = {} must be positive", self.r_max));
        }
        Ok(())
    }

    #[inline]
    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    #[inline]
    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    #[inline]
    pub fn radius(&self, j: usize) -> f64 {
        j as f64 * self.dr()
    }

    #[inline]
    pub fn angle(&self, m: usize) -> f64 {
        m as f64 * self.dtheta()
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        1 + self.n_r * self.n_theta
    }

    /// Flat index of node `(j, m)`; `m` is taken modulo `n_theta`.
    #[inline]
    pub fn index(&self, j: usize, m: usize) -> usize {
        if j == 0 {
            0
        } else {
            1 + (j - 1) * self.n_theta + m % self.n_theta
        }
    }

    /// Slice range of ring `j >= 1` in flat storage.
    #[inline]
    pub fn ring(&self, j: usize) -> std::ops::Range<usize> {
        debug_assert!(j >= 1 && j <= self.n_r);
        let start = 1 + (j - 1) * self.n_theta;
        start..start + self.n_theta
    }

    /// `(j, m)` of a flat index; the pole reports `(0, 0)`.
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        if idx == 0 {
            (0, 0)
        } else {
            let k = idx - 1;
            (1 + k / self.n_theta, k % self.n_theta)
        }
    }

    /// Polar coordinates of a flat index.
    #[inline]
    pub fn position(&self, idx: usize) -> (f64, f64) {
        let (j, m) = self.coords(idx);
        (self.radius(j), self.angle(m))
    }

    /// True for nodes on the outer (Dirichlet) ring.
    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        idx > 0 && self.coords(idx).0 == self.n_r
    }

    /// Area weights of the full-disk quadrature: pole disk of radius `dr/2`,
    /// `r_j dr dtheta` inside, half weight on the outer ring.
    pub fn node_weights(&self) -> Vec<f64> {
        let dr = self.dr();
        let dt = self.dtheta();
        let mut w = vec![0.0; self.node_count()];
        w[0] = PI * dr * dr / 4.0;
        for j in 1..=self.n_r {
            let mut wj = self.radius(j) * dr * dt;
            if j == self.n_r {
                wj *= 0.5;
            }
            for v in &mut w[self.ring(j)] {
                *v = wj;
            }
        }
        w
    }

    /// Locate `r` between two rings: returns `(j, t)` with `r = r_j + t dr`,
    /// `0 <= j < n_r` and `t` in `[0, 1]`.
    pub fn radial_bracket(&self, r: f64) -> Result<(usize, f64)> {
        if !(r > 0.0 && r <= self.r_max * (1.0 + 1e-12)) {
            return domain(format!("radius {r} outside (0, {}]", self.r_max));
        }
        let s = (r / self.dr()).min(self.n_r as f64);
        let j = (s.floor() as usize).min(self.n_r - 1);
        Ok((j, (s - j as f64).clamp(0.0, 1.0)))
    }

    /// Values of a scalar field on ring `j` (the pole repeated for `j = 0`).
    pub fn ring_values(&self, values: &[f64], j: usize) -> Vec<f64> {
        if j == 0 {
            vec![values[0]; self.n_theta]
        } else {
            values[self.ring(j)].to_vec()
        }
    }

    /// Ring indices and weights of the four-point Lagrange interpolant in
    /// `r` at radius `r` (stencil shifted inward at the pole and outer ring).
    /// Exact for polynomials of degree 3 in `r`; exact at ring radii.
    pub fn radial_stencil(&self, r: f64) -> Result<[(usize, f64); 4]> {
        let (j, t) = self.radial_bracket(r)?;
        let first = j.saturating_sub(1).min(self.n_r.saturating_sub(3));
        let x = j as f64 + t;
        let mut out = [(0usize, 0.0); 4];
        for (a, o) in out.iter_mut().enumerate() {
            let xa = (first + a) as f64;
            let mut w = 1.0;
            for b in 0..4 {
                if b != a {
                    let xb = (first + b) as f64;
                    w *= (x - xb) / (xa - xb);
                }
            }
            *o = (first + a, w);
        }
        Ok(out)
    }

    /// Field restricted to the circle of radius `r`, interpolated in `r` by
    /// the cubic stencil of [`Self::radial_stencil`].
    pub fn circle_values(&self, values: &[f64], r: f64) -> Result<Vec<f64>> {
        let stencil = self.radial_stencil(r)?;
        let mut out = vec![0.0; self.n_theta];
        for (j, w) in stencil {
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.ring_values(values, j)) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}

/// Trapezoidal quadrature of a scalar field over the circle of radius `r`
/// (arc-length measure, so a constant `c` gives `2 pi r c`).
pub fn integrate_circle(grid: &PolarGrid2D, values: &[f64], r: f64) -> Result<f64> {
    let ring = grid.circle_values(values, r)?;
    let sum: f64 = ring.iter().sum();
    Ok(sum * r * grid.dtheta())
}

/// Angular integral `rho * int f(rho, theta) dtheta` on ring `j`.
fn ring_moment(grid: &PolarGrid2D, values: &[f64], j: usize) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let sum: f64 = values[grid.ring(j)].iter().sum();
    grid.radius(j) * sum * grid.dtheta()
}

/// Quadrature of a scalar field over the disk `B_r`.
///
/// For `r = r_J` this is the pole disk of radius `dr/2` plus full-weight
/// rings `1..J` and a half-weight ring `J`. Between rings the partial
/// interval is added by the trapezoidal rule on linearly interpolated
/// ring moments, so the result is continuous in `r`.
pub fn integrate_disk(grid: &PolarGrid2D, values: &[f64], r: f64) -> Result<f64> {
    let (j, t) = grid.radial_bracket(r)?;
    let dr = grid.dr();
    let pole = PI * dr * dr / 4.0 * values[0];
    if j == 0 {
        // inside the first cell: scale the B_{dr} value by area
        let g1 = ring_moment(grid, values, 1);
        return Ok((pole + 0.5 * g1 * dr) * t * t);
    }
    let mut total = pole;
    let mut prev = 0.0;
    for jj in 1..=j {
        let g = ring_moment(grid, values, jj);
        total += if jj == j { 0.5 * g * dr } else { g * dr };
        prev = g;
    }
    if t > 0.0 {
        let g_next = ring_moment(grid, values, j + 1);
        let g_r = (1.0 - t) * prev + t * g_next;
        total += 0.5 * (prev + g_r) * t * dr;
    }
    Ok(total)
}

/// Squared gradient `(d_r u)^2 + (d_theta u)^2 / r^2` at every node.
///
/// Centered differences inside, one-sided (second order) on the outer ring;
/// at the pole the Cartesian gradient is read off the first Fourier mode of
/// ring 1.
pub fn gradient_sq(grid: &PolarGrid2D, values: &[f64]) -> Vec<f64> {
    let n = grid.n_theta;
    let dr = grid.dr();
    let dt = grid.dtheta();
    let mut out = vec![0.0; grid.node_count()];

    let ring1 = &values[grid.ring(1)];
    let (mut cx, mut sy) = (0.0, 0.0);
    for (m, v) in ring1.iter().enumerate() {
        let th = grid.angle(m);
        cx += v * th.cos();
        sy += v * th.sin();
    }
    let gx = 2.0 * cx / (n as f64 * dr);
    let gy = 2.0 * sy / (n as f64 * dr);
    out[0] = gx * gx + gy * gy;

    for j in 1..=grid.n_r {
        let r = grid.radius(j);
        for m in 0..n {
            let u = |jj: usize, mm: usize| values[grid.index(jj, mm)];
            let ur = if j < grid.n_r {
                (u(j + 1, m) - u(j - 1, m)) / (2.0 * dr)
            } else {
                (3.0 * u(j, m) - 4.0 * u(j - 1, m) + u(j - 2, m)) / (2.0 * dr)
            };
            let ut = (u(j, m + 1) - u(j, m + n - 1)) / (2.0 * dt);
            out[grid.index(j, m)] = ur * ur + ut * ut / (r * r);
        }
    }
    out
}

/// Edge-based Dirichlet integral `int_{B_{r_J}} |grad u|^2` for every ring
/// index `J = 0..=n_r`.
///
/// Radial edges carry conductance `r_{j+1/2} dtheta / dr`, angular edges on
/// ring `j` carry `dr / (r_j dtheta)`, with half weight on ring `J`. This is
/// the quadratic form whose gradient is the discrete Laplacian used by the
/// solver. It is exact on kinks lying along grid rays but overestimates the
/// first cell for profiles singular at the pole (`r^{1/2}`), so frequency
/// diagnostics use [`gradient_sq`] with [`integrate_disk`] instead.
pub fn dirichlet_integral_cumulative(grid: &PolarGrid2D, values: &[f64]) -> Vec<f64> {
    let n = grid.n_theta;
    let dt = grid.dtheta();
    let mut radial = vec![0.0; grid.n_r + 1];
    let mut angular = vec![0.0; grid.n_r + 1];
    for j in 0..grid.n_r {
        let c = (j as f64 + 0.5) * dt;
        let mut s = 0.0;
        for m in 0..n {
            let d = values[grid.index(j + 1, m)] - values[grid.index(j, m)];
            s += d * d;
        }
        radial[j + 1] = c * s;
    }
    for j in 1..=grid.n_r {
        let a = 1.0 / (j as f64 * dt);
        let ring = &values[grid.ring(j)];
        let mut s = 0.0;
        for m in 0..n {
            let d = ring[(m + 1) % n] - ring[m];
            s += d * d;
        }
        angular[j] = a * s;
    }
    let mut out = vec![0.0; grid.n_r + 1];
    let mut rad_sum = 0.0;
    let mut ang_sum = 0.0;
    for jj in 1..=grid.n_r {
        rad_sum += radial[jj];
        out[jj] = rad_sum + ang_sum + 0.5 * angular[jj];
        ang_sum += angular[jj];
    }
    out
}

/// `int_{B_r} |grad u|^2` from the edge-based form, cubic in `r` between rings.
pub fn dirichlet_integral(grid: &PolarGrid2D, values: &[f64], r: f64) -> Result<f64> {
    let cum = dirichlet_integral_cumulative(grid, values);
    Ok(grid.radial_stencil(r)?.iter().map(|&(j, w)| w * cum[j]).sum())
}

/// Apply the stiffness matrix of the edge-based Dirichlet form to `u`:
/// rows of interior nodes only (outer-ring rows are left at zero).
pub fn apply_stiffness(grid: &PolarGrid2D, u: &[f64], out: &mut [f64]) {
    let n = grid.n_theta;
    let dt = grid.dtheta();
    let pole = u[0];
    let ring1 = &u[grid.ring(1)];
    out[0] = 0.5 * dt * ring1.iter().map(|v| pole - v).sum::<f64>();
    for j in 1..grid.n_r {
        let c_in = (j as f64 - 0.5) * dt;
        let c_out = (j as f64 + 0.5) * dt;
        let a = 1.0 / (j as f64 * dt);
        let base = grid.ring(j).start;
        let outer = grid.ring(j + 1).start;
        for m in 0..n {
            let here = u[base + m];
            let inner = if j == 1 { pole } else { u[base - n + m] };
            let next = u[base + (m + 1) % n];
            let prev = u[base + (m + n - 1) % n];
            out[base + m] = c_in * (here - inner)
                + c_out * (here - u[outer + m])
                + a * (2.0 * here - next - prev);
        }
    }
    for v in &mut out[grid.ring(grid.n_r)] {
        *v = 0.0;
    }
}

/// Discrete Laplacian `-(K u) / w` at interior nodes; zero on the outer ring.
pub fn laplacian(grid: &PolarGrid2D, u: &[f64]) -> Vec<f64> {
    let w = grid.node_weights();
    let mut ku = vec![0.0; grid.node_count()];
    apply_stiffness(grid, u, &mut ku);
    ku.iter().zip(&w).map(|(k, w)| -k / w).collect()
}

/// Bilinear interpolation of a scalar field at polar point `(r, theta)`.
pub fn interpolate(grid: &PolarGrid2D, values: &[f64], r: f64, theta: f64) -> Result<f64> {
    let n = grid.n_theta;
    if r == 0.0 {
        return Ok(values[0]);
    }
    let (j, t) = grid.radial_bracket(r)?;
    let s_full = theta.rem_euclid(2.0 * PI) / grid.dtheta();
    let m0 = (s_full.floor() as usize) % n;
    let s = (s_full - s_full.floor()).clamp(0.0, 1.0);
    let at = |jj: usize, mm: usize| values[grid.index(jj, mm)];
    let inner = (1.0 - s) * at(j, m0) + s * at(j, m0 + 1);
    let outer = (1.0 - s) * at(j + 1, m0) + s * at(j + 1, m0 + 1);
    Ok((1.0 - t) * inner + t * outer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(grid: &PolarGrid2D, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..grid.node_count())
            .map(|i| {
                let (r, th) = grid.position(i);
                f(r, th)
            })
            .collect()
    }

    #[test]
    fn rejects_small_grids() {
        assert!(PolarGrid2D::new(4, 64, 1.0).is_err());
        assert!(PolarGrid2D::new(16, 15, 1.0).is_err());
        assert!(PolarGrid2D::new(16, 17, 1.0).is_err());
        assert!(PolarGrid2D::new(16, 32, 0.0).is_err());
    }

    #[test]
    fn index_roundtrip_and_periodicity() {
        let g = PolarGrid2D::new(8, 16, 1.0).unwrap();
        for idx in 1..g.node_count() {
            let (j, m) = g.coords(idx);
            assert_eq!(g.index(j, m), idx);
            assert_eq!(g.index(j, m + g.n_theta), idx);
        }
        assert_eq!(g.index(0, 5), 0);
    }

    #[test]
    fn circle_of_constant_is_circumference() {
        let g = PolarGrid2D::new(32, 64, 3.0).unwrap();
        let one = vec![1.0; g.node_count()];
        let v = integrate_circle(&g, &one, 2.0).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn circle_of_sin_squared() {
        // oracle: 10^6-point midpoint rule of sin^2 over [0, 2 pi]
        let n = 1_000_000;
        let h = 2.0 * PI / n as f64;
        let oracle: f64 = (0..n).map(|i| ((i as f64 + 0.5) * h).sin().powi(2)).sum::<f64>() * h;
        let g = PolarGrid2D::new(16, 64, 2.0).unwrap();
        let f = field(&g, |_, th| th.sin().powi(2));
        let v = integrate_circle(&g, &f, 1.0).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
        assert!((v - PI).abs() < 1e-12);
    }

    #[test]
    fn circle_of_r_squared() {
        let g = PolarGrid2D::new(24, 32, 3.0).unwrap();
        let f = field(&g, |r, _| r * r);
        // 9 on a circle of length 6π; dividing by r gives the boundary mass 18π
        let v = integrate_circle(&g, &f, 3.0).unwrap();
        assert!((v - 54.0 * PI).abs() < 1e-10, "{v}");
        assert!((v / 3.0 - 18.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn circle_is_exact_for_low_trig_polynomials() {
        let g = PolarGrid2D::new(8, 32, 1.0).unwrap();
        let f = field(&g, |_, th| (3.0 * th).cos() + (7.0 * th).sin() * (2.0 * th).cos());
        assert!(integrate_circle(&g, &f, 0.7).unwrap().abs() < 1e-13);
    }

    #[test]
    fn circle_rejects_bad_radius() {
        let g = PolarGrid2D::new(8, 16, 1.0).unwrap();
        let one = vec![1.0; g.node_count()];
        assert!(integrate_circle(&g, &one, 0.0).is_err());
        assert!(integrate_circle(&g, &one, 1.5).is_err());
        assert!(integrate_disk(&g, &one, -1.0).is_err());
    }

    #[test]
    fn disk_area() {
        let g = PolarGrid2D::new(64, 64, 1.0).unwrap();
        let one = vec![1.0; g.node_count()];
        let v = integrate_disk(&g, &one, 1.0).unwrap();
        assert!((v - PI).abs() < 2.0 * g.dr());
        let zero = vec![0.0; g.node_count()];
        assert_eq!(integrate_disk(&g, &zero, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn disk_of_r_squared_and_refinement_order() {
        let err = |n_r: usize, n_t: usize| {
            let g = PolarGrid2D::new(n_r, n_t, 1.0).unwrap();
            let f = field(&g, |r, _| r * r);
            (integrate_disk(&g, &f, 1.0).unwrap() - PI / 2.0).abs()
        };
        let e256 = err(256, 64);
        assert!(e256 / (PI / 2.0) < 0.01);
        let (e1, e2, e3) = (err(16, 32), err(32, 64), err(64, 128));
        assert!(e2 <= 0.5 * e1 && e3 <= 0.5 * e2);
        let order = (e2 / e3).log2();
        assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn disk_is_continuous_between_rings() {
        let g = PolarGrid2D::new(16, 32, 1.0).unwrap();
        let f = field(&g, |r, th| 1.0 + r * th.cos().abs());
        let r4 = g.radius(4);
        let a = integrate_disk(&g, &f, r4).unwrap();
        let b = integrate_disk(&g, &f, r4 + 1e-9).unwrap();
        let c = integrate_disk(&g, &f, r4 - 1e-9).unwrap();
        assert!((a - b).abs() < 1e-7 && (a - c).abs() < 1e-7);
    }

    #[test]
    fn gradient_of_linear_and_quadratic() {
        let g = PolarGrid2D::new(64, 128, 1.0).unwrap();
        let x = field(&g, |r, th| r * th.cos());
        let gx = gradient_sq(&g, &x);
        let err = gx.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");

        let c = vec![2.5; g.node_count()];
        assert!(gradient_sq(&g, &c).iter().all(|v| v.abs() < 1e-20));

        let q = field(&g, |r, _| r * r);
        let gq = gradient_sq(&g, &q);
        for idx in 1..g.node_count() {
            let (r, _) = g.position(idx);
            if r >= 4.0 * g.dr() {
                let exact = 4.0 * r * r;
                assert!((gq[idx] - exact).abs() / exact < 0.01);
            }
        }
    }

    #[test]
    fn stiffness_annihilates_constants_and_is_symmetric() {
        let g = PolarGrid2D::new(8, 16, 1.0).unwrap();
        let one = vec![1.0; g.node_count()];
        let mut out = vec![0.0; g.node_count()];
        apply_stiffness(&g, &one, &mut out);
        assert!(out.iter().all(|v| v.abs() < 1e-12));
        // symmetry on interior unknowns: e_a^T K e_b == e_b^T K e_a
        let n = g.node_count();
        let mut k = vec![vec![0.0; n]; n];
        for b in 0..n {
            if g.is_boundary(b) {
                continue;
            }
            let mut e = vec![0.0; n];
            e[b] = 1.0;
            let mut col = vec![0.0; n];
            apply_stiffness(&g, &e, &mut col);
            for a in 0..n {
                k[a][b] = col[a];
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !g.is_boundary(a) && !g.is_boundary(b) {
                    assert!((k[a][b] - k[b][a]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn laplacian_of_r_squared_is_four() {
        let g = PolarGrid2D::new(32, 64, 1.0).unwrap();
        let q = field(&g, |r, _| r * r);
        let lap = laplacian(&g, &q);
        for idx in 0..g.node_count() {
            if !g.is_boundary(idx) {
                assert!((lap[idx] - 4.0).abs() < 1e-9, "{} at {idx}", lap[idx]);
            }
        }
    }

    #[test]
    fn dirichlet_integral_of_linear_function() {
        let g = PolarGrid2D::new(128, 256, 1.0).unwrap();
        let x = field(&g, |r, th| r * th.cos());
        let e = dirichlet_integral(&g, &x, 1.0).unwrap();
        assert!((e - PI).abs() / PI < 1e-3, "{e}");
    }
}
