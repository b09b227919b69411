//! Almgren quantities about the origin in the plane:
//!
//! ```text
//! H(r) = (1/r) ∫_{∂B_r} Σ u_i²
//! E(r) = ∫_{B_r} Σ|∇u_i|² + β Σ_{i<j} u_i² u_j²
//! N(r) = E(r) / H(r)
//! ```
//!
//! plus doubling checks, the growth-rate plateau and the product functionals
//! used in Alt–Caffarelli–Friedman type monotonicity arguments.

use std::io::Write;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::{
    fmt_float, gradient_sq, integrate_circle, integrate_disk,
    MultiField, PolarGrid2D,
};
use crate::spectral::gamma;

/// Precomputed node fields for fast evaluation of `H`, `E`, `N` at many radii.
pub struct Frequency<'a> {
    grid: &'a PolarGrid2D,
    beta: f64,
    sum_sq: Vec<f64>,
    coupling: Vec<f64>,
    grad_sq: Vec<f64>,
}

impl<'a> Frequency<'a> {
    pub fn new(field: &'a MultiField, beta: f64) -> Self {
        Self {
            grid: field.grid(),
            beta,
            sum_sq: field.sum_of_squares(),
            coupling: field.pair_coupling(),
            grad_sq: field.gradient_sq(),
        }
    }

    pub fn h(&self, r: f64) -> Result<f64> {
        Ok(integrate_circle(self.grid, &self.sum_sq, r)? / r)
    }

    pub fn e(&self, r: f64) -> Result<f64> {
        let grad = integrate_disk(self.grid, &self.grad_sq, r)?;
        let coupling = if self.beta != 0.0 {
            self.beta * integrate_disk(self.grid, &self.coupling, r)?
        } else {
            0.0
        };
        Ok(grad + coupling)
    }

    pub fn n(&self, r: f64) -> Result<f64> {
        let h = self.h(r)?;
        if !(h > 0.0) {
            return Err(Error::UndefinedFrequency { r });
        }
        Ok(self.e(r)? / h)
    }
}

pub fn compute_h(field: &MultiField, r: f64) -> Result<f64> {
    Frequency::new(field, 0.0).h(r)
}

pub fn compute_e(field: &MultiField, beta: f64, r: f64) -> Result<f64> {
    Frequency::new(field, beta).e(r)
}

pub fn compute_n(field: &MultiField, beta: f64, r: f64) -> Result<f64> {
    Frequency::new(field, beta).n(r)
}

/// `count` radii `r_min · 2^{i/per_doubling}` not exceeding `r_max`, so that
/// the list contains exact ratio-2 pairs.
pub fn log_radii(r_min: f64, r_max: f64, per_doubling: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let r = r_min * 2f64.powf(i as f64 / per_doubling as f64);
        if r > r_max * (1.0 + 1e-12) {
            break;
        }
        out.push(r);
        i += 1;
    }
    out
}

/// Sampled `H`, `E`, `N` along increasing radii.
#[derive(Debug, Clone, Serialize)]
pub struct AlmgrenTrace {
    pub radii: Vec<f64>,
    pub h: Vec<f64>,
    pub e: Vec<f64>,
    pub n: Vec<f64>,
    pub beta: f64,
    pub r_max: f64,
    /// Radius where `H` vanished and the trace was cut, if any.
    pub truncated_at: Option<f64>,
}

impl AlmgrenTrace {
    /// `max(0, N(r_i) − N(r_{i+1}))` for consecutive radii.
    pub fn violations(&self) -> Vec<f64> {
        self.n.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect()
    }

    /// Largest decrease of `N` between consecutive radii inside `[lo, hi]`.
    pub fn max_violation_in(&self, lo: f64, hi: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.radii.len().saturating_sub(1) {
            if self.radii[i] >= lo && self.radii[i + 1] <= hi {
                worst = worst.max(self.n[i] - self.n[i + 1]);
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r", "H", "E", "N"])?;
        for i in 0..self.radii.len() {
            w.write_record([
                fmt_float(self.radii[i]),
                fmt_float(self.h[i]),
                fmt_float(self.e[i]),
                fmt_float(self.n[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn frequency_trace(field: &MultiField, beta: f64, radii: &[f64]) -> Result<AlmgrenTrace> {
    if radii.is_empty() {
        return domain("no radii given");
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return domain("radii must be strictly increasing");
    }
    let g = field.grid();
    let freq = Frequency::new(field, beta);
    let mut t = AlmgrenTrace {
        radii: Vec::new(),
        h: Vec::new(),
        e: Vec::new(),
        n: Vec::new(),
        beta,
        r_max: g.r_max,
        truncated_at: None,
    };
    for &r in radii {
        let h = freq.h(r)?;
        if !(h > 0.0) {
            t.truncated_at = Some(r);
            break;
        }
        let e = freq.e(r)?;
        t.radii.push(r);
        t.h.push(h);
        t.e.push(e);
        t.n.push(e / h);
    }
    Ok(t)
}

/// One ordered radius pair of a doubling check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DoublingPair {
    pub r1: f64,
    pub r2: f64,
    /// `[H(r₂)/r₂^{2N(r₁)}] / [H(r₁)/r₁^{2N(r₁)}] − 1`; nonnegative when the
    /// lower bound holds.
    pub lower_margin: f64,
    /// `1 − [H(r₂)/r₂^{2d}] / [e^d H(r₁)/r₁^{2d}]`; nonnegative when the
    /// upper bound holds.
    pub upper_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingReport {
    pub d: f64,
    pub pairs: Vec<DoublingPair>,
    pub worst_lower: f64,
    pub worst_upper: f64,
}

impl DoublingReport {
    /// Worst margins over pairs with `r₂/r₁` equal to `ratio` (relative 1e-9).
    pub fn worst_for_ratio(&self, ratio: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut up = f64::INFINITY;
        for p in &self.pairs {
            if ((p.r2 / p.r1) / ratio - 1.0).abs() < 1e-9 {
                lo = lo.min(p.lower_margin);
                up = up.min(p.upper_margin);
            }
        }
        (lo, up)
    }

    pub fn passes(&self, slack: f64) -> bool {
        self.worst_lower >= -slack && self.worst_upper >= -slack
    }
}

/// Both doubling inequalities on every ordered pair `r₁ < r₂` of the trace.
///
/// Lower bound: `H(r)/r^{2N(r₀)}` is non-decreasing for `r ≥ r₀`, checked
/// with `r₀ = r₁`. Upper bound: if `N ≤ d` then
/// `H(r₂)/r₂^{2d} ≤ e^d H(r₁)/r₁^{2d}`.
pub fn check_doubling(trace: &AlmgrenTrace, d: f64) -> DoublingReport {
    let mut pairs = Vec::new();
    let (mut worst_lower, mut worst_upper) = (f64::INFINITY, f64::INFINITY);
    let m = trace.radii.len();
    for a in 0..m {
        for b in a + 1..m {
            let (r1, r2) = (trace.radii[a], trace.radii[b]);
            let (h1, h2) = (trace.h[a], trace.h[b]);
            let n0 = trace.n[a];
            let lower = ((h2.ln() - 2.0 * n0 * r2.ln()) - (h1.ln() - 2.0 * n0 * r1.ln())).exp() - 1.0;
            let upper =
                1.0 - ((h2.ln() - 2.0 * d * r2.ln()) - (d + h1.ln() - 2.0 * d * r1.ln())).exp();
            worst_lower = worst_lower.min(lower);
            worst_upper = worst_upper.min(upper);
            pairs.push(DoublingPair {
                r1,
                r2,
                lower_margin: lower,
                upper_margin: upper,
            });
        }
    }
    DoublingReport {
        d,
        pairs,
        worst_lower,
        worst_upper,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthRate {
    pub d_hat: f64,
    /// `max − min` of `N` over the plateau window.
    pub plateau_quality: f64,
    pub low_confidence: bool,
}

/// Median of `N` over the top third of the radii, after dropping radii
/// beyond `0.9 r_max` where truncation pollutes the frequency.
pub fn growth_rate(trace: &AlmgrenTrace) -> Result<GrowthRate> {
    if trace.radii.len() < 10 {
        return domain(format!("growth rate needs at least 10 radii, got {}", trace.radii.len()));
    }
    let kept: Vec<f64> = trace
        .radii
        .iter()
        .zip(&trace.n)
        .filter(|(r, _)| **r <= 0.9 * trace.r_max * (1.0 + 1e-12))
        .map(|(_, n)| *n)
        .collect();
    if kept.len() < 3 {
        return domain("fewer than 3 radii inside 0.9 r_max");
    }
    let mut top: Vec<f64> = kept[kept.len() - kept.len().div_ceil(3)..].to_vec();
    let lo = top.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = top.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top.sort_by(f64::total_cmp);
    let mid = top.len() / 2;
    let d_hat = if top.len() % 2 == 1 {
        top[mid]
    } else {
        0.5 * (top[mid - 1] + top[mid])
    };
    Ok(GrowthRate {
        d_hat,
        plateau_quality: hi - lo,
        low_confidence: hi - lo > 0.2,
    })
}

/// The radial weight `f`: `((2−N)/2) r² + N/2` on `(0, 1]`, `r^{2−N}` beyond.
/// It is `C¹` and `f(|x|)` is superharmonic in `ℝ^N`; in the plane `f ≡ 1`.
pub fn acf_weight(r: f64, dim: u32) -> f64 {
    let n = dim as f64;
    if r <= 1.0 {
        (2.0 - n) / 2.0 * r * r + n / 2.0
    } else {
        r.powf(2.0 - n)
    }
}

/// Product functionals for a group of components.
#[derive(Debug, Clone, Serialize)]
pub struct AcfDiagnostics {
    pub radii: Vec<f64>,
    pub group: Vec<usize>,
    pub q: f64,
    /// `Λ_i(r)` per group member (outer index) and radius.
    pub lambda: Vec<Vec<f64>>,
    /// `J_i(r)` per group member and radius.
    pub j: Vec<Vec<f64>>,
    /// `∏_i r^{−q} J_i(r)`.
    pub product: Vec<f64>,
    /// `(bound − J_i)/bound` for `J_i ≤ r/(2γ(Λ_i)) ∫_{∂B_r} f(|∇u_i|² + u_i² g_i)`.
    pub bound_margin: Vec<Vec<f64>>,
    /// Smallest sampled radius from which the product never drops by more
    /// than the relative slack.
    pub monotone_from: Option<f64>,
    pub slack: f64,
}

impl AcfDiagnostics {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["r".to_string()];
        header.extend(self.group.iter().map(|i| format!("Lambda_{}", i + 1)));
        header.extend(self.group.iter().map(|i| format!("J_{}", i + 1)));
        header.push("product".into());
        w.write_record(&header)?;
        for (a, r) in self.radii.iter().enumerate() {
            let mut rec = vec![fmt_float(*r)];
            rec.extend(self.lambda.iter().map(|l| fmt_float(l[a])));
            rec.extend(self.j.iter().map(|l| fmt_float(l[a])));
            rec.push(fmt_float(self.product[a]));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Worst relative drop `max(0, 1 − P(r_{a+1})/P(r_a))` over radii in `[lo, hi]`.
    pub fn worst_drop_in(&self, lo: f64, hi: f64) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.radii.len().saturating_sub(1) {
            if self.radii[a] >= lo && self.radii[a + 1] <= hi {
                worst = worst.max(1.0 - self.product[a + 1] / self.product[a]);
            }
        }
        worst
    }

    pub fn worst_bound_margin(&self) -> f64 {
        self.bound_margin.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `(∂_θ u / r)²`, the squared tangential derivative, by centered differences.
fn tangential_sq(grid: &PolarGrid2D, u: &[f64]) -> Vec<f64> {
    let n = grid.n_theta;
    let dt = grid.dtheta();
    let mut out = vec![0.0; grid.node_count()];
    for j in 1..=grid.n_r {
        let r = grid.radius(j);
        for m in 0..n {
            let d = (u[grid.index(j, m + 1)] - u[grid.index(j, m + n - 1)]) / (2.0 * dt * r);
            out[grid.index(j, m)] = d * d;
        }
    }
    out
}

/// `Λ_i`, `J_i` and `∏ r^{−q} J_i` on radii `> 1`, in the plane.
///
/// With `g_i = β Σ_{j≠i} u_j²`:
/// `Λ_i(r) = r² ∫_{∂B_r}(|∇_θ u_i|² + u_i² g_i) / ∫_{∂B_r} u_i²` and
/// `J_i(r) = ∫_{B_r} f(|x|)(|∇u_i|² + u_i² g_i)`.
pub fn acf_diagnostics(
    field: &MultiField,
    beta: f64,
    group: &[usize],
    q: f64,
    radii: &[f64],
    slack: f64,
) -> Result<AcfDiagnostics> {
    if !(q > 0.0) {
        return domain("exponent q must be positive");
    }
    if group.is_empty() {
        return domain("component group is empty");
    }
    if let Some(bad) = group.iter().find(|&&i| i >= field.k()) {
        return domain(format!("component {bad} does not exist"));
    }
    let radii: Vec<f64> = radii.iter().cloned().filter(|&r| r > 1.0).collect();
    if radii.is_empty() {
        return domain("no radii above 1");
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return domain("radii must be strictly increasing");
    }
    let g = field.grid();
    let dim = 2;
    let weight: Vec<f64> = (0..g.node_count())
        .map(|idx| acf_weight(g.position(idx).0, dim))
        .collect();

    let mut lambda = Vec::new();
    let mut jv = Vec::new();
    let mut margins = Vec::new();
    for &i in group {
        let u = field.component(i);
        let mut gi = vec![0.0; g.node_count()];
        for (k, c) in field.components().iter().enumerate() {
            if k != i {
                for (a, v) in gi.iter_mut().zip(c) {
                    *a += beta * v * v;
                }
            }
        }
        let grad = gradient_sq(g, u);
        let tang = tangential_sq(g, u);
        let pot: Vec<f64> = u.iter().zip(&gi).map(|(u, g)| u * u * g).collect();
        let bulk: Vec<f64> = (0..g.node_count())
            .map(|a| weight[a] * (grad[a] + pot[a]))
            .collect();
        let tang_pot: Vec<f64> = tang.iter().zip(&pot).map(|(a, b)| a + b).collect();
        let mass: Vec<f64> = u.iter().map(|v| v * v).collect();

        let mut li = Vec::with_capacity(radii.len());
        let mut ji = Vec::with_capacity(radii.len());
        let mut mi = Vec::with_capacity(radii.len());
        for &r in &radii {
            let m = integrate_circle(g, &mass, r)?;
            if !(m > 0.0) {
                return Err(Error::UndefinedFrequency { r });
            }
            let lam = r * r * integrate_circle(g, &tang_pot, r)? / m;
            let j = integrate_disk(g, &bulk, r)?;
            let bound = r / (2.0 * gamma(lam, dim)?) * integrate_circle(g, &bulk, r)?;
            li.push(lam);
            ji.push(j);
            mi.push((bound - j) / bound);
        }
        lambda.push(li);
        jv.push(ji);
        margins.push(mi);
    }
    let product: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(a, r)| jv.iter().map(|j| j[a] / r.powf(q)).product())
        .collect();

    // scan backwards for the start of the monotone tail
    let mut monotone_from = None;
    for a in (0..radii.len()).rev() {
        if a + 1 < radii.len() && product[a + 1] < product[a] * (1.0 - slack) {
            break;
        }
        monotone_from = Some(radii[a]);
    }
    Ok(AcfDiagnostics {
        radii,
        group: group.to_vec(),
        q,
        lambda,
        j: jv,
        product,
        bound_margin: margins,
        monotone_from,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{ConeProfile, HalfInt};
    use std::f64::consts::PI;

    fn psi_pair(d2: u32, g: PolarGrid2D) -> MultiField {
        ConeProfile::alternating(HalfInt::from_twice(d2).unwrap(), 0.0)
            .to_field(g, if d2 % 2 == 1 && d2 > 1 { 3 } else { d2.min(2) as usize }, 1.0)
            .unwrap()
    }

    #[test]
    fn psi_one_pair_values() {
        // H = r^{2d}, E = d r^{2d}
        let g = PolarGrid2D::new(256, 384, 2.0).unwrap();
        let f = psi_pair(2, g);
        let fr = Frequency::new(&f, 50.0);
        assert!((fr.h(2.0).unwrap() - 4.0).abs() < 0.04);
        assert!((fr.e(2.0).unwrap() - 4.0).abs() < 0.04);
        assert!((fr.n(2.0).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn constant_field_has_zero_frequency() {
        let g = PolarGrid2D::new(32, 64, 1.0).unwrap();
        let f = MultiField::from_fn(g, 3, |i, _, _| if i == 0 { 2.0 } else { 0.0 });
        // H = (1/r) ∫_{∂B_r} c² = 2π c²
        assert!((compute_h(&f, 0.7).unwrap() - 8.0 * PI).abs() < 1e-12);
        assert!(compute_e(&f, 5.0, 0.7).unwrap().abs() < 1e-12);
        assert!(compute_n(&f, 5.0, 0.7).unwrap().abs() < 1e-12);
        let z = MultiField::zeros(g, 1);
        assert!(matches!(compute_n(&z, 1.0, 0.5), Err(Error::UndefinedFrequency { .. })));
    }

    #[test]
    fn three_halves_split_has_frequency_three_halves() {
        let g = PolarGrid2D::new(256, 384, 1.0).unwrap();
        let f = ConeProfile::one_per_cone(HalfInt::from_twice(3).unwrap(), 0.0)
            .to_field(g, 3, 1.0)
            .unwrap();
        let n = compute_n(&f, 10.0, 1.0).unwrap();
        assert!((n - 1.5).abs() < 0.015, "{n}");
    }

    #[test]
    fn shifted_linear_function_frequency_increases() {
        // symbolic oracle for u = 2 + r cos θ: H = 8π + πr², E = πr², N = r²/(8 + r²)
        let g = PolarGrid2D::new(128, 128, 1.0).unwrap();
        let f = MultiField::from_fn(g, 1, |_, r, t| 2.0 + r * t.cos());
        let radii = log_radii(0.05, 1.0, 4);
        let tr = frequency_trace(&f, 0.0, &radii).unwrap();
        assert!(tr.violations().iter().all(|v| *v == 0.0));
        for (r, n) in tr.radii.iter().zip(&tr.n) {
            let exact = r * r / (8.0 + r * r);
            assert!((n - exact).abs() < 2e-3 * exact.max(0.01), "{r} {n} {exact}");
        }
    }

    #[test]
    fn log_radii_contain_doublings() {
        let r = log_radii(0.1, 0.8, 3);
        assert_eq!(r.len(), 10);
        assert!((r[3] / r[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_on_homogeneous_profile_and_counterexample() {
        let g = PolarGrid2D::new(256, 384, 1.0).unwrap();
        let f = psi_pair(4, g);
        let tr = frequency_trace(&f, 0.0, &log_radii(0.1, 0.9, 4)).unwrap();
        let rep = check_doubling(&tr, 2.0);
        assert!(rep.worst_lower > -1e-3, "{}", rep.worst_lower);
        assert!(rep.worst_upper > 0.0);
        // H(r)/r^{2d} collapses by more than e^d: not a valid frequency-bounded trace
        let bad = AlmgrenTrace {
            radii: vec![0.1, 0.2],
            h: vec![1.0, 1e-3],
            e: vec![0.0, 0.0],
            n: vec![3.0, 3.0],
            beta: 0.0,
            r_max: 1.0,
            truncated_at: None,
        };
        assert!(!check_doubling(&bad, 1.0).passes(1e-2));
    }

    #[test]
    fn growth_rate_of_psi_two_and_constant() {
        let g = PolarGrid2D::new(256, 384, 1.0).unwrap();
        let tr = frequency_trace(&psi_pair(4, g), 0.0, &log_radii(0.05, 1.0, 6)).unwrap();
        let gr = growth_rate(&tr).unwrap();
        assert!((gr.d_hat - 2.0).abs() < 0.02 && !gr.low_confidence);
        let c = MultiField::from_fn(g, 1, |_, _, _| 1.0);
        let tr = frequency_trace(&c, 0.0, &log_radii(0.05, 1.0, 6)).unwrap();
        assert!(growth_rate(&tr).unwrap().d_hat.abs() < 1e-12);
        let short = frequency_trace(&c, 0.0, &[0.1, 0.2]).unwrap();
        assert!(growth_rate(&short).is_err());
    }

    #[test]
    fn weight_is_continuous_and_superharmonic() {
        for dim in 2..6 {
            assert!((acf_weight(1.0, dim) - acf_weight(1.0 + 1e-12, dim)).abs() < 1e-10);
            // radial Laplacian f'' + (N−1)/r f' by finite differences, away from r = 1
            for &r in &[0.3, 0.7, 1.5, 3.0] {
                let h = 1e-4;
                let f = |x: f64| acf_weight(x, dim);
                let lap = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h)
                    + (dim as f64 - 1.0) / r * (f(r + h) - f(r - h)) / (2.0 * h);
                assert!(lap <= 1e-4, "dim {dim} r {r}: {lap}");
            }
        }
        assert_eq!(acf_weight(0.5, 2), 1.0);
    }

    #[test]
    fn acf_on_disjoint_linear_pair() {
        let g = PolarGrid2D::new(256, 384, 4.0).unwrap();
        let f = psi_pair(2, g);
        let radii = log_radii(1.0 + 1e-9, 3.6, 8);
        let acf = acf_diagnostics(&f, 0.0, &[0, 1], 1.9, &radii, 1e-3).unwrap();
        assert!(acf.worst_drop_in(1.0, 3.6) < 1e-3);
        // symbolic: J_i(r) = ∫_{half disk} 1/π = r²/2
        for (a, r) in acf.radii.iter().enumerate() {
            assert!((acf.j[0][a] - r * r / 2.0).abs() < 0.01 * r * r / 2.0);
        }
        assert!(acf_diagnostics(&f, 0.0, &[], 1.9, &radii, 1e-3).is_err());
        assert!(acf_diagnostics(&f, 0.0, &[0], 1.9, &[0.5], 1e-3).is_err());
    }
}
