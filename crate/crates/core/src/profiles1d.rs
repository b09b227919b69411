//! The one-dimensional two-component profile
//!
//! ```text
//! u'' = u v²,   v'' = u² v,   u(0) = v(0) = a,   u'(0) = -v'(0) = m,
//! ```
//!
//! found by shooting on `m`, and the radial decay experiment for
//! `v'' + ((N−1)/ρ) v' = K v`.

use std::io::Write;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::{fmt_float, MultiField, PolarGrid2D};

/// How a shot ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotTag {
    /// `v` reached zero: the initial slope was too steep.
    VCrossedZero,
    /// `v` turned around and started growing: the slope was too shallow.
    VRegrew,
    /// Integrated to the end of the window with `v > 0`, `v' < 0`.
    Reached,
    /// Non-finite values.
    Overflow,
}

impl ShotTag {
    /// Sign of the bisection decision: `Some(true)` means decrease `m`.
    fn too_large(self) -> Option<bool> {
        match self {
            ShotTag::VCrossedZero => Some(true),
            ShotTag::VRegrew | ShotTag::Overflow => Some(false),
            ShotTag::Reached => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeTrajectory {
    pub h: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Shooting parameter `u'(0)`.
    pub m: f64,
    /// Slope `u'(X/2)`; `u(x) − b x` tends to `intercept`.
    pub b: f64,
    pub intercept: f64,
    pub tag: ShotTag,
    /// `sup_{|x| ≤ X/2} |u(x) − v(−x)|`, when both halves were integrated.
    pub symmetry_defect: Option<f64>,
    /// Distance from the origin where the decaying component was handed to
    /// the asymptotic tail.
    pub tail_from: Option<f64>,
}

impl OdeTrajectory {
    /// CSV with header `x,u,v`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "u", "v"])?;
        for i in 0..self.x.len() {
            w.write_record([fmt_float(self.x[i]), fmt_float(self.u[i]), fmt_float(self.v[i])])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Sup over interior grid points with `|x| ≤ limit` of the second
    /// difference residual of both equations.
    pub fn ode_residual(&self, limit: f64) -> f64 {
        let h2 = self.h * self.h;
        let mut worst = 0.0f64;
        for i in 1..self.x.len() - 1 {
            if self.x[i].abs() > limit {
                continue;
            }
            let (u, v) = (self.u[i], self.v[i]);
            let du = (self.u[i + 1] - 2.0 * u + self.u[i - 1]) / h2 - u * v * v;
            let dv = (self.v[i + 1] - 2.0 * v + self.v[i - 1]) / h2 - u * u * v;
            worst = worst.max(du.abs()).max(dv.abs());
        }
        worst
    }

    /// Index of the grid point closest to `x`.
    pub fn index_of(&self, x: f64) -> usize {
        let i = ((x - self.x[0]) / self.h).round();
        (i.max(0.0) as usize).min(self.x.len() - 1)
    }

    /// Linear interpolation of `u` (component 0) or `v` (component 1).
    pub fn value_at(&self, component: usize, x: f64) -> f64 {
        let vals = if component == 0 { &self.u } else { &self.v };
        let last = self.x.len() - 1;
        let s = ((x - self.x[0]) / self.h).clamp(0.0, last as f64);
        let i = (s.floor() as usize).min(last - 1);
        let t = s - i as f64;
        vals[i] + t * (vals[i + 1] - vals[i])
    }

    /// The trivial extension `(u(x₁), v(x₁))` sampled on a polar grid, a
    /// solution of the planar system with β = 1.
    pub fn to_plane_field(&self, grid: PolarGrid2D) -> Result<MultiField> {
        grid.validate()?;
        let reach = self.x[0].abs().min(self.x[self.x.len() - 1]);
        if grid.r_max > reach * (1.0 + 1e-12) {
            return domain(format!("grid radius {} exceeds the profile window {reach}", grid.r_max));
        }
        Ok(MultiField::from_fn(grid, 2, |c, r, th| self.value_at(c, r * th.cos())))
    }
}

type State = [f64; 4];

#[inline]
fn rhs(y: &State) -> State {
    [y[2], y[3], y[0] * y[1] * y[1], y[0] * y[0] * y[1]]
}

#[inline]
fn rk4(y: &State, h: f64) -> State {
    let add = |a: &State, b: &State, s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]];
    let k1 = rhs(y);
    let k2 = rhs(&add(y, &k1, 0.5 * h));
    let k3 = rhs(&add(y, &k2, 0.5 * h));
    let k4 = rhs(&add(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrate forward from `y0` over `steps` steps, stopping at the first
/// event of the decaying component `dec` (0 for `u`, 1 for `v`).
fn integrate(y0: State, h: f64, steps: usize, dec: usize) -> (Vec<State>, ShotTag) {
    let mut ys = Vec::with_capacity(steps + 1);
    ys.push(y0);
    let mut y = y0;
    for _ in 0..steps {
        y = rk4(&y, h);
        if y.iter().any(|v| !v.is_finite()) {
            return (ys, ShotTag::Overflow);
        }
        ys.push(y);
        if y[dec] <= 0.0 {
            return (ys, ShotTag::VCrossedZero);
        }
        if y[dec + 2] >= 0.0 {
            return (ys, ShotTag::VRegrew);
        }
    }
    (ys, ShotTag::Reached)
}

fn check_params(a: f64, x_max: f64, h: f64) -> Result<usize> {
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("a = {a} must be positive"));
    }
    if !(h > 0.0 && x_max > 0.0 && h < x_max) {
        return domain(format!("need 0 < h = {h} < X = {x_max}"));
    }
    Ok((x_max / h).round() as usize)
}

/// One forward shot on `[0, X]` with fixed-step RK4.
pub fn shoot(m: f64, a: f64, x_max: f64, h: f64) -> Result<OdeTrajectory> {
    let steps = check_params(a, x_max, h)?;
    if !(m >= 0.0 && m.is_finite()) {
        return domain(format!("m = {m} must be nonnegative"));
    }
    let (ys, tag) = integrate([a, a, m, -m], h, steps, 1);
    let x: Vec<f64> = (0..ys.len()).map(|i| i as f64 * h).collect();
    let half = (ys.len() - 1) / 2;
    let b = ys[half][2];
    Ok(OdeTrajectory {
        h,
        u: ys.iter().map(|y| y[0]).collect(),
        v: ys.iter().map(|y| y[1]).collect(),
        m,
        b,
        intercept: ys[half][0] - b * x[half],
        x,
        tag,
        symmetry_defect: None,
        tail_from: None,
    })
}

/// Relative level of the decaying component below which it is replaced by
/// its asymptotic tail. Shooting errors grow like `δm / v`, so below about
/// `sqrt(ε)` the integrated tail is noise.
const TAIL_LEVEL: f64 = 1e-6;

/// Integrate one half-line from `(a, a, s_u, s_v)`; the component with the
/// negative slope decays. Below `TAIL_LEVEL · a` it follows the WKB branch
/// `v ≈ v_c (u_c/u)^{1/2} exp(−∫ u)` driven by the growing component,
/// which keeps integrating with the coupling from that branch.
fn half_line(a: f64, s_u: f64, s_v: f64, h: f64, steps: usize) -> Result<(Vec<State>, Option<usize>)> {
    let dec = if s_u < 0.0 { 0 } else { 1 };
    let gro = 1 - dec;
    let level = TAIL_LEVEL * a;
    let mut ys = Vec::with_capacity(steps + 1);
    let mut y = [a, a, s_u, s_v];
    ys.push(y);
    let mut cut = None;
    for i in 0..steps {
        let next = rk4(&y, h);
        if next[dec] < level || next[dec + 2] >= 0.0 || next[dec] <= 0.0 {
            cut = Some(i);
            break;
        }
        y = next;
        ys.push(y);
    }
    let Some(start) = cut else {
        return Ok((ys, None));
    };
    if y[dec] > 10.0 * level {
        return Err(Error::NotConverged {
            iterations: start,
            last_change: y[dec] / a,
        });
    }
    // tail: state (g, g', L) with L = ∫ g from the cut
    let (gc, vc) = (y[gro], y[dec]);
    let tail_v = |g: f64, l: f64| vc * (gc / g).sqrt() * (-l).exp();
    let f = |s: &[f64; 3]| {
        let v = tail_v(s[0], s[2]);
        [s[1], s[0] * v * v, s[0]]
    };
    let mut s = [y[gro], y[gro + 2], 0.0];
    for _ in start..steps {
        let add = |a: &[f64; 3], b: &[f64; 3], t: f64| [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]];
        let k1 = f(&s);
        let k2 = f(&add(&s, &k1, 0.5 * h));
        let k3 = f(&add(&s, &k2, 0.5 * h));
        let k4 = f(&add(&s, &k3, h));
        for j in 0..3 {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let v = tail_v(s[0], s[2]);
        let dv = -v * (s[0] + 0.5 * s[1] / s[0]);
        let mut st = [0.0; 4];
        st[gro] = s[0];
        st[gro + 2] = s[1];
        st[dec] = v;
        st[dec + 2] = dv;
        ys.push(st);
    }
    Ok((ys, Some(start)))
}

/// Bisection on `m` between the two shooting outcomes, then the profile on
/// `[−X, X]` with both halves integrated independently.
pub fn find_profile(a: f64, x_max: f64, tol: f64) -> Result<OdeTrajectory> {
    find_profile_with_step(a, x_max, 1e-3 / a, tol)
}

pub fn find_profile_with_step(a: f64, x_max: f64, h: f64, tol: f64) -> Result<OdeTrajectory> {
    let steps = check_params(a, x_max, h)?;
    let tag_of = |m: f64| integrate([a, a, m, -m], h, steps, 1).1;
    let decide = |m: f64| {
        tag_of(m)
            .too_large()
            .ok_or_else(|| Error::Config(format!("shot with m = {m} reached X = {x_max}; window too short")))
    };

    let mut lo = 0.0;
    if decide(lo)? {
        return Err(Error::Config("m = 0 already overshoots".into()));
    }
    // m scales like a² under u ↦ λ u(λ x)
    let mut hi = a * a;
    let mut found = false;
    for _ in 0..64 {
        if decide(hi)? {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return Err(Error::Config(format!("no overshooting slope found up to m = {hi:e}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if decide(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let m = 0.5 * (lo + hi);

    let (right, cut_r) = half_line(a, m, -m, h, steps)?;
    // left half in s = −x: (u, v)(−s) solves the same system with slopes (−m, m)
    let (left, cut_l) = half_line(a, -m, m, h, steps)?;
    let n = 2 * steps + 1;
    let mut x = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for i in (1..=steps).rev() {
        x.push(-(i as f64) * h);
        u.push(left[i][0]);
        v.push(left[i][1]);
    }
    for (i, y) in right.iter().enumerate() {
        x.push(i as f64 * h);
        u.push(y[0]);
        v.push(y[1]);
    }
    let half = steps / 2;
    let mut defect = 0.0f64;
    for i in 0..=half {
        defect = defect.max((right[i][0] - left[i][1]).abs());
        defect = defect.max((left[i][0] - right[i][1]).abs());
    }
    let b = right[half][2];
    let traj = OdeTrajectory {
        h,
        b,
        intercept: right[half][0] - b * half as f64 * h,
        x,
        u,
        v,
        m,
        tag: ShotTag::Reached,
        symmetry_defect: Some(defect),
        tail_from: match (cut_r, cut_l) {
            (Some(r), Some(l)) => Some((r.min(l) as f64 + 1.0) * h),
            (Some(c), None) | (None, Some(c)) => Some((c as f64 + 1.0) * h),
            (None, None) => None,
        },
    };
    if defect > tol {
        return Err(Error::NotConverged {
            iterations: 200,
            last_change: defect,
        });
    }
    Ok(traj)
}

/// Radial decay experiment on `B_{2r}` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayPoint {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub r: f64,
    pub n: u32,
    /// `sup_{B_r} v = v(r)`.
    pub sup_br: f64,
}

/// `v(r)` for `v'' + ((n−1)/ρ) v' = K v` on `(0, 2r)`, `v'(0) = 0`,
/// `v(2r) = A`. The problem is linear, so `w` with `w(0) = 1` is integrated
/// (from a series start off the singular point) and rescaled.
pub fn decay_experiment(k: f64, a: f64, r: f64, n: u32) -> Result<DecayPoint> {
    if !(k >= 0.0 && a > 0.0 && r > 0.0 && n >= 1) || !(k.is_finite() && a.is_finite() && r.is_finite()) {
        return domain(format!("need K ≥ 0, A > 0, r > 0, N ≥ 1 (got {k}, {a}, {r}, {n})"));
    }
    let nf = n as f64;
    let steps = 20_000usize;
    let h = 2.0 * r / steps as f64;
    // series w = 1 + Kρ²/(2N) + K²ρ⁴/(8N(N+2)) at ρ = h
    let rho0 = h;
    let c2 = k / (2.0 * nf);
    let c4 = k * k / (8.0 * nf * (nf + 2.0));
    let mut y = [
        1.0 + c2 * rho0 * rho0 + c4 * rho0.powi(4),
        2.0 * c2 * rho0 + 4.0 * c4 * rho0.powi(3),
    ];
    let f = |rho: f64, y: &[f64; 2]| [y[1], k * y[0] - (nf - 1.0) / rho * y[1]];
    let mut w_r = f64::NAN;
    let mut rho = rho0;
    for i in 1..steps {
        if i == steps / 2 {
            w_r = y[0];
        }
        let k1 = f(rho, &y);
        let k2 = f(rho + 0.5 * h, &[y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f(rho + 0.5 * h, &[y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f(rho + h, &[y[0] + h * k3[0], y[1] + h * k3[1]]);
        for j in 0..2 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        rho = (i + 1) as f64 * h;
    }
    Ok(DecayPoint {
        k,
        a,
        r,
        n,
        sup_br: a * w_r / y[0],
    })
}

/// Least-squares line `log sup_{B_r} v = c + s √K`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub points: Vec<DecayPoint>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square fit residual relative to the spread of `log v`.
    pub relative_residual: f64,
    /// `|slope + r| / r`.
    pub slope_error: f64,
}

pub fn decay_fit(ks: &[f64], a: f64, r: f64, n: u32) -> Result<DecayFit> {
    if ks.len() < 2 {
        return domain("the slope fit needs at least two values of K");
    }
    let points: Vec<DecayPoint> = ks.iter().map(|&k| decay_experiment(k, a, r, n)).collect::<Result<_>>()?;
    let xs: Vec<f64> = ks.iter().map(|k| k.sqrt()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sup_br.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return domain("values of K must not all coincide");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DecayFit {
        points,
        slope,
        intercept,
        relative_residual: if spread > 0.0 { rms / spread } else { 0.0 },
        slope_error: (slope + r).abs() / r,
    })
}

/// CSV with header `K,A,r,sup_Br`.
pub fn write_decay_csv<W: Write>(points: &[DecayPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["K", "A", "r", "sup_Br"])?;
    for p in points {
        w.write_record([fmt_float(p.k), fmt_float(p.a), fmt_float(p.r), fmt_float(p.sup_br)])?;
    }
    w.flush()?;
    Ok(())
}
