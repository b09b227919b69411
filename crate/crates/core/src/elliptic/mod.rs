//! The β-penalised competitive system on a disk with Dirichlet data.
//!
//! Solutions are minimisers of
//!
//! ```text
//! J(u) = ∫ ½ Σ|∇u_i|² + (β/2) Σ_{i<j} u_i² u_j²
//! ```
//!
//! over nonnegative fields with a fixed trace on the outer ring. The
//! Dirichlet part uses the edge-based form of [`crate::grid`], so the
//! discrete Euler–Lagrange equation is `K u_i + W c_i u_i = 0` with
//! `c_i = β Σ_{j≠i} u_j²` and `W` the node areas.

mod newton;
mod poisson;
mod solver;
mod symmetry;

use serde::{Deserialize, Serialize};

use crate::cones::{ConeProfile, HalfInt};
use crate::error::{domain, Result};
use crate::grid::{apply_stiffness, dirichlet_integral_cumulative, MultiField, PolarGrid2D};

pub use poisson::PolarPoisson;
pub use solver::{harmonic_extension, solve_dirichlet, solve_dirichlet_from, StageReport};
pub use symmetry::equivariance_project;

/// How a candidate update is blended into the current iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `u ← (1 − τ) u + τ z` with `z` the candidate.
    Fixed { tau: f64 },
    /// Start from the full step and halve until the energy does not go up.
    Backtracking,
}

/// Search direction of an outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Projected Newton step on all components at once, falling back to a
    /// block sweep when the step is rejected.
    Newton,
    /// One sweep of exact block minimisers, component by component.
    BlockSweep,
}

fn default_direction() -> Direction {
    Direction::Newton
}
fn default_tol_grad() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    5000
}
fn default_step_rule() -> StepRule {
    StepRule::Backtracking
}
fn default_cg_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub beta: f64,
    /// Continuation values of β, strictly increasing and ending at `beta`.
    /// Empty means `[beta]`.
    #[serde(default)]
    pub beta_schedule: Vec<f64>,
    /// Sup norm of the projected residual at which a stage stops.
    #[serde(default = "default_tol_grad")]
    pub tol_grad: f64,
    /// Sweep budget shared by all stages.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_step_rule")]
    pub step_rule: StepRule,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    /// Relative tolerance of the inner conjugate-gradient solves.
    #[serde(default = "default_cg_tol")]
    pub cg_tol: f64,
    /// Keep the iterate equivariant under the symmetry group of this degree
    /// by projecting after every iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<HalfInt>,
}

impl SolveConfig {
    /// Geometric continuation `1, 5, 25, …` below `beta`, then `beta`.
    pub fn continuation(beta: f64) -> Self {
        let mut schedule = Vec::new();
        let mut b = 1.0;
        while b < beta * (1.0 - 1e-12) {
            schedule.push(b);
            b *= 5.0;
        }
        schedule.push(beta);
        Self {
            beta,
            beta_schedule: schedule,
            tol_grad: default_tol_grad(),
            max_iter: default_max_iter(),
            step_rule: default_step_rule(),
            direction: default_direction(),
            cg_tol: default_cg_tol(),
            symmetry: None,
        }
    }

    pub fn schedule(&self) -> Vec<f64> {
        if self.beta_schedule.is_empty() {
            vec![self.beta]
        } else {
            self.beta_schedule.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return domain("beta must be finite and nonnegative");
        }
        let s = self.schedule();
        if s.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return domain("beta schedule entries must be finite and nonnegative");
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return domain("beta schedule must be strictly increasing");
        }
        if (s[s.len() - 1] - self.beta).abs() > 1e-12 * self.beta.max(1.0) {
            return domain("beta schedule must end at beta");
        }
        if !(self.tol_grad > 0.0) {
            return domain("tol_grad must be positive");
        }
        if self.max_iter == 0 {
            return domain("max_iter must be at least 1");
        }
        if let StepRule::Fixed { tau } = self.step_rule {
            if !(tau > 0.0 && tau <= 1.0) {
                return domain("fixed step must lie in (0, 1]");
            }
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return domain("cg_tol must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryKind {
    /// Trace of a cone profile at `r_max`.
    Profile(ConeProfile),
    /// One array of `n_theta` values per component.
    Explicit { traces: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub kind: BoundaryKind,
    pub amplitude: f64,
}

impl BoundarySpec {
    pub fn profile(profile: ConeProfile, amplitude: f64) -> Self {
        Self {
            kind: BoundaryKind::Profile(profile),
            amplitude,
        }
    }

    /// Outer-ring values, one vector of length `n_theta` per component.
    pub fn traces(&self, grid: &PolarGrid2D, k: usize) -> Result<Vec<Vec<f64>>> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return domain("amplitude must be positive");
        }
        let n = grid.n_theta;
        let traces = match &self.kind {
            BoundaryKind::Profile(p) => {
                p.validate(Some(k))?;
                (0..k)
                    .map(|i| {
                        (0..n)
                            .map(|m| self.amplitude * p.value(i, grid.r_max, grid.angle(m)))
                            .collect()
                    })
                    .collect::<Vec<Vec<f64>>>()
            }
            BoundaryKind::Explicit { traces } => {
                if traces.len() != k {
                    return domain(format!("{} traces given for {k} components", traces.len()));
                }
                if traces.iter().any(|t| t.len() != n) {
                    return domain(format!("each trace needs {n} values"));
                }
                traces
                    .iter()
                    .map(|t| t.iter().map(|v| self.amplitude * v).collect())
                    .collect()
            }
        };
        if traces.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return domain("boundary trace must be finite and nonnegative");
        }
        Ok(traces)
    }
}

/// Convergence metadata; only the headline fields are serialised.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_energy: f64,
    pub final_residual: f64,
    pub converged: bool,
    pub beta_schedule: Vec<f64>,
    /// Energy after every accepted block update, per stage.
    #[serde(skip)]
    pub energy_trace: Vec<Vec<f64>>,
    #[serde(skip)]
    pub stages: Vec<StageReport>,
}

/// `β_i`-weighted coupling `c_i = β Σ_{j≠i} u_j²` at every node.
pub(crate) fn coupling_weight(field: &MultiField, i: usize, beta: f64, out: &mut [f64]) {
    out.fill(0.0);
    for (j, c) in field.components().iter().enumerate() {
        if j != i {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * v;
            }
        }
    }
    for o in out.iter_mut() {
        *o *= beta;
    }
}

/// `∫ Σ_{i<j} u_i² u_j²` over the whole disk.
pub fn coupling_integral(field: &MultiField) -> f64 {
    let w = field.grid().node_weights();
    field.pair_coupling().iter().zip(&w).map(|(c, w)| c * w).sum()
}

/// `∫_{B_{r_max}} ½ Σ|∇u_i|² + (β/2) Σ_{i<j} u_i² u_j²`.
pub fn energy(field: &MultiField, beta: f64) -> f64 {
    let g = field.grid();
    let grad: f64 = field
        .components()
        .iter()
        .map(|c| dirichlet_integral_cumulative(g, c)[g.n_r])
        .sum();
    0.5 * grad + 0.5 * beta * coupling_integral(field)
}

/// Node-wise `(K u_i)/w + c_i u_i`, i.e. `-Δ_h u_i + β Σ_{j≠i} u_j² u_i`, on
/// interior nodes; zero on the outer ring.
pub(crate) fn gradient_component(
    field: &MultiField,
    i: usize,
    beta: f64,
    weights: &[f64],
    scratch: &mut [f64],
    out: &mut [f64],
) {
    let g = field.grid();
    coupling_weight(field, i, beta, scratch);
    let u = field.component(i);
    apply_stiffness(g, u, out);
    let bnd = g.ring(g.n_r);
    for idx in 0..bnd.start {
        out[idx] = out[idx] / weights[idx] + scratch[idx] * u[idx];
    }
}

/// Sup over interior nodes of `|Δ_h u_i − β Σ_{j≠i} u_j² u_i|`.
pub fn pde_residual(field: &MultiField, beta: f64) -> f64 {
    residual_impl(field, beta, false)
}

/// As [`pde_residual`], but nodes where `u_i = 0` and the gradient pushes
/// `u_i` below zero are ignored (the nonnegativity constraint is active).
pub fn projected_residual(field: &MultiField, beta: f64) -> f64 {
    residual_impl(field, beta, true)
}

fn residual_impl(field: &MultiField, beta: f64, projected: bool) -> f64 {
    let g = field.grid();
    let w = g.node_weights();
    let nodes = g.node_count();
    let mut scratch = vec![0.0; nodes];
    let mut grad = vec![0.0; nodes];
    let interior = g.ring(g.n_r).start;
    let mut worst = 0.0f64;
    for i in 0..field.k() {
        gradient_component(field, i, beta, &w, &mut scratch, &mut grad);
        let u = field.component(i);
        for idx in 0..interior {
            if projected && u[idx] <= 0.0 && grad[idx] > 0.0 {
                continue;
            }
            worst = worst.max(grad[idx].abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_has_zero_energy_and_residual() {
        let g = PolarGrid2D::new(16, 32, 1.0).unwrap();
        let f = MultiField::zeros(g, 2);
        assert_eq!(energy(&f, 7.0), 0.0);
        assert_eq!(pde_residual(&f, 7.0), 0.0);
    }

    #[test]
    fn half_plane_linear_energy() {
        // oracle: ½ |∇x|² over the half disk = π/4
        let g = PolarGrid2D::new(256, 384, 1.0).unwrap();
        let f = MultiField::from_fn(g, 1, |_, r, t| (r * t.cos()).max(0.0));
        let e = energy(&f, 3.0);
        assert!((e - PI / 4.0).abs() < 0.02 * PI / 4.0, "{e}");
    }

    #[test]
    fn disjoint_pair_has_no_coupling() {
        let g = PolarGrid2D::new(32, 64, 1.0).unwrap();
        let p = ConeProfile::alternating(HalfInt::from_twice(2).unwrap(), 0.0);
        let f = p.to_field(g, 2, 1.0).unwrap();
        assert!(coupling_integral(&f) < 1e-12);
        let e0 = energy(&f, 0.0);
        assert!((energy(&f, 100.0) - e0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = SolveConfig::continuation(50.0);
        assert_eq!(c.beta_schedule, vec![1.0, 5.0, 25.0, 50.0]);
        c.validate().unwrap();
        c.beta_schedule = vec![5.0, 1.0, 50.0];
        assert!(c.validate().is_err());
        c.beta_schedule = vec![1.0, 40.0];
        assert!(c.validate().is_err());
        let c: SolveConfig = serde_json::from_str(r#"{"beta": 2.0}"#).unwrap();
        assert_eq!(c.schedule(), vec![2.0]);
        assert_eq!(c.step_rule, StepRule::Backtracking);
        assert!(serde_json::from_str::<SolveConfig>(r#"{"beta": 2.0, "x": 1}"#).is_err());
        let c: SolveConfig =
            serde_json::from_str(r#"{"beta": 2.0, "step_rule": {"fixed": {"tau": 0.5}}}"#).unwrap();
        assert_eq!(c.step_rule, StepRule::Fixed { tau: 0.5 });
    }

    #[test]
    fn boundary_spec_json() {
        let s: BoundarySpec = serde_json::from_str(
            r#"{"kind": {"profile": {"d": 1.5, "assignment": [0, 1, 2]}}, "amplitude": 2.0}"#,
        )
        .unwrap();
        let g = PolarGrid2D::new(8, 24, 1.0).unwrap();
        let t = s.traces(&g, 3).unwrap();
        assert_eq!(t.len(), 3);
        assert!(s.traces(&g, 2).is_err());
        let bad = BoundarySpec {
            kind: BoundaryKind::Explicit {
                traces: vec![vec![-1.0; 24]],
            },
            amplitude: 1.0,
        };
        assert!(bad.traces(&g, 1).is_err());
    }
}
