use serde::Serialize;

use super::newton::Hessian;
use super::{
    coupling_integral, coupling_weight, energy, equivariance_project, projected_residual, BoundarySpec, Direction,
    PolarPoisson, SolveConfig, SolveReport, StepRule,
};
use crate::error::{domain, Result};
use crate::grid::{apply_stiffness, MultiField, PolarGrid2D};
use crate::linalg::pcg;

/// Outcome of one continuation stage.
#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub beta: f64,
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
    /// `∫ Σ_{i<j} u_i² u_j²` at the end of the stage.
    pub segregation: f64,
    pub converged: bool,
}

/// Right-hand side `-K_{IB} g` that moves Dirichlet data to the interior rows.
fn lifted_rhs(grid: &PolarGrid2D, trace: &[f64]) -> Vec<f64> {
    let mut bnd = vec![0.0; grid.node_count()];
    bnd[grid.ring(grid.n_r)].copy_from_slice(trace);
    let mut kb = vec![0.0; grid.node_count()];
    apply_stiffness(grid, &bnd, &mut kb);
    kb.iter_mut().for_each(|v| *v = -*v);
    kb
}

/// Discrete harmonic extension of one trace per component.
pub fn harmonic_extension(grid: PolarGrid2D, traces: &[Vec<f64>]) -> Result<MultiField> {
    grid.validate()?;
    let mut poisson = PolarPoisson::new(grid);
    let mut comps = Vec::with_capacity(traces.len());
    for t in traces {
        if t.len() != grid.n_theta {
            return domain("trace length must equal n_theta");
        }
        let rhs = lifted_rhs(&grid, t);
        let mut u = vec![0.0; grid.node_count()];
        poisson.solve(&rhs, &mut u);
        u[grid.ring(grid.n_r)].copy_from_slice(t);
        comps.push(u);
    }
    MultiField::from_components(grid, comps)
}

/// Solve from the harmonic extension of the boundary data.
pub fn solve_dirichlet(
    grid: PolarGrid2D,
    k: usize,
    boundary: &BoundarySpec,
    cfg: &SolveConfig,
) -> Result<(MultiField, SolveReport)> {
    grid.validate()?;
    if k == 0 {
        return domain("need at least one component");
    }
    let traces = boundary.traces(&grid, k)?;
    let init = harmonic_extension(grid, &traces)?;
    run(init, &traces, cfg)
}

/// Solve from an explicit initial field; its outer ring is overwritten by
/// the boundary data and negative values are clipped.
pub fn solve_dirichlet_from(
    initial: MultiField,
    boundary: &BoundarySpec,
    cfg: &SolveConfig,
) -> Result<(MultiField, SolveReport)> {
    let grid = *initial.grid();
    let traces = boundary.traces(&grid, initial.k())?;
    run(initial, &traces, cfg)
}

/// Energy descent with β continuation.
///
/// The default iteration is a projected Newton step on all components,
/// factored with a sparse Cholesky of the Hessian and globalised by the
/// step rule on the energy. When the Hessian is not positive definite, the
/// step is rejected, or the step had to be shortened, a block sweep
/// follows: each component in turn is replaced by the exact minimiser of the
/// energy with the others frozen. That subproblem is the linear system
/// `(K + W c_i) z = -K_{IB} g_i`, solved by conjugate gradients
/// preconditioned with the fast polar Poisson solver. Its matrix is an
/// M-matrix and the data are nonnegative, so `z ≥ 0`; the clip to zero only
/// guards against round-off.
fn run(
    initial: MultiField,
    traces: &[Vec<f64>],
    cfg: &SolveConfig,
) -> Result<(MultiField, SolveReport)> {
    cfg.validate()?;
    let grid = *initial.grid();
    let k = initial.k();
    let bnd = grid.ring(grid.n_r);

    let mut field = initial;
    for (i, t) in traces.iter().enumerate() {
        let u = field.component_mut(i);
        u[bnd.clone()].copy_from_slice(t);
        u.iter_mut().for_each(|v| *v = v.max(0.0));
    }

    if let Some(d) = cfg.symmetry {
        field = equivariance_project(&field, d)?;
    }
    let mut sweeper = BlockSweep::new(grid, traces, cfg);
    let hessian = match cfg.direction {
        Direction::Newton => Some(Hessian::new(&grid, k)?),
        Direction::BlockSweep => None,
    };

    let schedule = cfg.schedule();
    let mut stages = Vec::with_capacity(schedule.len());
    let mut energy_trace = Vec::with_capacity(schedule.len());
    let mut total_iter = 0usize;
    let mut all_converged = true;

    for &beta in &schedule {
        let mut trace = vec![energy(&field, beta)];
        let mut residual = projected_residual(&field, beta);
        let mut iterations = 0;
        while residual > cfg.tol_grad && total_iter < cfg.max_iter {
            let full_newton = match &hessian {
                Some(h) => newton_step(&mut field, h, beta, cfg.step_rule, &mut trace),
                None => false,
            };
            if !full_newton {
                sweeper.sweep(&mut field, beta, &mut trace);
            }
            if let Some(d) = cfg.symmetry {
                // sweeps visit components in order and drift off the symmetric fields
                field = equivariance_project(&field, d)?;
                *trace.last_mut().unwrap() = energy(&field, beta);
            }
            iterations += 1;
            total_iter += 1;
            residual = projected_residual(&field, beta);
        }
        let converged = residual <= cfg.tol_grad;
        all_converged &= converged;
        stages.push(StageReport {
            beta,
            iterations,
            residual,
            energy: *trace.last().unwrap(),
            segregation: coupling_integral(&field),
            converged,
        });
        energy_trace.push(trace);
    }

    let last = stages.last().unwrap();
    let report = SolveReport {
        iterations: total_iter,
        final_energy: last.energy,
        final_residual: last.residual,
        converged: all_converged,
        beta_schedule: schedule,
        energy_trace,
        stages,
    };
    Ok((field, report))
}

/// Energy-decrease test with a relative round-off allowance.
fn no_increase(e: f64, e_old: f64) -> bool {
    e <= e_old + 1e-13 * e_old.abs().max(1e-300)
}

/// Try one projected Newton step; the accepted energy is pushed on `trace`.
/// Returns true only for an unshortened step.
fn newton_step(
    field: &mut MultiField,
    hessian: &Hessian,
    beta: f64,
    rule: StepRule,
    trace: &mut Vec<f64>,
) -> bool {
    let grid = *field.grid();
    let n = hessian.interior();
    let k = field.k();
    let w = grid.node_weights();
    let mut c = vec![0.0; grid.node_count()];
    let mut ku = vec![0.0; grid.node_count()];
    let mut step = vec![0.0; k * n];
    for i in 0..k {
        coupling_weight(field, i, beta, &mut c);
        let u = field.component(i);
        apply_stiffness(&grid, u, &mut ku);
        for p in 0..n {
            step[i * n + p] = -(ku[p] + w[p] * c[p] * u[p]);
        }
    }
    let Some(llt) = hessian
        .factor(field, beta, false)
        .or_else(|| hessian.factor(field, beta, true))
    else {
        return false;
    };
    Hessian::solve(&llt, &mut step);
    if step.iter().any(|v| !v.is_finite()) {
        return false;
    }

    let e_old = *trace.last().unwrap();
    let old: Vec<Vec<f64>> = (0..k).map(|i| field.component(i)[..n].to_vec()).collect();
    let apply = |field: &mut MultiField, tau: f64| {
        for i in 0..k {
            let u = field.component_mut(i);
            for p in 0..n {
                u[p] = (old[i][p] + tau * step[i * n + p]).max(0.0);
            }
        }
    };
    let (mut tau, min_tau) = match rule {
        StepRule::Fixed { tau } => (tau, tau),
        StepRule::Backtracking => (1.0, 1.0 / 256.0),
    };
    loop {
        apply(field, tau);
        let e = energy(field, beta);
        if no_increase(e, e_old) {
            trace.push(e);
            return tau == 1.0;
        }
        tau *= 0.5;
        if tau < min_tau {
            apply(field, 0.0);
            return false;
        }
    }
}

/// Exact block minimisers with a shared Poisson preconditioner.
struct BlockSweep<'a> {
    grid: PolarGrid2D,
    traces: &'a [Vec<f64>],
    rule: StepRule,
    cg_tol: f64,
    weights: Vec<f64>,
    rhs: Vec<Vec<f64>>,
    poisson: PolarPoisson,
}

impl<'a> BlockSweep<'a> {
    fn new(grid: PolarGrid2D, traces: &'a [Vec<f64>], cfg: &SolveConfig) -> Self {
        Self {
            grid,
            traces,
            rule: cfg.step_rule,
            cg_tol: cfg.cg_tol,
            weights: grid.node_weights(),
            rhs: traces.iter().map(|t| lifted_rhs(&grid, t)).collect(),
            poisson: PolarPoisson::new(grid),
        }
    }

    fn sweep(&mut self, field: &mut MultiField, beta: f64, trace: &mut Vec<f64>) {
        let grid = self.grid;
        let nodes = grid.node_count();
        let bnd = grid.ring(grid.n_r);
        let interior = bnd.start;
        let mut c = vec![0.0; nodes];
        let mut z = vec![0.0; nodes];
        for i in 0..field.k() {
            coupling_weight(field, i, beta, &mut c);
            let wc: Vec<f64> = self.weights.iter().zip(&c).map(|(w, c)| w * c).collect();

            z.copy_from_slice(field.component(i));
            z[bnd.clone()].fill(0.0);
            let poisson = &mut self.poisson;
            pcg(
                |v, out| {
                    apply_stiffness(&grid, v, out);
                    for idx in 0..interior {
                        out[idx] += wc[idx] * v[idx];
                    }
                },
                |r, out| poisson.solve(r, out),
                &self.rhs[i],
                &mut z,
                self.cg_tol,
                500,
            );
            for v in &mut z[..interior] {
                *v = v.max(0.0);
            }
            z[bnd.clone()].copy_from_slice(&self.traces[i]);

            let e_old = *trace.last().unwrap();
            let old = field.component(i).to_vec();
            let blend = |field: &mut MultiField, tau: f64| {
                let u = field.component_mut(i);
                for idx in 0..interior {
                    u[idx] = (1.0 - tau) * old[idx] + tau * z[idx];
                }
            };
            match self.rule {
                StepRule::Fixed { tau } => {
                    blend(field, tau);
                    trace.push(energy(field, beta));
                }
                StepRule::Backtracking => {
                    let mut tau = 1.0;
                    loop {
                        blend(field, tau);
                        let e = energy(field, beta);
                        if no_increase(e, e_old) {
                            trace.push(e);
                            break;
                        }
                        tau *= 0.5;
                        if tau < 1e-6 {
                            blend(field, 0.0);
                            trace.push(e_old);
                            break;
                        }
                    }
                }
            }
        }
    }
}
