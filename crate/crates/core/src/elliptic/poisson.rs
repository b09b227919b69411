use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::PolarGrid2D;
use crate::linalg::TridiagonalLu;

/// Fast solver for the stiffness matrix of the polar Dirichlet form with
/// homogeneous data on the outer ring.
///
/// The angular direction is diagonalised by a DFT; every Fourier mode then
/// leaves a tridiagonal system in the radial index. The pole only talks to
/// the mean mode, where it is carried as the extra unknown `n_theta * u_pole`.
pub struct PolarPoisson {
    grid: PolarGrid2D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    mean_mode: TridiagonalLu,
    modes: Vec<TridiagonalLu>,
    spectra: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PolarPoisson {
    pub fn new(grid: PolarGrid2D) -> Self {
        let n = grid.n_theta;
        let nr = grid.n_r;
        let dt = grid.dtheta();
        let c = |half: f64| half * dt;
        let interior = nr - 1;

        let mut lower = vec![0.0; nr];
        let mut diag = vec![0.0; nr];
        let mut upper = vec![0.0; nr];
        diag[0] = 0.5 * dt;
        upper[0] = -0.5 * dt;
        for j in 1..nr {
            lower[j] = -c(j as f64 - 0.5);
            diag[j] = c(j as f64 - 0.5) + c(j as f64 + 0.5);
            upper[j] = -c(j as f64 + 0.5);
        }
        let mean_mode = TridiagonalLu::new(&lower, &diag, &upper);

        let modes = (0..n)
            .map(|p| {
                let s = 2.0 - 2.0 * (2.0 * std::f64::consts::PI * p as f64 / n as f64).cos();
                let mut lo = vec![0.0; interior];
                let mut di = vec![0.0; interior];
                let mut up = vec![0.0; interior];
                for row in 0..interior {
                    let j = row + 1;
                    lo[row] = -c(j as f64 - 0.5);
                    up[row] = -c(j as f64 + 0.5);
                    di[row] = c(j as f64 - 0.5) + c(j as f64 + 0.5) + s / (j as f64 * dt);
                }
                TridiagonalLu::new(&lo, &di, &up)
            })
            .collect();

        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            mean_mode,
            modes,
            spectra: vec![Complex64::default(); interior * n],
            scratch: vec![Complex64::default(); n],
        }
    }

    /// Solve `K u = rhs` on interior nodes; outer-ring entries of `out` are
    /// set to zero and those of `rhs` are ignored.
    pub fn solve(&mut self, rhs: &[f64], out: &mut [f64]) {
        let g = self.grid;
        let n = g.n_theta;
        let interior = g.n_r - 1;

        for j in 1..g.n_r {
            let buf = &mut self.scratch;
            for (b, v) in buf.iter_mut().zip(&rhs[g.ring(j)]) {
                *b = Complex64::new(*v, 0.0);
            }
            self.forward.process(buf);
            let row = (j - 1) * n;
            self.spectra[row..row + n].copy_from_slice(buf);
        }

        // mean mode with the pole unknown in front
        let mut re = vec![0.0; g.n_r];
        let mut im = vec![0.0; g.n_r];
        re[0] = rhs[0];
        for j in 1..g.n_r {
            let z = self.spectra[(j - 1) * n];
            re[j] = z.re;
            im[j] = z.im;
        }
        self.mean_mode.solve_pair(&mut re, &mut im);
        out[0] = re[0] / n as f64;
        for j in 1..g.n_r {
            self.spectra[(j - 1) * n] = Complex64::new(re[j], im[j]);
        }

        let mut re = vec![0.0; interior];
        let mut im = vec![0.0; interior];
        for p in 1..n {
            for row in 0..interior {
                let z = self.spectra[row * n + p];
                re[row] = z.re;
                im[row] = z.im;
            }
            self.modes[p].solve_pair(&mut re, &mut im);
            for row in 0..interior {
                self.spectra[row * n + p] = Complex64::new(re[row], im[row]);
            }
        }

        let inv_n = 1.0 / n as f64;
        for j in 1..g.n_r {
            let row = (j - 1) * n;
            let buf = &mut self.scratch;
            buf.copy_from_slice(&self.spectra[row..row + n]);
            self.inverse.process(buf);
            for (o, b) in out[g.ring(j)].iter_mut().zip(buf.iter()) {
                *o = b.re * inv_n;
            }
        }
        for v in &mut out[g.ring(g.n_r)] {
            *v = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::apply_stiffness;

    #[test]
    fn inverts_the_stiffness_matrix() {
        let g = PolarGrid2D::new(12, 24, 1.5).unwrap();
        let mut u: Vec<f64> = (0..g.node_count())
            .map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.3)
            .collect();
        for v in &mut u[g.ring(g.n_r)] {
            *v = 0.0;
        }
        let mut ku = vec![0.0; g.node_count()];
        apply_stiffness(&g, &u, &mut ku);
        let mut solver = PolarPoisson::new(g);
        let mut back = vec![0.0; g.node_count()];
        solver.solve(&ku, &mut back);
        let err = u.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }
}
