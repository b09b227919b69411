//! Sparse Hessian of the discrete energy and its Cholesky factorisation.
//!
//! Unknowns are the interior nodes of every component, stacked component by
//! component. The Hessian is
//!
//! ```text
//! H_ii = K_II + W β Σ_{j≠i} u_j²,   H_ij = 2 β W u_i u_j   (i ≠ j),
//! ```
//!
//! which is positive definite near a minimiser but can be indefinite away
//! from it, where the node-local coupling block has a negative direction.
//! The convexified variant adds `β u_i u_j` to both diagonal entries of
//! every pair, which makes each pair block positive semidefinite.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{MatMut, Side};

use crate::error::{Error, Result};
use crate::grid::{MultiField, PolarGrid2D};

/// Lower-triangle entries `(row, col, value)` of the interior stiffness block.
fn stiffness_lower(grid: &PolarGrid2D) -> Vec<(usize, usize, f64)> {
    let n = grid.n_theta;
    let dt = grid.dtheta();
    let interior = grid.ring(grid.n_r).start;
    let mut out = vec![(0, 0, 0.5 * dt * n as f64)];
    for j in 1..grid.n_r {
        let c_in = (j as f64 - 0.5) * dt;
        let c_out = (j as f64 + 0.5) * dt;
        let a = 1.0 / (j as f64 * dt);
        let base = grid.ring(j).start;
        for m in 0..n {
            let row = base + m;
            out.push((row, row, c_in + c_out + 2.0 * a));
            let inner = if j == 1 { 0 } else { row - n };
            out.push((row, inner, -c_in));
            let prev = base + (m + n - 1) % n;
            let next = base + (m + 1) % n;
            for col in [prev, next] {
                if col < row {
                    out.push((row, col, -a));
                }
            }
        }
    }
    debug_assert!(out.iter().all(|&(r, c, _)| r < interior && c <= r));
    out
}

pub(crate) struct Hessian {
    k: usize,
    interior: usize,
    stiff: Vec<(usize, usize, f64)>,
    weights: Vec<f64>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    llt: SymbolicLlt<usize>,
}

impl Hessian {
    pub(crate) fn new(grid: &PolarGrid2D, k: usize) -> Result<Self> {
        let interior = grid.ring(grid.n_r).start;
        let stiff = stiffness_lower(grid);
        let mut pairs = Vec::with_capacity(k * stiff.len() + k * (k - 1) / 2 * interior);
        for i in 0..k {
            let off = i * interior;
            pairs.extend(stiff.iter().map(|&(r, c, _)| Pair::new(off + r, off + c)));
        }
        for i in 0..k {
            for j in i + 1..k {
                pairs.extend((0..interior).map(|p| Pair::new(j * interior + p, i * interior + p)));
            }
        }
        let size = k * interior;
        let fail = |e: String| Error::Domain(format!("sparse Hessian setup failed: {e}"));
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(size, size, &pairs)
            .map_err(|e| fail(format!("{e:?}")))?;
        let llt = SymbolicLlt::try_new(symbolic.as_ref(), Side::Lower)
            .map_err(|e| fail(format!("{e:?}")))?;
        Ok(Self {
            k,
            interior,
            stiff,
            weights: grid.node_weights(),
            symbolic,
            argsort,
            llt,
        })
    }

    /// Factor the Hessian at `field`; `None` if it is not positive definite.
    pub(crate) fn factor(&self, field: &MultiField, beta: f64, convexify: bool) -> Option<Llt<usize, f64>> {
        let (k, n) = (self.k, self.interior);
        let u = field.components();
        let mut diag_extra = vec![vec![0.0; n]; k];
        for (i, extra) in diag_extra.iter_mut().enumerate() {
            for (j, uj) in u.iter().enumerate() {
                if j == i {
                    continue;
                }
                for p in 0..n {
                    let mut c = uj[p] * uj[p];
                    if convexify {
                        c += (u[i][p] * uj[p]).abs();
                    }
                    extra[p] += c;
                }
            }
            for p in 0..n {
                extra[p] *= beta * self.weights[p];
            }
        }
        let mut vals = Vec::with_capacity(k * self.stiff.len() + k * (k - 1) / 2 * n);
        for extra in &diag_extra {
            vals.extend(
                self.stiff
                    .iter()
                    .map(|&(r, c, v)| if r == c { v + extra[r] } else { v }),
            );
        }
        for i in 0..k {
            for j in i + 1..k {
                vals.extend((0..n).map(|p| 2.0 * beta * self.weights[p] * u[i][p] * u[j][p]));
            }
        }
        let mat = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, &vals).ok()?;
        Llt::try_new_with_symbolic(self.llt.clone(), mat.as_ref(), Side::Lower).ok()
    }

    /// Overwrite the stacked gradient `g` with `H⁻¹ g`.
    pub(crate) fn solve(llt: &Llt<usize, f64>, g: &mut [f64]) {
        let len = g.len();
        llt.solve_in_place(MatMut::from_column_major_slice_mut(g, len, 1));
    }

    pub(crate) fn interior(&self) -> usize {
        self.interior
    }
}
