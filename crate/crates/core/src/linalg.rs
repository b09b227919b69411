//! Small dense/banded kernels and preconditioned conjugate gradients.

/// Outcome of a conjugate-gradient run.
#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    /// Final `sqrt(r^T P^{-1} r)` relative to the initial value.
    pub relative_residual: f64,
    pub converged: bool,
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for `A x = b`, starting from `x`.
///
/// `apply` computes `A v`, `precond` computes `P^{-1} r`. Both must be
/// symmetric positive definite on the active subspace; entries that should
/// stay fixed must be kept at zero by the two operators.
pub fn pcg(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> CgStats {
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    precond(&r, &mut z);
    let mut rz = dot(&r, &z);
    let bz = {
        let mut zb = vec![0.0; n];
        precond(b, &mut zb);
        dot(b, &zb).max(0.0).sqrt()
    };
    let scale = if bz > 0.0 { bz } else { rz.max(0.0).sqrt() };
    if scale == 0.0 || rz.max(0.0).sqrt() <= rel_tol * scale {
        return CgStats {
            iterations: 0,
            relative_residual: if scale > 0.0 { rz.max(0.0).sqrt() / scale } else { 0.0 },
            converged: true,
        };
    }
    let mut p = z.clone();
    let mut iterations = 0;
    let mut rel = rz.sqrt() / scale;
    while iterations < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        iterations += 1;
        rel = rz_new.max(0.0).sqrt() / scale;
        if rel <= rel_tol {
            return CgStats {
                iterations,
                relative_residual: rel,
                converged: true,
            };
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgStats {
        iterations,
        relative_residual: rel,
        converged: false,
    }
}

/// Solve a tridiagonal system in place (Thomas algorithm).
///
/// `lower[i]` couples row `i` to `i - 1` (`lower[0]` unused), `upper[i]`
/// couples row `i` to `i + 1` (last entry unused). `rhs` is overwritten with
/// the solution.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    c[0] = if n > 1 { upper[0] / beta } else { 0.0 };
    rhs[0] /= beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / beta;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Precomputed LU factors of a tridiagonal matrix, reusable across many
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    c: Vec<f64>,
}

impl TridiagonalLu {
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut c = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut beta = diag[0];
        inv_pivot[0] = 1.0 / beta;
        if n > 1 {
            c[0] = upper[0] / beta;
        }
        for i in 1..n {
            beta = diag[i] - lower[i] * c[i - 1];
            inv_pivot[i] = 1.0 / beta;
            if i + 1 < n {
                c[i] = upper[i] / beta;
            }
        }
        Self {
            lower: lower.to_vec(),
            inv_pivot,
            c,
        }
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Solve for a right-hand side given as separate real and imaginary parts.
    pub fn solve_pair(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.len();
        re[0] *= self.inv_pivot[0];
        im[0] *= self.inv_pivot[0];
        for i in 1..n {
            re[i] = (re[i] - self.lower[i] * re[i - 1]) * self.inv_pivot[i];
            im[i] = (im[i] - self.lower[i] * im[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            re[i] -= self.c[i] * re[i + 1];
            im[i] -= self.c[i] * im[i + 1];
        }
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c[i] * rhs[i + 1];
        }
    }
}

/// Solve a periodic (cyclic) tridiagonal system with constant off-diagonal
/// coupling `off` between neighbours, including the wrap-around pair.
/// Uses the Sherman–Morrison correction; requires `n >= 3`.
pub fn solve_cyclic_tridiagonal(diag: &[f64], off: f64, rhs: &mut [f64]) {
    let n = diag.len();
    debug_assert!(n >= 3);
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= off * off / gamma;
    let lower = vec![off; n];
    let upper = vec![off; n];
    let lu = TridiagonalLu::new(&lower, &d, &upper);
    lu.solve(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = off;
    lu.solve(&mut u);
    let fact = (rhs[0] + off * rhs[n - 1] / gamma) / (1.0 + u[0] + off * u[n - 1] / gamma);
    for i in 0..n {
        rhs[i] -= fact * u[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense() {
        let lower = [0.0, -1.0, -2.0, -0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let upper = [-1.0, -2.0, -0.5, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = [0.0; 4];
        for i in 0..4 {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += lower[i] * x[i - 1];
            }
            if i < 3 {
                b[i] += upper[i] * x[i + 1];
            }
        }
        let mut s = b;
        solve_tridiagonal(&lower, &diag, &upper, &mut s);
        let lu = TridiagonalLu::new(&lower, &diag, &upper);
        let mut t = b;
        let mut im = [0.0; 4];
        lu.solve_pair(&mut t, &mut im);
        for i in 0..4 {
            assert!((s[i] - x[i]).abs() < 1e-13);
            assert!((t[i] - x[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn cyclic_matches_dense() {
        let n = 7;
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + 0.1 * i as f64).collect();
        let off = -1.0;
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = diag[i] * x[i] + off * (x[(i + 1) % n] + x[(i + n - 1) % n]);
        }
        solve_cyclic_tridiagonal(&diag, off, &mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn pcg_solves_spd_system() {
        let n = 50;
        let apply = |v: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let mut s = 2.5 * v[i];
                if i > 0 {
                    s -= v[i - 1];
                }
                if i + 1 < n {
                    s -= v[i + 1];
                }
                out[i] = s;
            }
        };
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.01).collect();
        let mut x = vec![0.0; n];
        let st = pcg(apply, |r, z| z.copy_from_slice(r), &b, &mut x, 1e-12, 500);
        assert!(st.converged);
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-9);
        }
    }
}
