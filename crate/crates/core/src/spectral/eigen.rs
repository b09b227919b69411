//! First Dirichlet eigenvalue of the Laplace–Beltrami operator on a node
//! mask of a [`SphereGrid`].
//!
//! Finite volumes on the colatitude-longitude cells: the flux between
//! latitude neighbours has conductance `sin(φ_{p+1/2}) Δλ / Δφ`, between
//! longitude neighbours `Δφ / (sin φ_p Δλ)`, and the mass matrix is the cell
//! area `sin φ_p Δφ Δλ`. Nodes outside the mask are Dirichlet zeros. A pole
//! whose adjacent ring lies entirely in the mask takes the ring mean;
//! otherwise it is a Dirichlet node.

use std::collections::VecDeque;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::SphereGrid;
use crate::linalg::{dot, pcg, solve_cyclic_tridiagonal, TridiagonalLu};

/// Inverse power iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenOptions {
    /// Spectral shift `σ`; iterates solve `(A − σM) x = M u`.
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Stop when successive Rayleigh quotients differ by less than this.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_max_iter() -> usize {
    500
}
fn default_tol() -> f64 {
    1e-8
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            shift: 0.0,
            max_iter: default_max_iter(),
            tol: default_tol(),
        }
    }
}

/// Nodes strictly inside the longitude sector `(start, start + alpha)`.
pub fn lune_mask(grid: &SphereGrid, start: f64, alpha: f64) -> Result<Vec<bool>> {
    use std::f64::consts::PI;
    if !(alpha > 0.0 && alpha <= 2.0 * PI * (1.0 + 1e-12)) {
        return domain(format!("lune angle {alpha} outside (0, 2π]"));
    }
    let eps = 1e-9;
    Ok((0..grid.node_count())
        .map(|idx| {
            let (_, l) = grid.coords(idx);
            let rel = (grid.longitude(l) - start).rem_euclid(2.0 * PI);
            rel > eps && rel < alpha - eps
        })
        .collect())
}

/// Whether the mask is one 4-connected component (longitude is periodic).
pub fn is_connected(grid: &SphereGrid, mask: &[bool]) -> bool {
    let Some(first) = mask.iter().position(|&b| b) else {
        return false;
    };
    let mut seen = vec![false; mask.len()];
    let mut queue = VecDeque::from([first]);
    seen[first] = true;
    let mut count = 1;
    while let Some(idx) = queue.pop_front() {
        let (p, l) = grid.coords(idx);
        let mut nb = vec![grid.index(p, l + 1), grid.index(p, l + grid.n_lam - 1)];
        if p > 1 {
            nb.push(grid.index(p - 1, l));
        }
        if p + 1 < grid.n_phi {
            nb.push(grid.index(p + 1, l));
        }
        for n in nb {
            if mask[n] && !seen[n] {
                seen[n] = true;
                count += 1;
                queue.push_back(n);
            }
        }
    }
    count == mask.iter().filter(|&&b| b).count()
}

/// Write masks as CSV with header `p,l,mask1,...,maskK` (entries 0/1).
pub fn write_masks_csv<W: Write>(grid: &SphereGrid, masks: &[Vec<bool>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["p".to_string(), "l".into()];
    header.extend((1..=masks.len()).map(|i| format!("mask{i}")));
    w.write_record(&header)?;
    for idx in 0..grid.node_count() {
        let (p, l) = grid.coords(idx);
        let mut rec = vec![p.to_string(), l.to_string()];
        rec.extend(masks.iter().map(|m| if m[idx] { "1" } else { "0" }.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Read masks written by [`write_masks_csv`]; missing nodes are outside.
pub fn read_masks_csv<R: Read>(grid: &SphereGrid, reader: R) -> Result<Vec<Vec<bool>>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "p" || &header[1] != "l" {
        return Err(Error::Config("mask CSV header must be p,l,mask1,...".into()));
    }
    let k = header.len() - 2;
    let mut masks = vec![vec![false; grid.node_count()]; k];
    for rec in rdr.records() {
        let rec = rec?;
        let int = |s: &str| -> Result<usize> {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("bad integer {s:?}: {e}")))
        };
        let (p, l) = (int(&rec[0])?, int(&rec[1])?);
        if p == 0 || p >= grid.n_phi || l >= grid.n_lam {
            return Err(Error::Config(format!("node ({p}, {l}) outside the sphere grid")));
        }
        for (i, m) in masks.iter_mut().enumerate() {
            m[grid.index(p, l)] = int(&rec[2 + i])? != 0;
        }
    }
    Ok(masks)
}

struct MaskedOperator {
    nodes: Vec<usize>,
    diag: Vec<f64>,
    mass: Vec<f64>,
    /// Neighbour (compressed index, conductance) pairs.
    links: Vec<Vec<(usize, f64)>>,
    /// Rings closed at a pole: (compressed indices, pole conductance).
    pole_rings: Vec<(Vec<usize>, f64)>,
    blocks: Vec<Block>,
}

enum Block {
    Run { idx: Vec<usize>, lu: TridiagonalLu },
    Ring { idx: Vec<usize>, diag: Vec<f64>, off: f64 },
}

impl MaskedOperator {
    fn new(grid: &SphereGrid, mask: &[bool]) -> Self {
        let (dp, dl) = (grid.dphi(), grid.dlam());
        let nodes: Vec<usize> = (0..grid.node_count()).filter(|&i| mask[i]).collect();
        let mut pos = vec![usize::MAX; grid.node_count()];
        for (c, &i) in nodes.iter().enumerate() {
            pos[i] = c;
        }
        let lat_cond = |p_half: f64| (p_half * dp).sin() * dl / dp;
        let lon_cond = |p: usize| dp / (grid.colatitude(p).sin() * dl);
        let ring_full = |p: usize| (0..grid.n_lam).all(|l| mask[grid.index(p, l)]);

        let mut diag = vec![0.0; nodes.len()];
        let mut mass = vec![0.0; nodes.len()];
        let mut links = vec![Vec::with_capacity(4); nodes.len()];
        for (c, &i) in nodes.iter().enumerate() {
            let (p, l) = grid.coords(i);
            mass[c] = grid.colatitude(p).sin() * dp * dl;
            let lon = lon_cond(p);
            for nb in [grid.index(p, l + 1), grid.index(p, l + grid.n_lam - 1)] {
                diag[c] += lon;
                if mask[nb] {
                    links[c].push((pos[nb], lon));
                }
            }
            // latitude neighbours; pole edges are handled below
            for (q, half) in [(p as isize - 1, p as f64 - 0.5), (p as isize + 1, p as f64 + 0.5)] {
                let cond = lat_cond(half);
                diag[c] += cond;
                if q >= 1 && (q as usize) < grid.n_phi {
                    let nb = grid.index(q as usize, l);
                    if mask[nb] {
                        links[c].push((pos[nb], cond));
                    }
                }
            }
        }
        let mut pole_rings = Vec::new();
        for (p, half) in [(1usize, 0.5), (grid.n_phi - 1, grid.n_phi as f64 - 0.5)] {
            if ring_full(p) {
                let idx: Vec<usize> = (0..grid.n_lam).map(|l| pos[grid.index(p, l)]).collect();
                pole_rings.push((idx, lat_cond(half)));
            }
        }

        let mut blocks = Vec::new();
        for p in 1..grid.n_phi {
            let off = -lon_cond(p);
            if ring_full(p) {
                let idx: Vec<usize> = (0..grid.n_lam).map(|l| pos[grid.index(p, l)]).collect();
                let d = idx.iter().map(|&c| diag[c]).collect();
                blocks.push(Block::Ring { idx, diag: d, off });
                continue;
            }
            // runs of consecutive masked longitudes, starting after a gap
            let Some(gap) = (0..grid.n_lam).find(|&l| !mask[grid.index(p, l)]) else {
                continue;
            };
            let mut run: Vec<usize> = Vec::new();
            for s in 1..=grid.n_lam {
                let l = (gap + s) % grid.n_lam;
                let i = grid.index(p, l);
                if mask[i] {
                    run.push(pos[i]);
                } else if !run.is_empty() {
                    blocks.push(Self::run_block(std::mem::take(&mut run), &diag, off));
                }
            }
        }
        Self {
            nodes,
            diag,
            mass,
            links,
            pole_rings,
            blocks,
        }
    }

    fn run_block(idx: Vec<usize>, diag: &[f64], off: f64) -> Block {
        let n = idx.len();
        let d: Vec<f64> = idx.iter().map(|&c| diag[c]).collect();
        let lu = TridiagonalLu::new(&vec![off; n], &d, &vec![off; n]);
        Block::Run { idx, lu }
    }

    fn apply(&self, x: &[f64], out: &mut [f64], shift: f64) {
        for c in 0..x.len() {
            let mut s = (self.diag[c] - shift * self.mass[c]) * x[c];
            for &(nb, cond) in &self.links[c] {
                s -= cond * x[nb];
            }
            out[c] = s;
        }
        for (idx, cond) in &self.pole_rings {
            let mean = idx.iter().map(|&c| x[c]).sum::<f64>() / idx.len() as f64;
            for &c in idx {
                out[c] -= cond * mean;
            }
        }
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        for b in &self.blocks {
            match b {
                Block::Run { idx, lu } => {
                    let mut v: Vec<f64> = idx.iter().map(|&c| r[c]).collect();
                    lu.solve(&mut v);
                    for (&c, v) in idx.iter().zip(v) {
                        z[c] = v;
                    }
                }
                Block::Ring { idx, diag, off } => {
                    let mut v: Vec<f64> = idx.iter().map(|&c| r[c]).collect();
                    solve_cyclic_tridiagonal(diag, *off, &mut v);
                    for (&c, v) in idx.iter().zip(v) {
                        z[c] = v;
                    }
                }
            }
        }
    }
}

/// Result of a masked eigen-solve.
#[derive(Debug, Clone, Serialize)]
pub struct MaskedEigen {
    pub lambda: f64,
    pub iterations: usize,
    /// Eigenvector on the full grid (zero outside the mask), unit `L²` norm.
    #[serde(skip)]
    pub vector: Vec<f64>,
}

/// First Dirichlet eigenvalue of a nonempty connected mask.
pub fn lambda1_masked(grid: &SphereGrid, mask: &[bool]) -> Result<f64> {
    Ok(lambda1_masked_with(grid, mask, &EigenOptions::default())?.lambda)
}

pub fn lambda1_masked_with(
    grid: &SphereGrid,
    mask: &[bool],
    opts: &EigenOptions,
) -> Result<MaskedEigen> {
    if mask.len() != grid.node_count() {
        return domain("mask length does not match the sphere grid");
    }
    if !mask.iter().any(|&b| b) {
        return domain("mask is empty");
    }
    if mask.iter().all(|&b| b) {
        return domain("mask covers the whole sphere: no Dirichlet boundary");
    }
    if !is_connected(grid, mask) {
        return domain("mask is not connected");
    }
    let op = MaskedOperator::new(grid, mask);
    let n = op.nodes.len();
    let shift = opts.shift;

    let mut u = vec![1.0; n];
    let norm = dot(&u, &op.mass.iter().zip(&u).map(|(m, u)| m * u).collect::<Vec<_>>()).sqrt();
    u.iter_mut().for_each(|v| *v /= norm);
    let mut x = u.clone();
    let mut ax = vec![0.0; n];
    let mut previous = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let b: Vec<f64> = op.mass.iter().zip(&u).map(|(m, u)| m * u).collect();
        pcg(
            |v, out| op.apply(v, out, shift),
            |r, z| op.precondition(r, z),
            &b,
            &mut x,
            1e-13,
            5000,
        );
        op.apply(&x, &mut ax, 0.0);
        let mx: Vec<f64> = op.mass.iter().zip(&x).map(|(m, x)| m * x).collect();
        let xmx = dot(&x, &mx);
        let q = dot(&x, &ax) / xmx;
        let s = xmx.sqrt();
        u = x.iter().map(|v| v / s).collect();
        x.clone_from(&u);
        if (q - previous).abs() < opts.tol {
            let mut vector = vec![0.0; grid.node_count()];
            for (&i, v) in op.nodes.iter().zip(&u) {
                vector[i] = *v;
            }
            return Ok(MaskedEigen {
                lambda: q,
                iterations: it,
                vector,
            });
        }
        previous = q;
        // warm start for the next solve: x ≈ u / (λ − σ)
        let scale = 1.0 / (q - shift);
        if scale.is_finite() {
            x.iter_mut().for_each(|v| *v *= scale);
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        last_change: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lune_masks_and_connectivity() {
        let g = SphereGrid::new(16, 48).unwrap();
        let m = lune_mask(&g, 0.0, 2.0 * PI / 3.0).unwrap();
        // longitudes 1..15 of 48 on every ring
        assert_eq!(m.iter().filter(|&&b| b).count(), 15 * 15);
        assert!(is_connected(&g, &m));
        let mut two = m.clone();
        for p in 1..16 {
            two[g.index(p, 7)] = false;
        }
        assert!(!is_connected(&g, &two));
        assert!(lune_mask(&g, 0.0, 7.0).is_err());
    }

    #[test]
    fn mask_csv_roundtrip() {
        let g = SphereGrid::new(8, 16).unwrap();
        let a = lune_mask(&g, 0.0, PI).unwrap();
        let b = lune_mask(&g, PI, PI).unwrap();
        let mut buf = Vec::new();
        write_masks_csv(&g, &[a.clone(), b.clone()], &mut buf).unwrap();
        let back = read_masks_csv(&g, &buf[..]).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn hemisphere_eigenvalue_on_a_coarse_grid() {
        let g = SphereGrid::new(32, 64).unwrap();
        let m = lune_mask(&g, 0.0, PI).unwrap();
        let lam = lambda1_masked(&g, &m).unwrap();
        assert!((lam - 2.0).abs() < 0.05, "{lam}");
    }

    #[test]
    fn polar_cap_uses_ring_mean_closure() {
        // cap φ < π/2 has λ₁ = 2 (first zonal eigenfunction cos φ vanishes on the equator)
        let g = SphereGrid::new(64, 64).unwrap();
        let m: Vec<bool> = (0..g.node_count()).map(|i| g.coords(i).0 < 32).collect();
        let lam = lambda1_masked(&g, &m).unwrap();
        assert!((lam - 2.0).abs() < 0.02, "{lam}");
    }

    #[test]
    fn rejects_bad_masks() {
        let g = SphereGrid::new(8, 16).unwrap();
        assert!(lambda1_masked(&g, &vec![false; g.node_count()]).is_err());
        assert!(lambda1_masked(&g, &vec![true; g.node_count()]).is_err());
        assert!(lambda1_masked(&g, &[true]).is_err());
    }
}
