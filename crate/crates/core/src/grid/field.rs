use std::io::{Read, Write};

use crate::error::{domain, Error, Result};

use super::polar::{self, PolarGrid2D};

/// `k` scalar fields `(u_1, ..., u_k)` sampled on a shared polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiField {
    grid: PolarGrid2D,
    components: Vec<Vec<f64>>,
}

impl MultiField {
    pub fn zeros(grid: PolarGrid2D, k: usize) -> Self {
        Self {
            grid,
            components: vec![vec![0.0; grid.node_count()]; k],
        }
    }

    /// Sample `f(component, r, theta)` at every node; the pole is sampled at
    /// `(0, 0)`.
    pub fn from_fn(grid: PolarGrid2D, k: usize, f: impl Fn(usize, f64, f64) -> f64) -> Self {
        let components = (0..k)
            .map(|i| {
                (0..grid.node_count())
                    .map(|idx| {
                        let (r, th) = grid.position(idx);
                        f(i, r, th)
                    })
                    .collect()
            })
            .collect();
        Self { grid, components }
    }

    pub fn from_components(grid: PolarGrid2D, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.is_empty() {
            return domain("a field needs at least one component");
        }
        for c in &components {
            if c.len() != grid.node_count() {
                return domain(format!(
                    "component has {} values, grid has {} nodes",
                    c.len(),
                    grid.node_count()
                ));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return domain("field values must be finite");
            }
        }
        Ok(Self { grid, components })
    }

    #[inline]
    pub fn grid(&self) -> &PolarGrid2D {
        &self.grid
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    #[inline]
    pub fn component_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.components[i]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.components
    }

    /// Node-wise `sum_i u_i^2`.
    pub fn sum_of_squares(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.node_count()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * v;
            }
        }
        out
    }

    /// Node-wise `sum_i u_i`.
    pub fn sum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.node_count()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v;
            }
        }
        out
    }

    /// Node-wise `sum_{i<j} u_i^2 u_j^2`.
    pub fn pair_coupling(&self) -> Vec<f64> {
        let n = self.grid.node_count();
        let mut out = vec![0.0; n];
        for i in 0..self.k() {
            for j in i + 1..self.k() {
                let (a, b) = (&self.components[i], &self.components[j]);
                for idx in 0..n {
                    out[idx] += a[idx] * a[idx] * b[idx] * b[idx];
                }
            }
        }
        out
    }

    /// Node-wise `|grad u|^2` summed over components (centered differences).
    pub fn gradient_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.node_count()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(polar::gradient_sq(&self.grid, c)) {
                *o += v;
            }
        }
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        self.components.iter().flatten().all(|v| *v >= 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest node-wise difference to another field on the same grid.
    pub fn max_abs_diff(&self, other: &MultiField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> MultiField {
        MultiField {
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    /// Copy with zero-valued components appended up to `k` components.
    pub fn padded(&self, k: usize) -> MultiField {
        let mut components = self.components.clone();
        while components.len() < k {
            components.push(vec![0.0; self.grid.node_count()]);
        }
        MultiField {
            grid: self.grid,
            components,
        }
    }

    /// Copy with components reordered: output component `i` is input
    /// component `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MultiField {
        MultiField {
            grid: self.grid,
            components: perm.iter().map(|&p| self.components[p].clone()).collect(),
        }
    }
}

/// Bilinear resampling of `u(R x) / norm` onto `target`.
pub fn sample_rescaled(
    field: &MultiField,
    scale: f64,
    target: &PolarGrid2D,
    norm: f64,
) -> Result<MultiField> {
    let src = field.grid();
    if !(norm > 0.0) {
        return domain(format!("normalisation {norm} must be positive"));
    }
    if !(scale > 0.0) || scale * target.r_max > src.r_max * (1.0 + 1e-12) {
        return domain(format!(
            "window R * r_max = {} exceeds source radius {}",
            scale * target.r_max,
            src.r_max
        ));
    }
    let inv = 1.0 / norm;
    let mut components = Vec::with_capacity(field.k());
    for c in field.components() {
        let mut out = vec![0.0; target.node_count()];
        for (idx, o) in out.iter_mut().enumerate() {
            let (r, th) = target.position(idx);
            let rr = (scale * r).min(src.r_max);
            *o = polar::interpolate(src, c, rr, th)? * inv;
        }
        components.push(out);
    }
    MultiField::from_components(*target, components)
}

/// Write a field snapshot as CSV with header `j,m,r,theta,u1,...,uk`.
///
/// Rows are ordered by `(j, m)`; the pole row is repeated for every `m`.
/// Floats use 17 significant digits.
pub fn write_field_csv<W: Write>(field: &MultiField, writer: W) -> Result<()> {
    let grid = field.grid();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["j".to_string(), "m".into(), "r".into(), "theta".into()];
    header.extend((1..=field.k()).map(|i| format!("u{i}")));
    w.write_record(&header)?;
    for j in 0..=grid.n_r {
        for m in 0..grid.n_theta {
            let idx = grid.index(j, m);
            let mut rec = vec![
                j.to_string(),
                m.to_string(),
                fmt_float(grid.radius(j)),
                fmt_float(grid.angle(m)),
            ];
            rec.extend(field.components().iter().map(|c| fmt_float(c[idx])));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a snapshot written by [`write_field_csv`] back onto `grid`.
pub fn read_field_csv<R: Read>(grid: PolarGrid2D, reader: R) -> Result<MultiField> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 5 || &header[0] != "j" || &header[1] != "m" {
        return Err(Error::Config("field CSV header must be j,m,r,theta,u1,...".into()));
    }
    let k = header.len() - 4;
    let mut components = vec![vec![f64::NAN; grid.node_count()]; k];
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
        };
        let j = parse(&rec[0])? as usize;
        let m = parse(&rec[1])? as usize;
        if j > grid.n_r || m >= grid.n_theta {
            return Err(Error::Config(format!("node ({j}, {m}) outside the grid")));
        }
        let idx = grid.index(j, m);
        for (i, c) in components.iter_mut().enumerate() {
            c[idx] = parse(&rec[4 + i])?;
        }
    }
    MultiField::from_components(grid, components)
}

/// Shortest round-trip float formatting with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn csv_snapshot_roundtrip() {
        let g = PolarGrid2D::new(8, 16, 2.0).unwrap();
        let f = MultiField::from_fn(g, 2, |i, r, th| (i as f64 + 1.0) * r * th.cos().abs() + 0.1);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("j,m,r,theta,u1,u2\n"));
        assert_eq!(text.lines().count(), 1 + 9 * 16);
        let back = read_field_csv(g, &buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rescale_identity() {
        let g = PolarGrid2D::new(16, 32, 1.0).unwrap();
        let f = MultiField::from_fn(g, 2, |i, r, th| r * (th + i as f64).sin().abs());
        let s = sample_rescaled(&f, 1.0, &g, 1.0).unwrap();
        assert!(s.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn rescale_homogeneous_degree_one() {
        let src = PolarGrid2D::new(64, 128, 2.0).unwrap();
        let tgt = PolarGrid2D::new(32, 64, 1.0).unwrap();
        let gfun = |th: f64| 1.0 + 0.5 * (2.0 * th).cos();
        let f = MultiField::from_fn(src, 1, |_, r, th| r * gfun(th));
        let s = sample_rescaled(&f, 2.0, &tgt, 2.0).unwrap();
        let expect = MultiField::from_fn(tgt, 1, |_, r, th| r * gfun(th));
        assert!(s.max_abs_diff(&expect) < 5e-3);
    }

    #[test]
    fn rescale_window_overflow() {
        let g = PolarGrid2D::new(16, 32, 1.0).unwrap();
        let f = MultiField::zeros(g, 1);
        assert!(sample_rescaled(&f, 1.5, &g, 1.0).is_err());
        assert!(sample_rescaled(&f, 0.5, &g, 0.0).is_err());
    }

    #[test]
    fn pair_coupling_of_disjoint_pair_vanishes() {
        let g = PolarGrid2D::new(16, 32, 1.0).unwrap();
        let f = MultiField::from_fn(g, 2, |i, r, th| {
            let s = r * th.sin();
            if i == 0 { s.max(0.0) } else { (-s).max(0.0) }
        });
        assert!(f.pair_coupling().iter().all(|v| *v == 0.0));
        let _ = PI;
    }
}
