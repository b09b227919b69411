//! JSON documents accepted by the commands. Every struct rejects unknown
//! fields, and serializing a parsed config yields an equivalent document
//! with all defaults filled in; that canonical form is what gets hashed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::almgren::log_radii;
use crate::cones::{ConeProfile, HalfInt};
use crate::elliptic::{BoundaryKind, BoundarySpec, SolveConfig};
use crate::error::{Error, Result};
use crate::grid::{read_field_csv, MultiField, PolarGrid2D, SphereGrid};
use crate::spectral::{read_masks_csv, ArcPartition, Partition, PartitionSpec, SphereDomain};

fn one() -> f64 {
    1.0
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_r: usize,
    pub n_theta: usize,
    #[serde(default = "one")]
    pub r_max: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<PolarGrid2D> {
        PolarGrid2D::new(self.n_r, self.n_theta, self.r_max)
    }
}

/// Gaussian bump added to one component of the initial field, damped by
/// `1 − (r/r_max)²` so that the boundary data are untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub component: usize,
    pub amplitude: f64,
    /// Centre in Cartesian coordinates; drawn from the run seed inside
    /// `|x| < r_max/2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default = "default_bump_width")]
    pub width: f64,
}

fn default_bump_width() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveExperiment {
    pub grid: GridConfig,
    pub k: usize,
    pub boundary: BoundarySpec,
    pub solve: SolveConfig,
    /// Start from the equivariant projection of the initial field; needs a
    /// cone-profile boundary.
    #[serde(default)]
    pub theorem_b: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<Bump>,
}

impl SolveExperiment {
    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.solve.validate()?;
        if self.k == 0 {
            return cfg_err("k must be at least 1");
        }
        if let BoundaryKind::Profile(p) = &self.boundary.kind {
            p.validate(Some(self.k))?;
        }
        if self.theorem_b && !matches!(self.boundary.kind, BoundaryKind::Profile(_)) {
            return cfg_err("theorem_b needs a profile boundary");
        }
        if let Some(b) = &self.bump {
            if b.component >= self.k {
                return cfg_err(format!("bump component {} out of range", b.component));
            }
            if !(b.width > 0.0) || !b.amplitude.is_finite() {
                return cfg_err("bump needs a positive width and a finite amplitude");
            }
        }
        Ok(())
    }
}

/// Where the analysed field comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    Solve(SolveExperiment),
    /// A cone profile sampled on a grid, with `k` defaulting to the
    /// components the assignment uses.
    Profile {
        profile: ConeProfile,
        grid: GridConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// A snapshot written by `solve`; the path is relative to the config file.
    FieldCsv { path: String, grid: GridConfig },
}

impl FieldSource {
    /// Default β for the analysis: the solve's β, zero otherwise.
    pub fn beta(&self) -> f64 {
        match self {
            FieldSource::Solve(s) => s.solve.beta,
            _ => 0.0,
        }
    }

    pub fn r_max(&self) -> f64 {
        match self {
            FieldSource::Solve(s) => s.grid.r_max,
            FieldSource::Profile { grid, .. } | FieldSource::FieldCsv { grid, .. } => grid.r_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FieldSource::Solve(s) => s.validate(),
            FieldSource::Profile {
                profile, grid, k, amplitude,
            } => {
                grid.build()?;
                profile.validate(Some(k.unwrap_or(profile.components())))?;
                if !(*amplitude > 0.0 && amplitude.is_finite()) {
                    return cfg_err("amplitude must be positive");
                }
                Ok(())
            }
            FieldSource::FieldCsv { grid, .. } => grid.build().map(|_| ()),
        }
    }

    /// Field for the non-solve sources.
    pub fn load(&self, base: &Path) -> Result<Option<MultiField>> {
        match self {
            FieldSource::Solve(_) => Ok(None),
            FieldSource::Profile {
                profile, grid, k, amplitude,
            } => Ok(Some(profile.to_field(
                grid.build()?,
                k.unwrap_or(profile.components()),
                *amplitude,
            )?)),
            FieldSource::FieldCsv { path, grid } => {
                let file = std::fs::File::open(base.join(path))
                    .map_err(|e| Error::Config(format!("cannot open field file {path}: {e}")))?;
                Ok(Some(read_field_csv(grid.build()?, file)?))
            }
        }
    }
}

fn default_per_doubling() -> usize {
    8
}

/// Radii sampled geometrically, absolute values; missing ends default per
/// command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRadii {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default = "default_per_doubling")]
    pub per_doubling: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Radii {
    Log(LogRadii),
    List(Vec<f64>),
}

impl Default for Radii {
    fn default() -> Self {
        Radii::Log(LogRadii {
            per_doubling: default_per_doubling(),
            ..LogRadii::default()
        })
    }
}

impl Radii {
    pub fn resolve(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let radii = match self {
            Radii::List(v) => v.clone(),
            Radii::Log(l) => {
                let (a, b) = (l.r_min.unwrap_or(lo), l.r_max.unwrap_or(hi));
                if !(a > 0.0 && b > a) || l.per_doubling == 0 {
                    return cfg_err(format!("bad radius range [{a}, {b}]"));
                }
                log_radii(a, b, l.per_doubling)
            }
        };
        if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
            return cfg_err("radii must be positive and non-empty");
        }
        Ok(radii)
    }
}

fn default_acf_slack() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcfConfig {
    pub group: Vec<usize>,
    pub q: f64,
    #[serde(default = "default_acf_slack")]
    pub slack: f64,
    /// Defaults to `[1, 0.9 r_max]`.
    #[serde(default)]
    pub radii: Radii,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlmgrenConfig {
    pub source: FieldSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Defaults to `[0.05, 1]·r_max`.
    #[serde(default)]
    pub radii: Radii,
    /// Degree for the doubling check; the rounded growth rate when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acf: Option<AcfConfig>,
}

fn default_windows() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowdownConfig {
    pub source: FieldSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Window radii as fractions of the source radius.
    #[serde(default = "default_windows")]
    pub windows: Vec<f64>,
    /// Unit-disk grid the windows are resampled onto; defaults to 64 rings
    /// and the source's angular resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<GridConfig>,
    /// Profile degree; the rounded growth rate when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<HalfInt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereGridConfig {
    pub n_phi: usize,
    pub n_lam: usize,
}

impl Default for SphereGridConfig {
    fn default() -> Self {
        Self { n_phi: 128, n_lam: 384 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LkCheckConfig {
    pub k_max: usize,
    #[serde(default = "default_n_starts")]
    pub n_starts: usize,
}

fn default_n_starts() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    pub partition: PartitionSpec,
    #[serde(default)]
    pub sphere_grid: SphereGridConfig,
    /// Evaluate lunes as node masks on `sphere_grid` instead of the closed form.
    #[serde(default)]
    pub masked_lunes: bool,
    /// Also optimise arc partitions for `k = 2..=k_max` from seeded starts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lk_check: Option<LkCheckConfig>,
}

/// `partition` accepts the full document or a bare partition spec.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PartitionInput {
    Full(PartitionConfig),
    Bare(PartitionSpec),
}

impl From<PartitionInput> for PartitionConfig {
    fn from(p: PartitionInput) -> Self {
        match p {
            PartitionInput::Full(c) => c,
            PartitionInput::Bare(spec) => PartitionConfig {
                partition: spec,
                sphere_grid: SphereGridConfig::default(),
                masked_lunes: false,
                lk_check: None,
            },
        }
    }
}

impl PartitionConfig {
    pub fn build(&self, base: &Path) -> Result<Partition> {
        let sphere = || SphereGrid::new(self.sphere_grid.n_phi, self.sphere_grid.n_lam);
        let part = match &self.partition {
            PartitionSpec::Arcs(arcs) => {
                Partition::Arcs(ArcPartition::new(arcs.iter().map(|a| (a[0], a[1])).collect())?)
            }
            PartitionSpec::ArcsEqual { k } => Partition::Arcs(ArcPartition::equal(*k)?),
            PartitionSpec::Lunes(angles) if self.masked_lunes => {
                let grid = sphere()?;
                let mut start = 0.0;
                let mut parts = Vec::with_capacity(angles.len());
                for &alpha in angles {
                    let mask = crate::spectral::lune_mask(&grid, start, alpha)?;
                    parts.push(SphereDomain::Mask { grid, mask });
                    start += alpha;
                }
                Partition::Sphere(parts)
            }
            PartitionSpec::Lunes(angles) => {
                Partition::Sphere(angles.iter().map(|&alpha| SphereDomain::Lune { alpha }).collect())
            }
            PartitionSpec::MaskFile(path) => {
                let grid = sphere()?;
                let file = std::fs::File::open(base.join(path))
                    .map_err(|e| Error::Config(format!("cannot open mask file {path}: {e}")))?;
                let masks = read_masks_csv(&grid, file)?;
                Partition::Sphere(masks.into_iter().map(|mask| SphereDomain::Mask { grid, mask }).collect())
            }
        };
        part.validate()?;
        Ok(part)
    }
}

fn default_ode_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile1dConfig {
    pub a: f64,
    /// Half-width of the window; `20/a` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    /// Integration step; `10⁻³/a` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default = "default_ode_tol")]
    pub tol: f64,
    /// Measure the growth rate of the planar extension on this grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub ks: Vec<f64>,
    #[serde(default = "one")]
    pub a: f64,
    pub r: f64,
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Fault {
    /// Replace every pinned radial and polar resolution by this value.
    Coarsen(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}
