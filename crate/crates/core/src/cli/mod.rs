//! Command-line experiments driven by JSON configs.
//!
//! Every command parses and validates its config before touching the
//! output directory, computes in memory, then writes
//! `<command>-<hash>.json` and, where there is a table, `<command>-<hash>.csv`.
//! The hash covers the canonical config and the seed, so identical runs
//! produce identical file names and bytes.

mod config;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::almgren::{acf_diagnostics, check_doubling, frequency_trace, growth_rate, GrowthRate};
use crate::blowdown::{
    blowdown_family, classify_family, quantization_check, vanishing_diagnostic,
};
use crate::cones::HalfInt;
use crate::elliptic::{
    coupling_integral, energy, equivariance_project, harmonic_extension, pde_residual,
    projected_residual, solve_dirichlet_from, BoundaryKind, SolveReport, StageReport,
};
use crate::error::{Error, Result};
use crate::grid::{fmt_float, write_field_csv, MultiField, PolarGrid2D};
use crate::profiles1d::{decay_fit, find_profile_with_step, write_decay_csv, OdeTrajectory};
use crate::spectral::{evaluate_partition, monotonicity_lk_check};

pub use config::{
    AcfConfig, AlmgrenConfig, BlowdownConfig, Bump, DecayConfig, Fault, FieldSource, GridConfig,
    LkCheckConfig, LogRadii, PartitionConfig, PartitionInput, Profile1dConfig, Radii,
    SolveExperiment, SphereGridConfig, VerifyConfig,
};
pub use verify::{CriterionResult, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "seglab", version, about = "Experiments on strongly competing elliptic systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config; optional for `verify` only.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Dirichlet solve of the competitive system.
    Solve,
    /// Frequency, doubling, growth rate and product functionals of a field.
    Almgren,
    /// Blow-down family and its classification against cone profiles.
    Blowdown,
    /// Eigenvalues and values of a partition of the circle or sphere.
    Partition,
    /// One-dimensional two-component profile by shooting.
    #[command(name = "profile1d")]
    Profile1d,
    /// Radial exponential decay experiment.
    Decay,
    /// The acceptance suite.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Almgren => "almgren",
            Command::Blowdown => "blowdown",
            Command::Partition => "partition",
            Command::Profile1d => "profile1d",
            Command::Decay => "decay",
            Command::Verify => "verify",
        }
    }
}

/// In-memory artifacts of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub hash: String,
    pub json: Vec<u8>,
    pub csv: Option<Vec<u8>>,
    pub exit_code: i32,
}

impl Outcome {
    pub fn json_name(&self, command: Command) -> String {
        format!("{}-{}.json", command.name(), self.hash)
    }

    pub fn csv_name(&self, command: Command) -> String {
        format!("{}-{}.csv", command.name(), self.hash)
    }
}

/// First 16 hex digits of SHA-256 over the canonical config and the seed.
pub fn config_hash(canonical: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    h.update(b"\nseed=");
    h.update(seed.to_string().as_bytes());
    hex::encode(h.finalize())[..16].to_string()
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    version: &'a str,
    config_hash: &'a str,
    seed: u64,
    config: &'a C,
    result: R,
}

fn finish<C: Serialize, R: Serialize>(
    command: Command,
    config: &C,
    seed: u64,
    result: R,
    csv: Option<Vec<u8>>,
    exit_code: i32,
) -> Result<Outcome> {
    let canonical = serde_json::to_string(config)?;
    let hash = config_hash(&canonical, seed);
    let env = Envelope {
        command: command.name(),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: &hash,
        seed,
        config,
        result,
    };
    let mut json = serde_json::to_vec_pretty(&env)?;
    json.push(b'\n');
    Ok(Outcome {
        hash,
        json,
        csv,
        exit_code,
    })
}

/// A solved field with its diagnostics.
#[derive(Debug, Clone)]
pub struct SolvedField {
    pub field: MultiField,
    pub report: SolveReport,
    pub bump_center: Option<[f64; 2]>,
}

/// Centre of a seeded bump: uniform in the disk of radius `r_max/2`.
fn seeded_center(seed: u64, r_max: f64) -> [f64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = 0.5 * r_max * rng.random::<f64>().sqrt();
    let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    [rho * phi.cos(), rho * phi.sin()]
}

/// Harmonic extension of the data plus the bump, then the continuation
/// solve; `theorem_b` keeps every iterate equivariant.
pub fn run_solve_experiment(exp: &SolveExperiment, seed: u64) -> Result<SolvedField> {
    exp.validate()?;
    let grid = exp.grid.build()?;
    let traces = exp.boundary.traces(&grid, exp.k)?;
    let mut init = harmonic_extension(grid, &traces)?;
    let mut bump_center = None;
    if let Some(b) = &exp.bump {
        let c = b.center.unwrap_or_else(|| seeded_center(seed, grid.r_max));
        bump_center = Some(c);
        let u = init.component_mut(b.component);
        for (idx, v) in u.iter_mut().enumerate() {
            let (x, y) = grid.position(idx);
            let damp = 1.0 - (x * x + y * y) / (grid.r_max * grid.r_max);
            let d2 = (x - c[0]).powi(2) + (y - c[1]).powi(2);
            *v += b.amplitude * damp.max(0.0) * (-d2 / (b.width * b.width)).exp();
        }
    }
    let mut cfg = exp.solve.clone();
    if exp.theorem_b {
        if let BoundaryKind::Profile(p) = &exp.boundary.kind {
            cfg.symmetry = Some(p.d);
        }
    }
    let (field, report) = solve_dirichlet_from(init, &exp.boundary, &cfg)?;
    Ok(SolvedField {
        field,
        report,
        bump_center,
    })
}

/// Field of an analysis source, with the solve's convergence flag.
fn source_field(src: &FieldSource, base: &Path, seed: u64) -> Result<(MultiField, bool)> {
    match src.load(base)? {
        Some(f) => Ok((f, true)),
        None => match src {
            FieldSource::Solve(exp) => {
                let s = run_solve_experiment(exp, seed)?;
                Ok((s.field, s.report.converged))
            }
            _ => unreachable!("only solve sources are computed"),
        },
    }
}

/// `(1/r) ∫_{∂B_r} u_i²` per component.
pub fn component_masses(field: &MultiField, r: f64) -> Result<Vec<f64>> {
    let g = field.grid();
    (0..field.k())
        .map(|i| {
            let sq: Vec<f64> = field.component(i).iter().map(|v| v * v).collect();
            Ok(crate::grid::integrate_circle(g, &sq, r)? / r)
        })
        .collect()
}

/// Largest deviation from the equivariant projection, relative to the sup norm.
pub fn symmetry_defect(field: &MultiField, d: HalfInt) -> Result<f64> {
    let p = equivariance_project(field, d)?;
    let scale = field
        .components()
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(field.max_abs_diff(&p) / scale.max(f64::MIN_POSITIVE))
}

#[derive(Serialize)]
struct SolveResult<'a> {
    report: &'a SolveReport,
    stages: &'a [StageReport],
    energy: f64,
    coupling_integral: f64,
    pde_residual: f64,
    projected_residual: f64,
    /// `(1/r) ∫_{∂B_r} u_i²` at `r = r_max/2`.
    half_radius_masses: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bump_center: Option<[f64; 2]>,
}

fn cmd_solve(text: &str, seed: u64) -> Result<Outcome> {
    let exp: SolveExperiment = parse(text)?;
    exp.validate()?;
    let s = run_solve_experiment(&exp, seed)?;
    let beta = exp.solve.beta;
    let defect = match (&exp.boundary.kind, exp.theorem_b) {
        (BoundaryKind::Profile(p), true) => Some(symmetry_defect(&s.field, p.d)?),
        _ => None,
    };
    let result = SolveResult {
        report: &s.report,
        stages: &s.report.stages,
        energy: energy(&s.field, beta),
        coupling_integral: coupling_integral(&s.field),
        pde_residual: pde_residual(&s.field, beta),
        projected_residual: projected_residual(&s.field, beta),
        half_radius_masses: component_masses(&s.field, 0.5 * s.field.grid().r_max)?,
        symmetry_defect: defect,
        bump_center: s.bump_center,
    };
    let mut csv = Vec::new();
    write_field_csv(&s.field, &mut csv)?;
    let code = if s.report.converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    finish(Command::Solve, &exp, seed, result, Some(csv), code)
}

#[derive(Serialize)]
struct Quantization {
    nearest_half_integer: f64,
    deviation: f64,
}

fn quantize(g: &Option<GrowthRate>) -> Option<Quantization> {
    g.and_then(|g| quantization_check(g.d_hat).ok()).map(|(q, dev)| Quantization {
        nearest_half_integer: q,
        deviation: dev,
    })
}

fn cmd_almgren(text: &str, base: &Path, seed: u64) -> Result<Outcome> {
    let cfg: AlmgrenConfig = parse(text)?;
    cfg.source.validate()?;
    let r_max = cfg.source.r_max();
    let radii = cfg.radii.resolve(0.05 * r_max, r_max)?;
    let acf_radii = match &cfg.acf {
        Some(a) => Some(a.radii.resolve(1.0, 0.9 * r_max)?),
        None => None,
    };
    let (field, converged) = source_field(&cfg.source, base, seed)?;
    let beta = cfg.beta.unwrap_or(cfg.source.beta());
    let trace = frequency_trace(&field, beta, &radii)?;
    let growth = growth_rate(&trace).ok();
    let q = quantize(&growth);
    let d = cfg.d.or(q.as_ref().map(|q| q.nearest_half_integer));
    let doubling = d.map(|d| check_doubling(&trace, d));
    let acf = match (&cfg.acf, acf_radii) {
        (Some(a), Some(r)) => Some(acf_diagnostics(&field, beta, &a.group, a.q, &r, a.slack)?),
        _ => None,
    };
    let violations = trace.violations();
    let result = json!({
        "beta": beta,
        "radii": trace.radii.len(),
        "truncated_at": trace.truncated_at,
        "max_violation": violations.iter().cloned().fold(0.0, f64::max),
        "growth": growth,
        "quantization": q,
        "doubling": doubling.map(|db| {
            let (lo2, up2) = db.worst_for_ratio(2.0);
            json!({
                "d": db.d,
                "worst_lower": db.worst_lower,
                "worst_upper": db.worst_upper,
                "ratio2_lower": lo2,
                "ratio2_upper": up2,
            })
        }),
        "acf": acf.map(|a| json!({
            "worst_drop": a.worst_drop_in(f64::NEG_INFINITY, f64::INFINITY),
            "worst_bound_margin": a.worst_bound_margin(),
            "diagnostics": a,
        })),
        "source_converged": converged,
    });
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    let code = if converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    finish(Command::Almgren, &cfg, seed, result, Some(csv), code)
}

fn cmd_blowdown(text: &str, base: &Path, seed: u64) -> Result<Outcome> {
    let cfg: BlowdownConfig = parse(text)?;
    cfg.source.validate()?;
    if cfg.windows.is_empty() || cfg.windows.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) {
        return Err(Error::Config("window fractions must lie in (0, 1]".into()));
    }
    let (field, converged) = source_field(&cfg.source, base, seed)?;
    let src = *field.grid();
    let target = match cfg.target {
        Some(t) => t.build()?,
        None => PolarGrid2D::new(64, src.n_theta, 1.0)?,
    };
    let beta = cfg.beta.unwrap_or(cfg.source.beta());
    let (d, d_hat) = match cfg.d {
        Some(d) => (d, None),
        None => {
            let radii = crate::almgren::log_radii(0.05 * src.r_max, src.r_max, 8);
            let g = growth_rate(&frequency_trace(&field, beta, &radii)?)?;
            let (q, _) = quantization_check(g.d_hat)?;
            (HalfInt::from_f64(q)?, Some(g.d_hat))
        }
    };
    let windows: Vec<f64> = cfg.windows.iter().map(|w| w * src.r_max).collect();
    let family = blowdown_family(&field, &windows, &target, beta)?;
    let fits = classify_family(&family, d)?;
    let vanishing = if family.members.is_empty() {
        None
    } else {
        Some(vanishing_diagnostic(&family.fields())?)
    };
    let result = json!({
        "d": d,
        "d_hat": d_hat,
        "members": family.members,
        "skipped": family.skipped,
        "fits": fits,
        "vanishing": vanishing,
        "source_converged": converged,
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["R", "residual", "segregation", "theta0", "h_unit"])?;
    for (m, f) in family.members.iter().zip(&fits) {
        w.write_record([
            fmt_float(m.radius),
            fmt_float(f.residual),
            fmt_float(f.segregation),
            fmt_float(f.theta0),
            fmt_float(m.h_unit),
        ])?;
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let code = if converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    finish(Command::Blowdown, &cfg, seed, result, Some(csv), code)
}

fn cmd_partition(text: &str, base: &Path, seed: u64) -> Result<Outcome> {
    let input: PartitionInput = parse(text)?;
    let cfg = PartitionConfig::from(input);
    let partition = cfg.build(base)?;
    if let Some(lk) = &cfg.lk_check {
        if lk.k_max < 3 || lk.n_starts == 0 {
            return Err(Error::Config("lk_check needs k_max ≥ 3 and n_starts ≥ 1".into()));
        }
    }
    let results = evaluate_partition(&partition)?;
    let lk = match &cfg.lk_check {
        Some(c) => Some(monotonicity_lk_check(c.k_max, c.n_starts, seed)?),
        None => None,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["part", "lambda1"])?;
    for (i, l) in results.lambda1_per_part.iter().enumerate() {
        w.write_record([(i + 1).to_string(), fmt_float(*l)])?;
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let result = json!({
        "dimension": partition.dimension(),
        "lambda1_per_part": results.lambda1_per_part,
        "partition_value": results.partition_value,
        "beta_value": results.beta_value,
        "gamma_of_value": results.gamma_of_value,
        "lk_check": lk,
    });
    finish(Command::Partition, &cfg, seed, result, Some(csv), EXIT_OK)
}

/// `u' > 0` and `v' < 0` at every grid step of `[0, x]`.
pub fn monotone_on(t: &OdeTrajectory, x: f64) -> bool {
    let (i0, i1) = (t.index_of(0.0), t.index_of(x));
    (i0..i1).all(|i| t.u[i + 1] > t.u[i] && t.v[i + 1] < t.v[i])
}

fn cmd_profile1d(text: &str, seed: u64) -> Result<Outcome> {
    let cfg: Profile1dConfig = parse(text)?;
    if !(cfg.a > 0.0 && cfg.a.is_finite()) {
        return Err(Error::Config("a must be positive".into()));
    }
    let x_max = cfg.x_max.unwrap_or(20.0 / cfg.a);
    let h = cfg.h.unwrap_or(1e-3 / cfg.a);
    let ext_grid = match &cfg.extension {
        Some(g) => Some(g.build()?),
        None => None,
    };
    let t = find_profile_with_step(cfg.a, x_max, h, cfg.tol)?;
    let extension = match ext_grid {
        Some(g) => {
            let f = t.to_plane_field(g)?;
            let radii = crate::almgren::log_radii(0.05 * g.r_max, g.r_max, 8);
            let gr = growth_rate(&frequency_trace(&f, 1.0, &radii)?)?;
            Some(json!({ "growth": gr, "quantization": quantize(&Some(gr)) }))
        }
        None => None,
    };
    let result = json!({
        "m": t.m,
        "b": t.b,
        "intercept": t.intercept,
        "symmetry_defect": t.symmetry_defect,
        "tail_from": t.tail_from,
        "ode_residual": t.ode_residual(0.95 * x_max),
        "monotone_on_half_window": monotone_on(&t, 0.5 * x_max),
        "extension": extension,
    });
    let mut csv = Vec::new();
    t.write_csv(&mut csv)?;
    finish(Command::Profile1d, &cfg, seed, result, Some(csv), EXIT_OK)
}

fn cmd_decay(text: &str, seed: u64) -> Result<Outcome> {
    let cfg: DecayConfig = parse(text)?;
    let fit = decay_fit(&cfg.ks, cfg.a, cfg.r, cfg.n).map_err(|e| match e {
        Error::Domain(m) => Error::Config(m),
        e => e,
    })?;
    let mut csv = Vec::new();
    write_decay_csv(&fit.points, &mut csv)?;
    finish(Command::Decay, &cfg, seed, fit, Some(csv), EXIT_OK)
}

fn cmd_verify(text: Option<&str>, seed: u64) -> Result<Outcome> {
    let cfg: VerifyConfig = match text {
        Some(t) => parse(t)?,
        None => VerifyConfig::default(),
    };
    if let Some(Fault::Coarsen(n)) = cfg.fault {
        if n < 16 || n % 2 != 0 {
            return Err(Error::Config("coarsen needs an even resolution of at least 16".into()));
        }
    }
    let report = verify::verify(&cfg, seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "name", "measured", "target", "tolerance", "pass"])?;
    for c in &report.criteria {
        w.write_record([
            c.id.to_string(),
            c.name.clone(),
            fmt_float(c.measured),
            fmt_float(c.target),
            fmt_float(c.tolerance),
            c.pass.to_string(),
        ])?;
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let code = if report.all_pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
    finish(Command::Verify, &cfg, seed, report, Some(csv), code)
}

/// Run `command` on the config text in memory. `base` resolves relative
/// paths inside the config.
pub fn execute(command: Command, config: Option<&str>, base: &Path, seed: u64) -> Result<Outcome> {
    let need = || config.ok_or_else(|| Error::Config(format!("{} needs --config", command.name())));
    match command {
        Command::Solve => cmd_solve(need()?, seed),
        Command::Almgren => cmd_almgren(need()?, base, seed),
        Command::Blowdown => cmd_blowdown(need()?, base, seed),
        Command::Partition => cmd_partition(need()?, base, seed),
        Command::Profile1d => cmd_profile1d(need()?, seed),
        Command::Decay => cmd_decay(need()?, seed),
        Command::Verify => cmd_verify(config, seed),
    }
}

pub fn exit_code_of(err: &Error) -> i32 {
    match err {
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_CONFIG,
    }
}

/// Write through a temporary name so a crash leaves no partial artifact.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("part");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn write_outcome(out: &Path, command: Command, o: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(out)?;
    if let Some(csv) = &o.csv {
        write_atomic(&out.join(o.csv_name(command)), csv)?;
    }
    write_atomic(&out.join(o.json_name(command)), &o.json)
}

/// Full command-line run; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let text = match &cli.config {
        Some(p) => match fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", p.display());
                return EXIT_CONFIG;
            }
        },
        None => None,
    };
    let base = cli
        .config
        .as_ref()
        .and_then(|p| p.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = pool.install(|| execute(cli.command, text.as_deref(), &base, cli.seed));
    match result {
        Ok(o) => {
            if let Err(e) = write_outcome(&cli.out, cli.command, &o) {
                eprintln!("error: writing artifacts: {e}");
                return EXIT_CONFIG;
            }
            eprintln!("wrote {}", cli.out.join(o.json_name(cli.command)).display());
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_of(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_config_and_seed() {
        let a = config_hash("{\"a\":1}", 0);
        assert_eq!(a.len(), 16);
        assert_eq!(a, config_hash("{\"a\":1}", 0));
        assert_ne!(a, config_hash("{\"a\":1}", 1));
        assert_ne!(a, config_hash("{\"a\":2}", 0));
    }

    #[test]
    fn bare_and_full_partition_hash_alike() {
        let dir = Path::new(".");
        let bare = execute(Command::Partition, Some(r#"{"arcs_equal": {"k": 4}}"#), dir, 0).unwrap();
        let full = execute(
            Command::Partition,
            Some(r#"{"partition": {"arcs_equal": {"k": 4}}}"#),
            dir,
            0,
        )
        .unwrap();
        assert_eq!(bare.hash, full.hash);
        assert_eq!(bare.json, full.json);
    }

    #[test]
    fn unknown_fields_and_missing_config_are_config_errors() {
        let dir = Path::new(".");
        let e = execute(Command::Decay, Some(r#"{"ks":[1],"r":1,"n":1,"extra":0}"#), dir, 0).unwrap_err();
        assert_eq!(exit_code_of(&e), EXIT_CONFIG);
        let e = execute(Command::Solve, None, dir, 0).unwrap_err();
        assert_eq!(exit_code_of(&e), EXIT_CONFIG);
    }

    #[test]
    fn seeded_bump_center_is_reproducible() {
        let a = seeded_center(7, 1.0);
        assert_eq!(a, seeded_center(7, 1.0));
        assert_ne!(a, seeded_center(8, 1.0));
        assert!(a[0].hypot(a[1]) < 0.5);
    }

    #[test]
    fn non_converged_solve_exits_two_with_artifacts() {
        let cfg = r#"{
            "grid": {"n_r": 16, "n_theta": 32},
            "k": 2,
            "boundary": {"kind": {"profile": {"d": 1, "rotation": 0.0, "assignment": [0, 1]}}, "amplitude": 10},
            "solve": {"beta": 50, "max_iter": 1, "tol_grad": 1e-14}
        }"#;
        let o = execute(Command::Solve, Some(cfg), Path::new("."), 0).unwrap();
        assert_eq!(o.exit_code, EXIT_NOT_CONVERGED);
        assert!(o.csv.is_some());
    }
}
