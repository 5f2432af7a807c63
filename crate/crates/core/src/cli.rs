//! Command-line front end: curve input, pipeline orchestration, JSON/CSV/OBJ
//! artifacts and a reproducibility manifest.
//!
//! Every artifact is a pure function of the [`RunConfig`] and the curve file,
//! so reruns are byte-identical. Exit codes: 0 success, 1 input error,
//! 2 numerical-contract failure (with `diagnostic.json`), 3 convergence or
//! other numerical failure.

use crate::action::{dirichlet_nonlinearity, grunsky_gap, liouville_action, ActionError, ActionReport, QuadratureGrid};
use crate::conformal::{
    exterior_map_with, interior_map_with, ConformalError, ConformalMap, CurveSpec, LaurentMap, MapDomain, MapperConfig,
    PowerSeriesMap,
};
use crate::epstein::{
    height_bound_violations, mean_curvature_total, mesh_exterior_surface, mesh_surface, surface_separation,
    EpsteinError, HeightBoundReport, DEFAULT_R_MAX,
};
use crate::flow::{run_flow, FlowError, StepRule};
use crate::numeric::{pairwise_sum, C};
use crate::volume::{renormalized_volume, VolumeConfig, VolumeError, VolumeReport};
use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Default relative tolerance of `|S̃ − 4V_R|`.
pub const IDENTITY_RELATIVE_TOLERANCE: f64 = 0.01;
/// Absolute floor of the identity tolerance.
pub const IDENTITY_ABSOLUTE_FLOOR: f64 = 5e-4;
/// Default tolerance of the Grunsky equality and inequality.
pub const GRUNSKY_TOLERANCE: f64 = 1e-5;
/// Nehari bound on the gradient field sup-norm, with rounding slack.
pub const NEHARI_BOUND: f64 = 6.0 + 1e-9;
/// Samples per side of the seeded Monte-Carlo cross-check of the action.
pub const MONTE_CARLO_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Action,
    Volume,
    VerifyIdentity,
    Surface,
    Flow,
    Grunsky,
}

/// Radial levels, Gauss order and angular count of the quadrature grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub levels: usize,
    pub gl_order: usize,
    pub angular: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            levels: QuadratureGrid::DEFAULT_LEVELS,
            gl_order: QuadratureGrid::DEFAULT_GL_ORDER,
            angular: QuadratureGrid::DEFAULT_ANGULAR,
        }
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    /// `LEVELS,GL_ORDER,ANGULAR`, e.g. `20,16,256`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("grid '{s}': {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [levels, gl_order, angular] => Ok(Self { levels, gl_order, angular }),
            _ => Err(format!("grid '{s}' must be LEVELS,GL_ORDER,ANGULAR")),
        }
    }
}

/// Surface mesh resolution, `RADIALxANGULAR`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub radial: usize,
    pub angular: usize,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { radial: 64, angular: 128 }
    }
}

impl std::str::FromStr for MeshSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once('x').ok_or_else(|| format!("mesh '{s}' must be RADIALxANGULAR"))?;
        let parse = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("mesh '{s}': {e}"));
        Ok(Self { radial: parse(a)?, angular: parse(b)? })
    }
}

#[derive(Parser, Debug)]
#[command(name = "liouville", about = "Liouville action, Epstein surfaces and renormalized volume of Jordan curves")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Curve JSON: {"series": [[re, im], ...]} or {"points": [[x, y], ...]};
    /// `grunsky` also accepts an {"interior": ..., "exterior": ...} map pair.
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Initial truncation order of the numerical conformal maps.
    #[arg(long)]
    pub series_order: Option<usize>,
    /// Quadrature grid as LEVELS,GL_ORDER,ANGULAR.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// Surface mesh as RADIALxANGULAR.
    #[arg(long)]
    pub mesh: Option<MeshSpec>,
    /// Comma-separated truncation heights, halving at each step.
    #[arg(long, value_delimiter = ',')]
    pub eps_schedule: Option<Vec<f64>>,
    #[arg(long)]
    pub richardson_order: Option<usize>,
    /// Maximum accepted flow steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Contract tolerance of the command; see the crate README for defaults.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write refinement or sample traces as CSV.
    #[arg(long)]
    pub trace: bool,
    /// Write an interior-surface OBJ every this many flow steps.
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Load the whole configuration from a `run_config.json` instead of flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Complete description of one run; serialized next to the artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub curve: PathBuf,
    pub out: PathBuf,
    pub series_order: usize,
    pub grid: GridSpec,
    pub mesh: MeshSpec,
    pub eps_schedule: Vec<f64>,
    pub richardson_order: usize,
    pub steps: usize,
    /// `None` selects the command's default tolerance.
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub trace: bool,
    pub snapshot_every: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command, curve: PathBuf, out: PathBuf) -> Self {
        let volume = VolumeConfig::default();
        Self {
            command,
            curve,
            out,
            series_order: MapperConfig::default().order,
            grid: GridSpec::default(),
            mesh: MeshSpec::default(),
            eps_schedule: volume.schedule,
            richardson_order: volume.richardson_order,
            steps: 50,
            tolerance: None,
            seed: 0,
            trace: false,
            snapshot_every: None,
        }
    }

    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        if let Some(path) = &cli.config {
            let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            return serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())));
        }
        let mut c = Self::new(cli.command, cli.curve.clone(), cli.out.clone());
        if let Some(v) = cli.series_order {
            c.series_order = v;
        }
        if let Some(v) = cli.grid {
            c.grid = v;
        }
        if let Some(v) = cli.mesh {
            c.mesh = v;
        }
        if let Some(v) = &cli.eps_schedule {
            c.eps_schedule = v.clone();
        }
        if let Some(v) = cli.richardson_order {
            c.richardson_order = v;
        }
        if let Some(v) = cli.steps {
            c.steps = v;
        }
        c.tolerance = cli.tol;
        c.seed = cli.seed;
        c.trace = cli.trace;
        c.snapshot_every = cli.snapshot_every;
        Ok(c)
    }

    /// Checks every resolution against its documented range.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Input(m));
        if !(8..=8192).contains(&self.series_order) {
            return bad(format!("series order {} outside 8..=8192", self.series_order));
        }
        let g = self.grid;
        if !(1..=52).contains(&g.levels) || !(2..=64).contains(&g.gl_order) {
            return bad(format!("grid levels {} or Gauss order {} out of range", g.levels, g.gl_order));
        }
        if !(8..=8192).contains(&g.angular) || !g.angular.is_power_of_two() {
            return bad(format!("grid angular count {} must be a power of two in 8..=8192", g.angular));
        }
        if !(8..=2048).contains(&self.mesh.radial) || !(8..=4096).contains(&self.mesh.angular) {
            return bad(format!("mesh {}x{} outside 8..=2048 x 8..=4096", self.mesh.radial, self.mesh.angular));
        }
        if self.richardson_order > 8 {
            return bad(format!("Richardson order {} above 8", self.richardson_order));
        }
        if self.eps_schedule.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return bad("truncation heights must lie in (0, 1)".into());
        }
        if self.steps > 10_000 {
            return bad(format!("{} flow steps above 10000", self.steps));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("tolerance {t} must be positive"));
            }
        }
        if self.snapshot_every == Some(0) {
            return bad("snapshot interval must be positive".into());
        }
        self.volume_config().validate().map_err(|e| CliError::Input(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    fn mapper(&self) -> MapperConfig {
        let base = MapperConfig::default();
        MapperConfig { order: self.series_order, max_order: base.max_order.max(self.series_order), ..base }
    }

    fn quadrature(&self) -> QuadratureGrid {
        QuadratureGrid::new(self.grid.levels, self.grid.gl_order, self.grid.angular, MapDomain::Disk)
            .expect("validated grid")
    }

    fn volume_config(&self) -> VolumeConfig {
        VolumeConfig {
            schedule: self.eps_schedule.clone(),
            angular: self.grid.angular,
            gl_order: self.grid.gl_order,
            richardson_order: self.richardson_order,
            grid: self.quadrature(),
            ..VolumeConfig::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical contract failed: {0}")]
    Contract(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Contract(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ConformalError> for CliError {
    fn from(e: ConformalError) -> Self {
        match e {
            ConformalError::InvalidCurve(_) | ConformalError::InvalidMap(_) | ConformalError::NotStarShaped => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ActionError> for CliError {
    fn from(e: ActionError) -> Self {
        match e {
            ActionError::Conformal(c) => c.into(),
            ActionError::InvalidGrid(m) => CliError::Input(m),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<EpsteinError> for CliError {
    fn from(e: EpsteinError) -> Self {
        match e {
            EpsteinError::Conformal(c) => c.into(),
            EpsteinError::Quadrature(a) => a.into(),
            EpsteinError::Io(_) => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<VolumeError> for CliError {
    fn from(e: VolumeError) -> Self {
        match e {
            VolumeError::Conformal(c) => c.into(),
            VolumeError::Epstein(x) => x.into(),
            VolumeError::Quadrature(a) => a.into(),
            VolumeError::InvalidConfig(m) => CliError::Input(m),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Conformal(c) => c.into(),
            FlowError::Action(a) => a.into(),
            FlowError::InvalidParameter(m) => CliError::Input(m),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Files written by one run, in write order.
struct Artifacts {
    dir: PathBuf,
    written: Vec<(String, String)>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.written.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn manifest(&mut self, config: &RunConfig) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Entry<'a> {
            file: &'a str,
            sha256: &'a str,
        }
        #[derive(Serialize)]
        struct Manifest<'a> {
            version: &'a str,
            config_hash: String,
            files: Vec<Entry<'a>>,
        }
        let files = self.written.iter().map(|(f, h)| Entry { file: f, sha256: h }).collect();
        let manifest = Manifest { version: env!("CARGO_PKG_VERSION"), config_hash: config.hash(), files };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

/// Report wrapper carrying the configuration hash.
#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    report: T,
}

/// A contract check that failed, written as `diagnostic.json`.
#[derive(Serialize)]
struct Diagnostic {
    command: Command,
    contract: String,
    observed: f64,
    tolerance: f64,
}

/// Result of a run: written artifact names, and the contract failure if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub files: Vec<String>,
    pub contract_failure: Option<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.contract_failure.is_some() {
            2
        } else {
            0
        }
    }
}

struct Curve {
    spec: CurveSpec,
    f: PowerSeriesMap,
    g: LaurentMap,
}

fn load_curve(config: &RunConfig) -> Result<Curve, CliError> {
    let text =
        fs::read_to_string(&config.curve).map_err(|e| CliError::Input(format!("{}: {e}", config.curve.display())))?;
    let spec = CurveSpec::from_json(&text)?;
    let mapper = config.mapper();
    let (f, _) = interior_map_with(&spec, &mapper)?;
    let (g, _) = exterior_map_with(&spec, &mapper)?;
    Ok(Curve { spec, f, g })
}

/// Validates `config`, runs its command and writes all artifacts plus
/// `run_config.json` and `manifest.json` into the output directory.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let mut out = Artifacts::new(&config.out)?;
    let hash = config.hash();
    out.json("run_config.json", config)?;
    let failure = match config.command {
        Command::Action => run_action(config, &hash, &mut out)?,
        Command::Volume => run_volume(config, &hash, &mut out, false)?,
        Command::VerifyIdentity => run_volume(config, &hash, &mut out, true)?,
        Command::Surface => run_surface(config, &hash, &mut out)?,
        Command::Flow => run_flow_command(config, &hash, &mut out)?,
        Command::Grunsky => run_grunsky(config, &hash, &mut out)?,
    };
    if let Some(d) = &failure {
        out.json("diagnostic.json", &Stamped { config_hash: &hash, report: d })?;
    }
    out.manifest(config)?;
    Ok(RunOutcome {
        files: out.written.iter().map(|w| w.0.clone()).collect(),
        contract_failure: failure.map(|d| d.contract),
    })
}

/// Seeded Monte-Carlo estimate of one Dirichlet term with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
struct MonteCarlo {
    value: f64,
    standard_error: f64,
}

fn monte_carlo<F: Fn(C) -> Result<f64, ConformalError>>(
    rng: &mut ChaCha8Rng,
    samples: usize,
    integrand: F,
) -> Result<MonteCarlo, CliError> {
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (s, t): (f64, f64) = (rng.random(), rng.random());
        values.push(PI * integrand(C::from_polar(s.sqrt(), 2.0 * PI * t))?);
    }
    let mean = pairwise_sum(&values) / samples as f64;
    let var = pairwise_sum(&values.iter().map(|v| (v - mean).powi(2)).collect::<Vec<_>>()) / (samples - 1) as f64;
    Ok(MonteCarlo { value: mean, standard_error: (var / samples as f64).sqrt() })
}

#[derive(Serialize)]
struct ActionOutput {
    #[serde(flatten)]
    report: ActionReport,
    seed: u64,
    monte_carlo_interior: MonteCarlo,
    monte_carlo_exterior: MonteCarlo,
}

fn run_action(config: &RunConfig, hash: &str, out: &mut Artifacts) -> Result<Option<Diagnostic>, CliError> {
    let curve = load_curve(config)?;
    let grid = config.quadrature();
    let report = liouville_action(&curve.f, &curve.g, &grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let interior = monte_carlo(&mut rng, MONTE_CARLO_SAMPLES, |z| Ok(curve.f.jet(z)?.nonlinearity()?.norm_sqr()))?;
    // w = 1/ū maps the disk onto the exterior with area factor |u|^{−4}.
    let exterior = monte_carlo(&mut rng, MONTE_CARLO_SAMPLES, |u| {
        if u.norm() < 1e-12 {
            return Ok(0.0);
        }
        let w = u.conj().inv();
        Ok(curve.g.jet(w)?.nonlinearity()?.norm_sqr() / u.norm_sqr().powi(2))
    })?;
    out.json(
        "action.json",
        &Stamped {
            config_hash: hash,
            report: ActionOutput {
                report,
                seed: config.seed,
                monte_carlo_interior: interior,
                monte_carlo_exterior: exterior,
            },
        },
    )?;
    if config.trace {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["levels", "gl_order", "angular", "interior", "exterior", "log_term", "total"])
            .map_err(|e| CliError::Input(e.to_string()))?;
        // Trace rows record every level, so the divergence check is disabled.
        let mut ladder = vec![grid.clone().with_tolerance(f64::INFINITY)];
        for _ in 0..3 {
            let next = ladder[ladder.len() - 1].half_resolution();
            ladder.push(next);
        }
        for g in ladder.iter().rev() {
            let inner = dirichlet_nonlinearity(&curve.f, &g.with_domain(MapDomain::Disk))?.value;
            let outer = dirichlet_nonlinearity(&curve.g, &g.with_domain(MapDomain::ExteriorDisk))?.value;
            let row = [
                g.levels().to_string(),
                g.gl_order().to_string(),
                g.angular().to_string(),
                format!("{inner:e}"),
                format!("{outer:e}"),
                format!("{:e}", report.log_term),
                format!("{:e}", inner + outer + report.log_term),
            ];
            w.write_record(&row).map_err(|e| CliError::Input(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
        out.write("action_trace.csv", &bytes)?;
    }
    if report.total < -report.error_estimate.max(1e-12) {
        return Ok(Some(Diagnostic {
            command: Command::Action,
            contract: "action is negative beyond its error estimate".into(),
            observed: report.total,
            tolerance: report.error_estimate,
        }));
    }
    Ok(None)
}

fn run_volume(
    config: &RunConfig,
    hash: &str,
    out: &mut Artifacts,
    identity: bool,
) -> Result<Option<Diagnostic>, CliError> {
    let curve = load_curve(config)?;
    let report: VolumeReport = renormalized_volume(&curve.f, &curve.g, &config.volume_config(), identity)?;
    out.json(if identity { "identity.json" } else { "volume.json" }, &Stamped { config_hash: hash, report: &report })?;
    if config.trace {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["epsilon", "truncated_volume"]).map_err(|e| CliError::Input(e.to_string()))?;
        for (e, v) in &report.epsilon_samples {
            w.write_record([format!("{e:e}"), format!("{v:e}")]).map_err(|e| CliError::Input(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
        out.write("volume_samples.csv", &bytes)?;
    }
    if let (true, Some(action), Some(residual)) = (identity, report.action_total, report.identity_residual) {
        let rel = config.tolerance.unwrap_or(IDENTITY_RELATIVE_TOLERANCE);
        let tolerance = (rel * action.abs()).max(IDENTITY_ABSOLUTE_FLOOR);
        if !(residual.abs() <= tolerance) {
            return Ok(Some(Diagnostic {
                command: config.command,
                contract: "|S̃ − 4V_R| exceeds the identity tolerance".into(),
                observed: residual,
                tolerance,
            }));
        }
    }
    Ok(None)
}

#[derive(Serialize)]
struct SurfaceSummary {
    radial: usize,
    angular: usize,
    r_max: f64,
    separation: f64,
    interior_height_bounds: HeightBoundReport,
    exterior_height_bounds: HeightBoundReport,
    interior_immersion_radius: Option<f64>,
    exterior_immersion_radius: Option<f64>,
    interior_outer_ring_schwarzian: f64,
    exterior_outer_ring_schwarzian: f64,
    interior_consistently_oriented: bool,
    exterior_consistently_oriented: bool,
    mean_curvature_interior: f64,
    mean_curvature_exterior: f64,
}

fn run_surface(config: &RunConfig, hash: &str, out: &mut Artifacts) -> Result<Option<Diagnostic>, CliError> {
    let curve = load_curve(config)?;
    let MeshSpec { radial, angular } = config.mesh;
    let inner = mesh_surface(&curve.f, radial, angular, DEFAULT_R_MAX)?;
    let outer = mesh_exterior_surface(&curve.g, radial, angular, DEFAULT_R_MAX)?;
    for (mesh, stem) in [(&inner, "surface_interior"), (&outer, "surface_exterior")] {
        let mut obj = Vec::new();
        mesh.write_obj(&mut obj)?;
        out.write(&format!("{stem}.obj"), &obj)?;
        let mut csv_bytes = Vec::new();
        mesh.write_csv(&mut csv_bytes)?;
        out.write(&format!("{stem}.csv"), &csv_bytes)?;
    }
    let polygon = curve.spec.samples(4096);
    let grid = config.quadrature();
    let summary = SurfaceSummary {
        radial,
        angular,
        r_max: DEFAULT_R_MAX,
        separation: surface_separation(&inner, &outer),
        interior_height_bounds: height_bound_violations(&inner, &polygon),
        exterior_height_bounds: height_bound_violations(&outer, &polygon),
        interior_immersion_radius: inner.immersion_radius(),
        exterior_immersion_radius: outer.immersion_radius(),
        interior_outer_ring_schwarzian: inner.outer_ring_schwarzian_sup(),
        exterior_outer_ring_schwarzian: outer.outer_ring_schwarzian_sup(),
        interior_consistently_oriented: inner.consistently_oriented(),
        exterior_consistently_oriented: outer.consistently_oriented(),
        mean_curvature_interior: mean_curvature_total(&curve.f, &grid.with_domain(MapDomain::Disk))?.value,
        mean_curvature_exterior: mean_curvature_total(&curve.g, &grid.with_domain(MapDomain::ExteriorDisk))?.value,
    };
    out.json("surface.json", &Stamped { config_hash: hash, report: &summary })?;
    if summary.interior_height_bounds.violations > 0 {
        return Ok(Some(Diagnostic {
            command: Command::Surface,
            contract: "interior vertices violate d/5 ≤ ξ ≤ 4d".into(),
            observed: summary.interior_height_bounds.violations as f64,
            tolerance: 0.0,
        }));
    }
    Ok(None)
}

#[derive(Serialize)]
struct FlowSummary {
    accepted_steps: usize,
    initial_action: f64,
    final_action: f64,
    monotone: bool,
    max_gradient_sup: f64,
    final_roundness: f64,
}

fn run_flow_command(config: &RunConfig, hash: &str, out: &mut Artifacts) -> Result<Option<Diagnostic>, CliError> {
    let curve = load_curve(config)?;
    let rule = StepRule { grid: config.quadrature(), mapper: config.mapper(), ..StepRule::default() };
    let states = run_flow(&curve.spec, config.steps, &rule)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "action", "wp_norm_sq", "t", "roundness", "gradient_sup"])
        .map_err(|e| CliError::Input(e.to_string()))?;
    for s in &states {
        w.write_record([
            s.step.to_string(),
            format!("{:e}", s.action),
            format!("{:e}", s.gradient_norm_sq),
            format!("{:e}", s.step_size),
            format!("{:e}", s.roundness),
            format!("{:e}", s.gradient_sup),
        ])
        .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    out.write("flow.csv", &bytes)?;
    if let Some(every) = config.snapshot_every {
        for s in states.iter().filter(|s| s.step % every == 0) {
            let (f, _) = interior_map_with(&s.curve, &config.mapper())?;
            let mesh = mesh_surface(&f, config.mesh.radial, config.mesh.angular, DEFAULT_R_MAX)?;
            let mut obj = Vec::new();
            mesh.write_obj(&mut obj)?;
            out.write(&format!("flow_step_{:04}.obj", s.step), &obj)?;
        }
    }
    let first = &states[0];
    let last = &states[states.len() - 1];
    let summary = FlowSummary {
        accepted_steps: states.len() - 1,
        initial_action: first.action,
        final_action: last.action,
        monotone: states.windows(2).all(|w| w[1].action <= w[0].action),
        max_gradient_sup: states.iter().map(|s| s.gradient_sup).fold(0.0, f64::max),
        final_roundness: last.roundness,
    };
    out.json("flow.json", &Stamped { config_hash: hash, report: &summary })?;
    let failure = if !summary.monotone {
        Some(("action increased along the flow", 1.0, 0.0))
    } else if summary.max_gradient_sup > NEHARI_BOUND {
        Some(("gradient field exceeds the Nehari bound", summary.max_gradient_sup, NEHARI_BOUND))
    } else {
        None
    };
    Ok(failure.map(|(contract, observed, tolerance)| Diagnostic {
        command: Command::Flow,
        contract: contract.into(),
        observed,
        tolerance,
    }))
}

/// Explicit interior and exterior maps that need not share a boundary.
#[derive(Deserialize)]
struct MapPairFile {
    interior: Vec<[f64; 2]>,
    exterior: LaurentFile,
}

#[derive(Deserialize)]
struct LaurentFile {
    leading: [f64; 2],
    constant: [f64; 2],
    #[serde(default)]
    negative: Vec<[f64; 2]>,
}

fn complex(p: [f64; 2]) -> C {
    C::new(p[0], p[1])
}

#[derive(Serialize)]
struct GrunskyOutput {
    lhs: f64,
    rhs: f64,
    gap: f64,
    equality_expected: bool,
}

fn run_grunsky(config: &RunConfig, hash: &str, out: &mut Artifacts) -> Result<Option<Diagnostic>, CliError> {
    let text =
        fs::read_to_string(&config.curve).map_err(|e| CliError::Input(format!("{}: {e}", config.curve.display())))?;
    let (f, g, equality_expected) = match serde_json::from_str::<MapPairFile>(&text) {
        Ok(pair) => {
            let f = PowerSeriesMap::from_coefficients(pair.interior.into_iter().map(complex).collect())?;
            let e = pair.exterior;
            let g = LaurentMap::new(
                complex(e.leading),
                complex(e.constant),
                e.negative.into_iter().map(complex).collect(),
            )?;
            (f, g, false)
        }
        Err(_) => {
            let curve = load_curve(config)?;
            // Both maps are shifted so the interior map fixes the origin.
            let shift = curve.f.coefficients()[0];
            let f = curve.f.translated(-shift);
            let g = LaurentMap::new(
                curve.g.leading(),
                curve.g.constant() - shift,
                curve.g.negative_coefficients().to_vec(),
            )?;
            (f, g, true)
        }
    };
    let gap = grunsky_gap(&f, &g, &config.quadrature())?;
    let output = GrunskyOutput { lhs: gap.lhs, rhs: gap.rhs, gap: gap.rhs - gap.lhs, equality_expected };
    out.json("grunsky.json", &Stamped { config_hash: hash, report: &output })?;
    let tolerance = config.tolerance.unwrap_or(GRUNSKY_TOLERANCE);
    let failure = if output.gap < -tolerance {
        Some("Grunsky inequality lhs ≤ rhs violated")
    } else if equality_expected && output.gap > tolerance {
        Some("Grunsky equality fails for a Jordan-curve pair")
    } else {
        None
    };
    Ok(failure.map(|contract| Diagnostic {
        command: Command::Grunsky,
        contract: contract.into(),
        observed: output.gap,
        tolerance,
    }))
}

/// Parses arguments, runs, prints a one-line summary and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = RunConfig::from_cli(&cli).and_then(|c| run(&c));
    let mut stderr = std::io::stderr();
    match result {
        Ok(outcome) => {
            match &outcome.contract_failure {
                Some(c) => {
                    let _ = writeln!(stderr, "contract failure: {c}; see diagnostic.json");
                }
                None => {
                    let _ = writeln!(stderr, "wrote {} files", outcome.files.len() + 1);
                }
            }
            outcome.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
