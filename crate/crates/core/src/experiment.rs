//! The three experiment commands and their on-disk artifacts.
//!
//! [`run`] computes everything in memory and returns a [`RunOutput`], which
//! [`RunOutput::write`] stores under the configured output directory together
//! with `manifest.json` (config echo plus SHA-256 of every artifact).

use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, MeshKind};
use crate::convergence::ConvergenceStudy;
use crate::diagnostics::diagnostics_csv;
use crate::kernels::{dgs_residual, functional_a, functional_r, kernel_oracle, DifferenceHistory, KernelError, KernelRow};
use crate::mesh::TemporalMesh;
use crate::models::mms::SourceSampling;
use crate::models::{ModelError, Simulation, StepPlan};
use crate::snapshot;

/// Oracle agreement required of every kernel weight.
pub const KERNEL_TOLERANCE: f64 = 1e-10;
/// Relative residual allowed in the discrete gradient structure.
pub const DGS_TOLERANCE: f64 = 1e-12;
/// Lower bound accepted for the two nonnegative functionals.
pub const FUNCTIONAL_FLOOR: f64 = -1e-14;
/// Random scalar histories in the gradient-structure sweep.
pub const DGS_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Converge,
    Evolve,
    Kernels,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Converge => "converge",
            Command::Evolve => "evolve",
            Command::Kernels => "kernels",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "converge" => Ok(Command::Converge),
            "evolve" => Ok(Command::Evolve),
            "kernels" => Ok(Command::Kernels),
            other => Err(format!("unknown command '{other}'")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(ModelError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl ExperimentError {
    /// Process exit status: 2 config, 3 solver, 4 verification, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Solver(_) => 3,
            ExperimentError::Verification(_) => 4,
            ExperimentError::Io(_) => 1,
        }
    }
}

impl From<ModelError> for ExperimentError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Params(m) => ExperimentError::Config(ConfigError::Invalid(m)),
            other => ExperimentError::Solver(other),
        }
    }
}

/// Extra switches that are not part of the config schema.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Options {
    /// Negative control for `kernels`: perturbs one weight before checking.
    pub corrupt_kernel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn text(name: impl Into<String>, text: String) -> Self {
        Self {
            name: name.into(),
            bytes: text.into_bytes(),
        }
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(&self.bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A field written during `evolve`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotEntry {
    pub requested: f64,
    pub actual: f64,
    pub step: usize,
    pub file: String,
}

#[derive(Debug)]
pub struct RunOutput {
    pub command: Command,
    pub config: ExperimentConfig,
    /// Human-readable summary for the console.
    pub report: String,
    pub artifacts: Vec<Artifact>,
    pub snapshots: Vec<SnapshotEntry>,
    /// Set when the run stopped early or a check failed; artifacts are partial.
    pub failure: Option<ExperimentError>,
}

#[derive(Serialize)]
struct ManifestArtifact<'a> {
    file: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    command: Command,
    status: String,
    exit_code: i32,
    config: serde_json::Map<String, serde_json::Value>,
    config_text: String,
    snapshots: &'a [SnapshotEntry],
    artifacts: Vec<ManifestArtifact<'a>>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, ExperimentError::exit_code)
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    /// `manifest.json`. Contains no timestamps, so reruns reproduce it exactly.
    pub fn manifest(&self) -> String {
        let config = self
            .config
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
            .collect();
        let manifest = Manifest {
            program: "fracphase",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            status: self.failure.as_ref().map_or_else(|| "ok".to_string(), ToString::to_string),
            exit_code: self.exit_code(),
            config,
            config_text: self.config.to_text(),
            snapshots: &self.snapshots,
            artifacts: self
                .artifacts
                .iter()
                .map(|a| ManifestArtifact {
                    file: &a.name,
                    bytes: a.bytes.len(),
                    sha256: a.sha256(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        text
    }

    /// Writes every artifact and the manifest into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            fs::write(dir.join(&a.name), &a.bytes)?;
        }
        fs::write(dir.join("manifest.json"), self.manifest())
    }

    /// Writes into the configured `out_dir` and returns it.
    pub fn write(&self) -> io::Result<PathBuf> {
        self.write_to(&self.config.out_dir)?;
        Ok(self.config.out_dir.clone())
    }
}

/// Validates `cfg` and runs `command`. Only configuration problems are
/// returned as `Err`; solver and verification failures come back inside the
/// output so that partial artifacts can still be written.
pub fn run(command: Command, cfg: &ExperimentConfig, options: Options) -> Result<RunOutput, ExperimentError> {
    cfg.validate()?;
    match command {
        Command::Converge => converge(cfg),
        Command::Evolve => evolve(cfg),
        Command::Kernels => kernels(cfg, options),
    }
}

fn converge(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    let params = cfg.model_params()?;
    let grading = cfg.fixed_grading()?;
    if !(cfg.horizon > 0.0) {
        return Err(ConfigError::Value {
            key: "T".into(),
            message: "a convergence study needs T > 0".into(),
        }
        .into());
    }
    if let Some(bad) = cfg.steps.iter().find(|&&n| n == 0) {
        return Err(ConfigError::Value {
            key: "N".into(),
            message: format!("step counts must be positive, got {bad}"),
        }
        .into());
    }
    let mut study = ConvergenceStudy::new(params, cfg.sigma, grading, cfg.steps.clone(), cfg.build_grid()?);
    study.horizon = cfg.horizon;
    study.solver = cfg.solver()?;
    study.sampling = if cfg.interval_average {
        SourceSampling::IntervalAverage
    } else {
        SourceSampling::Midpoint
    };

    let mut out = RunOutput {
        command: Command::Converge,
        config: cfg.clone(),
        report: format!(
            "{} alpha={} sigma={} gamma={} grid={}x{} T={}\n",
            params.kind, params.alpha, cfg.sigma, grading, cfg.grid.0, cfg.grid.1, cfg.horizon
        ),
        artifacts: Vec::new(),
        snapshots: Vec::new(),
        failure: None,
    };
    match study.run() {
        Ok(table) => {
            out.report.push_str(&table.render());
            out.artifacts.push(Artifact::text("convergence.csv", table.csv()));
        }
        Err(e) => out.failure = Some(e.into()),
    }
    Ok(out)
}

fn evolve(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    let params = cfg.model_params()?;
    let grid = cfg.build_grid()?;
    if let Some(t) = cfg.snapshot_times.iter().find(|&&t| t > cfg.horizon) {
        return Err(ConfigError::Value {
            key: "snapshot_times".into(),
            message: format!("{t} is past the final time {}", cfg.horizon),
        }
        .into());
    }
    let plan = if cfg.horizon == 0.0 {
        StepPlan::Fixed(TemporalMesh::from_nodes(vec![0.0]).map_err(|e| ConfigError::Invalid(e.to_string()))?)
    } else {
        cfg.step_plan()?
    };
    let phi0 = cfg.init.build(&grid, cfg.seed);
    let mut sim = Simulation::new(params, phi0, plan, cfg.solver()?)?;

    let mut pending: Vec<f64> = cfg.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    let mut pending = pending.into_iter().peekable();
    let mut snapshots = Vec::new();
    let mut artifacts = Vec::new();
    let mut failure = None;
    // nodes that miss a requested time only by rounding still count as hitting it
    let slack = 1e-12 * cfg.horizon;
    loop {
        while let Some(&t) = pending.peek() {
            if sim.time() < t - slack {
                break;
            }
            let stem = snapshot::file_stem(t);
            artifacts.push(Artifact {
                name: format!("{stem}.fpf1"),
                bytes: snapshot::fpf1_bytes(sim.phi()),
            });
            artifacts.push(Artifact::text(format!("{stem}.csv"), snapshot::to_csv(sim.phi())));
            snapshots.push(SnapshotEntry {
                requested: t,
                actual: sim.time(),
                step: sim.state().step,
                file: format!("{stem}.fpf1"),
            });
            pending.next();
        }
        match sim.step() {
            Ok(Some(_)) => {}
            Ok(None) => break,
            Err(e) => {
                failure = Some(ExperimentError::from(e));
                break;
            }
        }
    }

    let records = sim.records();
    artifacts.push(Artifact::text("diagnostics.csv", diagnostics_csv(records)));
    artifacts.push(Artifact::text("mesh.csv", sim.mesh().to_csv()));

    let first = records[0];
    let last = records[records.len() - 1];
    let max_of = |f: fn(&crate::DiagnosticsRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
    let mut report = String::new();
    let _ = writeln!(
        report,
        "{} alpha={} grid={}x{} mesh={} T={}",
        params.kind, params.alpha, cfg.grid.0, cfg.grid.1, cfg.mesh, cfg.horizon
    );
    let _ = writeln!(report, "steps          {}", last.step);
    let _ = writeln!(report, "final time     {}", last.time);
    let _ = writeln!(report, "E   start/end  {:.10e} / {:.10e}", first.energy, last.energy);
    let _ = writeln!(report, "E_mod start/end {:.10e} / {:.10e}", first.energy_modified, last.energy_modified);
    let _ = writeln!(report, "max mass drift {:.3e}", max_of(|r| r.mass_drift));
    let _ = writeln!(report, "max aux gap    {:.3e}", max_of(|r| r.aux_gap));
    let _ = writeln!(
        report,
        "mesh admissible {}",
        if sim.mesh().check(params.kernel_order()).passed() { "yes" } else { "no" }
    );
    for s in &snapshots {
        let _ = writeln!(report, "snapshot t={} at node t={} (n={})", s.requested, s.actual, s.step);
    }
    if let Some(t) = pending.next() {
        // only reachable after a solver failure
        let _ = writeln!(report, "snapshots from t={t} on were not reached");
    }

    Ok(RunOutput {
        command: Command::Evolve,
        config: cfg.clone(),
        report,
        artifacts,
        snapshots,
        failure,
    })
}

/// Outcome of the kernel verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub order: f64,
    pub steps: usize,
    pub mesh_admissible: bool,
    /// Largest relative gap between a weight and its reference value.
    pub oracle_max_rel: f64,
    /// `(n, j)` of that weight.
    pub oracle_worst: (usize, usize),
    pub dgs_max_rel: f64,
    /// Smallest value of either functional over the sweep.
    pub functional_min: f64,
}

impl KernelReport {
    pub fn passed(&self) -> bool {
        self.oracle_max_rel <= KERNEL_TOLERANCE
            && self.dgs_max_rel <= DGS_TOLERANCE
            && (!self.mesh_admissible || self.functional_min >= FUNCTIONAL_FLOOR)
    }

    pub fn render(&self) -> String {
        let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
        let mut out = format!("kernel order nu={} on {} steps\n", self.order, self.steps);
        let _ = writeln!(
            out,
            "oracle        max rel {:.3e} at (n={}, j={})  [{}]",
            self.oracle_max_rel,
            self.oracle_worst.0,
            self.oracle_worst.1,
            verdict(self.oracle_max_rel <= KERNEL_TOLERANCE)
        );
        let _ = writeln!(
            out,
            "dgs identity  max rel {:.3e} over {DGS_SAMPLES} histories  [{}]",
            self.dgs_max_rel,
            verdict(self.dgs_max_rel <= DGS_TOLERANCE)
        );
        if self.mesh_admissible {
            let _ = writeln!(
                out,
                "functionals   min {:.3e}  [{}]",
                self.functional_min,
                verdict(self.functional_min >= FUNCTIONAL_FLOOR)
            );
        } else {
            let _ = writeln!(
                out,
                "functionals   min {:.3e}  [skipped: mesh violates the step-ratio bound]",
                self.functional_min
            );
        }
        out
    }
}

/// Checks every row of `mesh` against the quadrature oracle (or the exact
/// `ν = 0` rows) and sweeps the gradient-structure identity over random
/// scalar histories.
pub fn verify_kernels(
    mesh: &TemporalMesh,
    nu: f64,
    rows: &[KernelRow],
    seed: u64,
) -> Result<KernelReport, KernelError> {
    let steps = mesh.num_steps();
    let mut worst = (0.0, (1, 0));
    for row in rows {
        let n = row.step();
        for (j, &b) in row.weights().iter().enumerate() {
            let reference = if nu == 0.0 {
                if j == 0 {
                    1.0 / mesh.tau(n)
                } else {
                    0.0
                }
            } else {
                kernel_oracle(mesh, n, n - j, nu)?
            };
            let gap = if reference == 0.0 {
                b.abs()
            } else {
                ((b - reference) / reference).abs()
            };
            if !(gap <= worst.0) {
                worst = (gap, (n, j));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dgs_max = 0.0_f64;
    let mut functional_min = f64::INFINITY;
    for _ in 0..DGS_SAMPLES {
        let increments: Vec<f64> = (0..steps).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let history = DifferenceHistory::from_increments(increments);
        for n in 1..=steps {
            functional_min = functional_min.min(functional_a(&history, mesh, n, nu)?);
            if n >= 2 {
                let res = dgs_residual(&history, mesh, n, nu)?;
                dgs_max = dgs_max.max(res.relative());
                functional_min = functional_min.min(functional_r(&history, mesh, n, nu)?);
            }
        }
    }

    Ok(KernelReport {
        order: nu,
        steps,
        mesh_admissible: mesh.check(nu).passed(),
        oracle_max_rel: worst.0,
        oracle_worst: worst.1,
        dgs_max_rel: dgs_max,
        functional_min: if functional_min.is_finite() { functional_min } else { 0.0 },
    })
}

fn kernels_csv(rows: &[KernelRow]) -> String {
    let mut out = String::from("n,j,b,b_mod\n");
    for row in rows {
        let modified = row.modified();
        for (j, (b, bm)) in row.weights().iter().zip(modified.weights()).enumerate() {
            let _ = writeln!(out, "{},{j},{b:e},{bm:e}", row.step());
        }
    }
    out
}

fn kernels(cfg: &ExperimentConfig, options: Options) -> Result<RunOutput, ExperimentError> {
    let params = cfg.model_params()?;
    let nu = params.kernel_order();
    if cfg.mesh == MeshKind::Adaptive {
        return Err(ConfigError::Value {
            key: "mesh".into(),
            message: "kernel verification needs a uniform or graded mesh".into(),
        }
        .into());
    }
    let mesh = match cfg.step_plan()? {
        StepPlan::Fixed(mesh) if mesh.num_steps() > 0 => mesh,
        _ => {
            return Err(ConfigError::Value {
                key: "N".into(),
                message: "kernel verification needs at least one step".into(),
            }
            .into())
        }
    };
    let to_failure = |e: KernelError| ExperimentError::Solver(ModelError::Kernel(e));
    let mut rows = (1..=mesh.num_steps())
        .map(|n| KernelRow::compute(&mesh, n, nu))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_failure)?;
    if options.corrupt_kernel {
        let last = rows.pop().expect("at least one row");
        let mut weights = last.weights().to_vec();
        let j = weights.len().min(2) - 1;
        weights[j] = weights[j] * (1.0 + 1e-6) + 1e-12;
        rows.push(KernelRow::from_weights(nu, weights));
    }

    let mut out = RunOutput {
        command: Command::Kernels,
        config: cfg.clone(),
        report: String::new(),
        artifacts: vec![Artifact::text("kernels.csv", kernels_csv(&rows))],
        snapshots: Vec::new(),
        failure: None,
    };
    match verify_kernels(&mesh, nu, &rows, cfg.seed) {
        Ok(report) => {
            out.report = report.render();
            if nu == 0.0 {
                for row in rows.iter().take(4) {
                    let _ = writeln!(out.report, "row {}: {:?}", row.step(), row.weights());
                }
            }
            if !report.passed() {
                out.failure = Some(ExperimentError::Verification(format!(
                    "kernel checks out of tolerance (oracle {:.3e}, dgs {:.3e}, functionals {:.3e})",
                    report.oracle_max_rel, report.dgs_max_rel, report.functional_min
                )));
            }
            out.artifacts.push(Artifact::text(
                "kernels_report.json",
                serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
            ));
        }
        Err(e) => out.failure = Some(ExperimentError::Verification(format!("reference computation failed: {e}"))),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ExperimentError::Config(ConfigError::Missing("model")).exit_code(), 2);
        assert_eq!(ExperimentError::from(ModelError::Params("x".into())).exit_code(), 2);
        assert_eq!(ExperimentError::Verification(String::new()).exit_code(), 4);
        let e = run(Command::Evolve, &config("alpha = 0.5"), Options::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn kernels_pass_and_corrupt_fails() {
        let cfg = config("model = ac\nalpha = 0.5\nN = 8\nT = 1");
        let good = run(Command::Kernels, &cfg, Options::default()).unwrap();
        assert_eq!(good.exit_code(), 0, "{}", good.report);
        let csv = std::str::from_utf8(&good.artifact("kernels.csv").unwrap().bytes).unwrap();
        assert_eq!(csv.lines().count(), 1 + 8 * 9 / 2);
        assert!(csv.starts_with("n,j,b,b_mod\n1,0,"));
        let bad = run(Command::Kernels, &cfg, Options { corrupt_kernel: true }).unwrap();
        assert_eq!(bad.exit_code(), 4);
    }

    #[test]
    fn kernels_order_zero_rows() {
        let cfg = config("model = ch\nalpha = 1\nN = 5\nT = 1\nmesh = graded\ngamma = 2");
        let out = run(Command::Kernels, &cfg, Options::default()).unwrap();
        assert_eq!(out.exit_code(), 0, "{}", out.report);
        let csv = std::str::from_utf8(&out.artifact("kernels.csv").unwrap().bytes).unwrap();
        let row2: Vec<&str> = csv.lines().filter(|l| l.starts_with("2,")).collect();
        // τ₂ = 4/25 - 1/25
        let cols: Vec<f64> = row2[0].split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[2] - 25.0 / 3.0).abs() < 1e-12 && (cols[3] - 50.0 / 3.0).abs() < 1e-12);
        assert_eq!(row2[1], "2,1,0e0,0e0");
    }

    #[test]
    fn evolve_snapshots_at_or_after_request() {
        let cfg = config("model = sh\nalpha = 0.8\ngrid = 16\nN = 10\nT = 1\nmesh = graded\ngamma = 2\nsnapshot_times = 0.05, 0, 1");
        let out = run(Command::Evolve, &cfg, Options::default()).unwrap();
        assert_eq!(out.exit_code(), 0);
        let times: Vec<(f64, f64)> = out.snapshots.iter().map(|s| (s.requested, s.actual)).collect();
        assert_eq!(times, vec![(0.0, 0.0), (0.05, 0.09), (1.0, 1.0)]);
        assert!(out.artifact("snapshot_0.05.fpf1").is_some());
        assert!(out.artifact("snapshot_0.05.csv").is_some());
        let diag = std::str::from_utf8(&out.artifact("diagnostics.csv").unwrap().bytes).unwrap();
        assert_eq!(diag.lines().count(), 12);
        let manifest: serde_json::Value = serde_json::from_str(&out.manifest()).unwrap();
        assert_eq!(manifest["status"], "ok");
        assert_eq!(manifest["config"]["model"], "TFSH");
        assert_eq!(manifest["artifacts"].as_array().unwrap().len(), out.artifacts.len());
    }

    #[test]
    fn written_files_match_manifest_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("model = ac\nalpha = 0.5\ngrid = 8\nN = 3\nT = 0.3\nsnapshot_times = 0.1");
        let out = run(Command::Evolve, &cfg, Options::default()).unwrap();
        out.write_to(dir.path()).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        let listed = manifest["artifacts"].as_array().unwrap();
        assert_eq!(listed.len(), 4);
        for a in listed {
            let bytes = fs::read(dir.path().join(a["file"].as_str().unwrap())).unwrap();
            let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            assert_eq!(a["sha256"], digest.as_str());
        }
        // the node is 0.09999999999999999
        let actual = manifest["snapshots"][0]["actual"].as_f64().unwrap();
        assert!((actual - 0.1).abs() < 1e-15);
        assert_eq!(manifest["snapshots"][0]["step"], 1);
    }

    #[test]
    fn evolve_rejects_late_snapshot() {
        let cfg = config("model = ac\nalpha = 0.5\nT = 1\nsnapshot_times = 2");
        assert_eq!(run(Command::Evolve, &cfg, Options::default()).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn converge_single_level() {
        let cfg = config("model = ac\nalpha = 0.5\ngrid = 8\nN = 4");
        let out = run(Command::Converge, &cfg, Options::default()).unwrap();
        assert_eq!(out.exit_code(), 0);
        let csv = std::str::from_utf8(&out.artifact("convergence.csv").unwrap().bytes).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
        let adaptive = config("model = ac\nalpha = 0.5\nmesh = adaptive");
        assert_eq!(run(Command::Converge, &adaptive, Options::default()).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn solver_failure_keeps_partial_output() {
        // no linear solve can reach this tolerance in floating point
        let cfg = config("model = ch\nalpha = 0.5\ngrid = 16\nN = 4\ntol = 1e-300\nsnapshot_times = 0, 1");
        let out = run(Command::Evolve, &cfg, Options::default()).unwrap();
        assert_eq!(out.exit_code(), 3, "{}", out.report);
        assert!(out.artifact("diagnostics.csv").is_some());
        assert!(out.artifact("snapshot_0.fpf1").is_some());
        assert!(out.artifact("snapshot_1.fpf1").is_none());
        assert!(out.manifest().contains("solver failure"));
        assert!(out.report.contains("not reached"));
    }
}
