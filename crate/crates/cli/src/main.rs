use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracphase::config::{ConfigError, ExperimentConfig};
use fracphase::experiment::{self, Command, ExperimentError, Options};

#[derive(Parser)]
#[command(
    name = "fracphase",
    version,
    about = "Time-fractional phase-field experiments",
    after_help = "Exit status: 0 success, 1 output error, 2 configuration error, 3 solver failure, 4 verification failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Temporal convergence table against the manufactured solution.
    Converge(Common),
    /// Evolve a model, writing diagnostics, the mesh and snapshots.
    Evolve(Common),
    /// Verify kernel rows against quadrature and the gradient-structure identity.
    Kernels {
        #[command(flatten)]
        common: Common,
        /// Perturb one kernel weight (negative control).
        #[arg(long, hide = true)]
        corrupt_kernel: bool,
    },
}

/// Flags named after config keys override the values in `--config`.
#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long = "out-dir", visible_alias = "out_dir", value_name = "DIR")]
    out_dir: Option<String>,
    /// Any config key, as `KEY=VALUE` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    set: Vec<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Step count, or a comma list for `converge`.
    #[arg(long = "N")]
    steps: Option<String>,
    /// `n` or `nx x ny`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "Lx", allow_hyphen_values = true)]
    lx: Option<String>,
    #[arg(long = "Ly", allow_hyphen_values = true)]
    ly: Option<String>,
    #[arg(long = "T", allow_hyphen_values = true)]
    horizon: Option<String>,
    #[arg(long = "M", allow_hyphen_values = true)]
    mobility: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long = "S", allow_hyphen_values = true)]
    stabilizer: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long = "tau_min", visible_alias = "tau-min", allow_hyphen_values = true)]
    tau_min: Option<String>,
    #[arg(long = "tau_max", visible_alias = "tau-max", allow_hyphen_values = true)]
    tau_max: Option<String>,
    /// uniform, graded or adaptive.
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// random, pattern or profile.
    #[arg(long)]
    init: Option<String>,
    #[arg(long = "snapshot_times", visible_alias = "snapshot-times", allow_hyphen_values = true)]
    snapshot_times: Option<String>,
    /// midpoint or average.
    #[arg(long)]
    sampling: Option<String>,
}

impl Common {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let flags = [
            ("model", &self.model),
            ("alpha", &self.alpha),
            ("sigma", &self.sigma),
            ("gamma", &self.gamma),
            ("N", &self.steps),
            ("grid", &self.grid),
            ("Lx", &self.lx),
            ("Ly", &self.ly),
            ("T", &self.horizon),
            ("M", &self.mobility),
            ("epsilon", &self.epsilon),
            ("g", &self.g),
            ("delta", &self.delta),
            ("S", &self.stabilizer),
            ("lambda", &self.lambda),
            ("tau_min", &self.tau_min),
            ("tau_max", &self.tau_max),
            ("mesh", &self.mesh),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("init", &self.init),
            ("snapshot_times", &self.snapshot_times),
            ("out_dir", &self.out_dir),
            ("sampling", &self.sampling),
        ];
        flags
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    fn load(&self) -> Result<ExperimentConfig, ExperimentError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    ConfigError::Invalid(format!("cannot read config file {}: {e}", path.display()))
                })?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        for entry in &self.set {
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| ConfigError::Invalid(format!("--set expects KEY=VALUE, got '{entry}'")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        for (k, v) in self.overrides() {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<i32, ExperimentError> {
    let (command, common, options) = match &cli.command {
        Cmd::Converge(c) => (Command::Converge, c, Options::default()),
        Cmd::Evolve(c) => (Command::Evolve, c, Options::default()),
        Cmd::Kernels { common, corrupt_kernel } => (
            Command::Kernels,
            common,
            Options {
                corrupt_kernel: *corrupt_kernel,
            },
        ),
    };
    let cfg = common.load()?;
    let output = experiment::run(command, &cfg, options)?;
    print!("{}", output.report);
    let dir = output.write()?;
    println!("wrote {} files to {}", output.artifacts.len() + 1, dir.display());
    if let Some(failure) = &output.failure {
        eprintln!("fracphase: {failure}");
    }
    Ok(output.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = execute(cli).unwrap_or_else(|e| {
        eprintln!("fracphase: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
