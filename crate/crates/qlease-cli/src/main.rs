//! `qlease` — lease lifecycle commands, security-game experiments, the
//! de-quantumization attack demo, and the mathematical self-test.
//!
//! Exit codes: 0 success, 1 assertion/experiment failure, 2 usage or file
//! errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlease_cli::commands;
use qlease_cli::config::{load_config_file, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "qlease", version, about = "subspace-coset software leasing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Field modulus (prime: 2, 3, 5, 7).
    #[arg(long)]
    q: Option<u8>,
    /// Ambient dimension / security parameter.
    #[arg(long)]
    lambda: Option<usize>,
    /// Circuit input length.
    #[arg(long)]
    n: Option<usize>,
    /// Oracle mode: ideal or toy.
    #[arg(long)]
    mode: Option<String>,
    /// 64-bit master seed (falls back to QLEASE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Pirate strategy list (repeatable / comma-separated);
    /// budget_bruteforce_mauler accepts :budget.
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    /// Circuit sampler: point, wildcard, affine, affine3, plaintext_eq,
    /// unpredictable.
    #[arg(long)]
    sampler: Option<String>,
    /// β threshold of the security definitions.
    #[arg(long)]
    beta: Option<f64>,
    /// Which security game: finite, infinite, or both.
    #[arg(long)]
    experiment: Option<String>,
    /// Optional JSON config file; flags win over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonOpts {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(path) => Some(load_config_file(path)?),
            None => None,
        };
        let flags = Overrides {
            q: self.q,
            lambda: self.lambda,
            n: self.n,
            mode: self.mode.clone(),
            seed: self.seed,
            trials: self.trials,
            strategy: self.strategy.clone(),
            sampler: self.sampler.clone(),
            beta: self.beta,
            experiment: self.experiment.clone(),
        };
        RunConfig::resolve(file.as_ref(), &flags)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the mathematical identity suites (Fourier-dual, projector,
    /// gentle measurement, dual dimensions, trace distance).
    Selftest {
        #[command(flatten)]
        common: CommonOpts,
        /// Absolute tolerance for the identity suites.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Lease a circuit file: writes crs.json, lease.json, lessor.json, and
    /// the quantum state dump into --out.
    Lease {
        #[command(flatten)]
        common: CommonOpts,
        /// Circuit description (JSON).
        #[arg(long)]
        circuit: PathBuf,
        /// Output bundle directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a leased program; prints the output or ⊥ and rewrites the
    /// post-measurement state.
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Lease bundle directory.
        #[arg(long)]
        lease: PathBuf,
        /// Input bits, e.g. 010110.
        #[arg(long)]
        input: String,
    },
    /// The lessor's verification measurement; prints 0 or 1.
    Check {
        #[command(flatten)]
        common: CommonOpts,
        /// Lease bundle directory.
        #[arg(long)]
        lease: PathBuf,
    },
    /// Run pirate strategies through the finite-/infinite-term security
    /// games and write JSON (and optionally CSV) reports.
    Experiment {
        #[command(flatten)]
        common: CommonOpts,
        /// Output directory for experiment.json / experiment.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format: json, csv, or both.
        #[arg(long, default_value = "json")]
        format: String,
        /// Stamp the report with wall-clock time (breaks byte-identical
        /// reruns).
        #[arg(long, default_value_t = false)]
        stamp: bool,
    },
    /// The de-quantumization attack demo; writes a JSON trace with
    /// per-trial equality verdicts.
    Attack {
        #[command(flatten)]
        common: CommonOpts,
        /// Output directory for attack.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of attack trials (default 1).
        #[arg(long, default_value_t = 1)]
        attack_trials: u64,
        #[arg(long, default_value_t = false)]
        stamp: bool,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Selftest { common, tolerance } => {
            let config = common.resolve()?;
            commands::cmd_selftest(config.seed, tolerance)
        }
        Command::Lease { common, circuit, out } => {
            let config = common.resolve()?;
            commands::cmd_lease(&config, &circuit, &out)
        }
        Command::Run { common, lease, input } => {
            let config = common.resolve()?;
            commands::cmd_run(&lease, &input, config.seed)
        }
        Command::Check { common, lease } => {
            let config = common.resolve()?;
            commands::cmd_check(&lease, config.seed)
        }
        Command::Experiment { common, out, format, stamp } => {
            let config = common.resolve()?;
            if !matches!(format.as_str(), "json" | "csv" | "both") {
                anyhow::bail!("format must be json, csv, or both");
            }
            let out_dir = commands::resolve_out_dir(out, "qlease-out");
            commands::cmd_experiment(&config, &out_dir, &format, stamp)
        }
        Command::Attack { common, out, attack_trials, stamp } => {
            let mut config = common.resolve()?;
            config.trials = attack_trials;
            let out_dir = commands::resolve_out_dir(out, "qlease-out");
            commands::cmd_attack(&config, &out_dir, stamp)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {:#}", err);
            ExitCode::from(2)
        }
    }
}
