//! Command-line experiment runner.
//!
//! Subcommands: `enroll`, `verify`, `attack` (verify with a required attack
//! model), `hist` and `sweep`. Settings come from an optional TOML file
//! (`--config`) overridden by flags. With a fixed `--seed` every output file is
//! byte-identical across runs and thread counts.
//!
//! Exit status: 0 success, 2 usage, 3 I/O or unreadable file, 4 model
//! dimension mismatch, 1 anything else.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{
    cmd_attack, cmd_enroll, cmd_hist, cmd_sweep, cmd_verify, config_header, EnrollSummary,
    VerifyReport,
};
pub use config::{AttackKind, ExperimentConfig, Threshold};

use crate::error::QsaError;
use crate::optics::KeyModel;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DIMENSION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error(transparent)]
    Model(#[from] QsaError),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Format { .. } => EXIT_IO,
            CliError::Model(QsaError::DimensionMismatch { .. } | QsaError::InvalidDimension(_)) => {
                EXIT_DIMENSION
            }
            CliError::Model(QsaError::InvalidParameter { .. }) => EXIT_USAGE,
            CliError::Model(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qsa",
    version,
    about = "Quantum-secure authentication simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enroll challenge-response pairs of a key into a database file.
    Enroll(CommonArgs),
    /// Authenticate a responder against a database.
    Verify(VerifyArgs),
    /// Same as verify, with a non-trivial --attack required.
    Attack(VerifyArgs),
    /// Single-round photodetection histogram (count,frequency).
    Hist(HistArgs),
    /// Optimal-threshold error rates over S and rounds (S,n,rounds,threshold,far,frr).
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Database written by `enroll`.
    #[arg(long)]
    pub database: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    /// Database to draw records from; enrolls in memory when absent.
    #[arg(long)]
    pub database: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,

    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub photons: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub key_seed: Option<u64>,
    #[arg(long)]
    pub key_model: Option<KeyModel>,
    #[arg(long)]
    pub records: Option<usize>,
    #[arg(long)]
    pub attack: Option<AttackKind>,
    #[arg(long)]
    pub random_key_seed: Option<u64>,
    #[arg(long)]
    pub emulator_fraction: Option<f64>,
    #[arg(long)]
    pub flood_mean: Option<f64>,
    /// Monitor-to-pinhole flood ratio (default: unshaped flood, K - 1).
    #[arg(long)]
    pub flood_geometry: Option<f64>,
    #[arg(long)]
    pub blinding_inner: Option<AttackKind>,
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Combined threshold: a count or "auto".
    #[arg(long)]
    pub threshold: Option<Threshold>,
    #[arg(long)]
    pub fake_fraction: Option<f64>,
    #[arg(long)]
    pub fake_alarm_limit: Option<u64>,
    #[arg(long)]
    pub monitor_alarm_factor: Option<f64>,
    #[arg(long)]
    pub monitor_efficiency: Option<f64>,
    #[arg(long)]
    pub dark_count_mean: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub sessions: Option<u64>,
    #[arg(long)]
    pub sweep_modes: Option<usize>,
    /// Comma-separated security parameters.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub s_values: Option<Vec<f64>>,
    /// Comma-separated round counts.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub rounds_values: Option<Vec<u32>>,
    #[arg(long)]
    pub seed: Option<u64>,
}

macro_rules! override_fields {
    ($cfg:ident, $args:ident, $($f:ident),* $(,)?) => {
        $( if let Some(v) = $args.$f.clone() { $cfg.$f = v; } )*
    };
}

impl CommonArgs {
    /// Loads `--config` (or defaults) and applies flag overrides.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                ExperimentConfig::from_toml(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        let args = self;
        override_fields!(
            cfg,
            args,
            modes,
            photons,
            eta,
            key_seed,
            key_model,
            records,
            attack,
            random_key_seed,
            emulator_fraction,
            flood_mean,
            blinding_inner,
            rounds,
            threshold,
            fake_fraction,
            fake_alarm_limit,
            monitor_alarm_factor,
            monitor_efficiency,
            dark_count_mean,
            trials,
            sessions,
            sweep_modes,
            s_values,
            rounds_values,
            seed,
        );
        if args.flood_geometry.is_some() {
            cfg.flood_geometry = args.flood_geometry;
        }
        Ok(cfg)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(f),
        None => f(),
    }
}

fn run_verify(args: &VerifyArgs, attack_required: bool) -> Result<(), CliError> {
    let config = args.common.resolve()?;
    let db = commands::read_database(&args.database)?;
    let report = with_threads(args.common.threads, || {
        if attack_required {
            cmd_attack(&config, &db)
        } else {
            cmd_verify(&config, &db)
        }
    })?;
    print!("{}", report.summary());
    if let Some(path) = &args.common.output {
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        write_output(Some(path), &json)?;
    }
    Ok(())
}

/// Executes a parsed command line.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Enroll(args) => {
            let config = args.resolve()?;
            let path = args
                .output
                .as_deref()
                .ok_or_else(|| CliError::Usage("enroll requires --output".into()))?;
            let (db, summary) = with_threads(args.threads, || cmd_enroll(&config))?;
            write_output(Some(path), &db.to_json())?;
            println!(
                "enrolled {} records of {} (K = {}), mean expected gamma_sq = {:.6}",
                summary.records, summary.key_id, summary.modes, summary.mean_expected_gamma_sq
            );
            Ok(())
        }
        Command::Verify(args) => run_verify(&args, false),
        Command::Attack(args) => run_verify(&args, true),
        Command::Hist(args) => {
            let config = args.common.resolve()?;
            let db = args
                .database
                .as_deref()
                .map(commands::read_database)
                .transpose()?;
            let (_, text) = with_threads(args.common.threads, || cmd_hist(&config, db.as_ref()))?;
            write_output(args.common.output.as_deref(), &text)
        }
        Command::Sweep(args) => {
            let config = args.resolve()?;
            let (_, text) = with_threads(args.threads, || cmd_sweep(&config))?;
            write_output(args.output.as_deref(), &text)
        }
    }
}

/// Parses `argv` and runs it, returning the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qsa: {e}");
            e.exit_code()
        }
    }
}
