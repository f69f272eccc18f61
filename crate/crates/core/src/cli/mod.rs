//! Command-line front end.
//!
//! Every command that writes files also writes a [`RunManifest`] next to
//! them; `qdrt replay <manifest>` re-runs the recorded command and
//! reproduces the artifacts byte for byte.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::montecarlo::{McError, Mode, PathLossStatistic, PlacementSharing};
use crate::rcs::RcsError;
use crate::scene::{load_scene, ObjectKind, Scene, SceneError};
use crate::stats::StatsError;

pub use manifest::{RunManifest, MANIFEST_SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("invalid manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Rcs(#[from] RcsError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qdrt", version, about = "Deterministic and quasi-deterministic ray tracing of a 60 GHz street canyon")]
pub struct Cli {
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Print the default scenario as TOML.
    DefaultScene,
    /// Generate a bistatic RCS dataset and fit a logistic law to it.
    RcsDataset(RcsDatasetArgs),
    /// Monte-Carlo runs over a range of object counts, with Weibull and
    /// lognormal fits per count.
    Run(RunArgs),
    /// Test D-RT against QD-RT; exits 0 iff both tests pass.
    Compare(CompareArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DefaultScene => "default-scene",
            Command::RcsDataset(_) => "rcs-dataset",
            Command::Run(_) => "run",
            Command::Compare(_) => "compare",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CommonArgs {
    /// Scene TOML (default: the built-in scenario).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetObject {
    Pedestrian,
    Car,
    Lamppost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxKind {
    Pedestrian,
    Car,
}

impl From<BoxKind> for ObjectKind {
    fn from(k: BoxKind) -> Self {
        match k {
            BoxKind::Pedestrian => ObjectKind::Pedestrian,
            BoxKind::Car => ObjectKind::ParkedCar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Joint angles toward TX and RX of a uniformly placed object.
    Placement,
    /// Independent per-side draws from the coverage density.
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Deterministic,
    Quasi,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Deterministic => Mode::Deterministic,
            ModeArg::Quasi => Mode::Quasi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticArg {
    /// Scatter paths of the placed objects only.
    Objects,
    /// Adds LOS, reflections and lampposts.
    Full,
}

impl From<StatisticArg> for PathLossStatistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::Objects => PathLossStatistic::ObjectsOnly,
            StatisticArg::Full => PathLossStatistic::FullChannel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingArg {
    Shared,
    Independent,
}

impl From<SharingArg> for PlacementSharing {
    fn from(s: SharingArg) -> Self {
        match s {
            SharingArg::Shared => PlacementSharing::Shared,
            SharingArg::Independent => PlacementSharing::Independent,
        }
    }
}

/// How the quasi-mode logistic law is obtained.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LawArgs {
    /// Dataset size for fitting the logistic law.
    #[arg(long, default_value_t = 10_000)]
    pub law_samples: usize,
    /// Use this location (dBsm) instead of fitting.
    #[arg(long, requires = "law_scale")]
    pub law_mu: Option<f64>,
    /// Use this scale (dB) instead of fitting.
    #[arg(long, requires = "law_mu")]
    pub law_scale: Option<f64>,
    /// Added to the location after fitting, to mis-specify the law on purpose.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RcsDatasetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub object: DatasetObject,
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "placement")]
    pub angles: AngleMode,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub object: BoxKind,
    #[arg(long, value_enum, default_value = "deterministic")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1000)]
    pub replications: usize,
    #[arg(long, value_enum, default_value = "objects")]
    pub statistic: StatisticArg,
    /// Permutations for the fit goodness-of-fit checks.
    #[arg(long, default_value_t = 999)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub object: BoxKind,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub replications: usize,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = crate::stats::DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, value_enum, default_value = "independent")]
    pub placements: SharingArg,
    #[arg(long, value_enum, default_value = "objects")]
    pub statistic: StatisticArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Files written, relative to the output directory.
    pub artifacts: Vec<PathBuf>,
    /// `false` when a compare test rejected equivalence.
    pub success: bool,
}

pub fn resolve_scene(config: Option<&Path>) -> Result<Scene, CliError> {
    match config {
        None => Ok(Scene::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Ok(load_scene(&text)?)
        }
    }
}

/// Runs `command`, optionally on a dedicated pool of `threads` workers.
pub fn run_command(command: &Command, threads: Option<usize>) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::ThreadPool(e.to_string()))?;
    pool.install(|| commands::dispatch(command))
}

/// Parses `args` (including the program name) and runs. Exit codes: 0
/// success, 1 equivalence rejected by `compare`, 2 usage error, 3 runtime
/// error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(&cli.command, cli.threads) {
        Ok(outcome) if outcome.success => 0,
        Ok(_) => 1,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}
