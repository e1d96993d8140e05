//! Command-line experiment runner.
//!
//! Each subcommand resolves a configuration from an optional TOML file plus
//! flag overrides (flags win), runs the experiment, and writes one CSV or
//! JSON file. Nothing is written unless the configuration is valid.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{ConfigFile, Experiment, ExperimentConfig, Format, Mode};

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pathport",
    version,
    about = "Path-encoded teleportation experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Teleport the six cardinal states and report their fidelities.
    TeleportSix(CommonArgs),
    /// Average fidelities as a function of path-interference visibility.
    SweepVisibility(SweepArgs),
    /// Visibilities, CHSH value and density matrix of the entangled source.
    CharacterizeSource(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub n_events: Option<u64>,
    #[arg(long)]
    pub werner_p: Option<f64>,
    #[arg(long)]
    pub visibility: Option<f64>,
    #[arg(long)]
    pub path1_depol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated visibility values, e.g. `0,0.5,0.83,1`.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

impl CommonArgs {
    fn overrides(&self) -> ConfigFile {
        ConfigFile {
            experiment: None,
            werner_p: self.werner_p,
            visibility: self.visibility,
            path1_depol: self.path1_depol,
            mode: self.mode,
            n_events: self.n_events,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
            visibility_grid: None,
        }
    }
}

fn resolve(
    experiment: Experiment,
    args: &CommonArgs,
    grid: Option<Vec<f64>>,
) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut overrides = args.overrides();
    overrides.visibility_grid = grid;
    ExperimentConfig::resolve(experiment, file.merged(overrides))
}

impl Command {
    pub fn config(&self) -> Result<ExperimentConfig, CliError> {
        match self {
            Command::TeleportSix(args) => resolve(Experiment::TeleportSix, args, None),
            Command::SweepVisibility(args) => {
                resolve(Experiment::SweepVisibility, &args.common, args.grid.clone())
            }
            Command::CharacterizeSource(args) => {
                resolve(Experiment::CharacterizeSource, args, None)
            }
        }
    }
}

/// Runs a resolved configuration and returns the rendered document.
pub fn execute(config: &ExperimentConfig) -> Result<String, CliError> {
    let table = match config.experiment {
        Experiment::TeleportSix => commands::teleport_six(config)?,
        Experiment::SweepVisibility => commands::sweep_visibility(config)?,
        Experiment::CharacterizeSource => commands::characterize_source(config)?,
    };
    Ok(output::render(&table, config))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = cli.command.config()?;
    let text = execute(&config)?;
    match &config.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
