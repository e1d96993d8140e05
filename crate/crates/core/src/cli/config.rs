use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::protocol::NoiseModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    TeleportSix,
    SweepVisibility,
    CharacterizeSource,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::TeleportSix => "teleport-six",
            Experiment::SweepVisibility => "sweep-visibility",
            Experiment::CharacterizeSource => "characterize-source",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Contents of a `--config` TOML file. Every key is optional; unknown keys
/// are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub werner_p: Option<f64>,
    pub visibility: Option<f64>,
    pub path1_depol: Option<f64>,
    pub mode: Option<Mode>,
    pub n_events: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub visibility_grid: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Values set in `overrides` replace values from `self`.
    pub fn merged(self, overrides: ConfigFile) -> ConfigFile {
        ConfigFile {
            experiment: overrides.experiment.or(self.experiment),
            werner_p: overrides.werner_p.or(self.werner_p),
            visibility: overrides.visibility.or(self.visibility),
            path1_depol: overrides.path1_depol.or(self.path1_depol),
            mode: overrides.mode.or(self.mode),
            n_events: overrides.n_events.or(self.n_events),
            seed: overrides.seed.or(self.seed),
            out: overrides.out.or(self.out),
            format: overrides.format.or(self.format),
            visibility_grid: overrides.visibility_grid.or(self.visibility_grid),
        }
    }
}

pub fn default_visibility_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// A fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub noise: NoiseModel,
    pub mode: Mode,
    pub n_events: Option<u64>,
    pub seed: Option<u64>,
    pub format: Format,
    pub visibility_grid: Vec<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Resolves `file` for `experiment`; a conflicting `experiment` key is
    /// an error.
    pub fn resolve(experiment: Experiment, file: ConfigFile) -> Result<Self, CliError> {
        if let Some(requested) = file.experiment {
            if requested != experiment {
                return Err(CliError::Config(format!(
                    "config names experiment `{requested}` but `{experiment}` was invoked"
                )));
            }
        }
        let noise = NoiseModel::new(
            file.werner_p.unwrap_or(1.0),
            file.visibility.unwrap_or(1.0),
            file.path1_depol.unwrap_or(0.0),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let mode = file.mode.unwrap_or(Mode::Exact);
        if mode == Mode::Sampled {
            match file.n_events {
                None => return Err(CliError::Config("sampled mode requires n_events".into())),
                Some(0) => return Err(CliError::Config("n_events must be at least 1".into())),
                Some(_) => {}
            }
            if file.seed.is_none() {
                return Err(CliError::Config("sampled mode requires a seed".into()));
            }
            if experiment == Experiment::CharacterizeSource {
                return Err(CliError::Config(
                    "characterize-source supports exact mode only".into(),
                ));
            }
        }
        let visibility_grid = if experiment == Experiment::SweepVisibility {
            let grid = file.visibility_grid.unwrap_or_else(default_visibility_grid);
            if grid.len() < 2 {
                return Err(CliError::Config(
                    "visibility grid needs at least 2 points".into(),
                ));
            }
            if let Some(bad) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(CliError::Config(format!(
                    "visibility grid value {bad} is outside [0, 1]"
                )));
            }
            grid
        } else {
            Vec::new()
        };
        Ok(Self {
            experiment,
            noise,
            mode,
            n_events: file.n_events,
            seed: file.seed,
            format: file.format.unwrap_or(Format::Csv),
            visibility_grid,
            out: file.out,
        })
    }

    /// SHA-256 of the canonical JSON form; the output path is excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
