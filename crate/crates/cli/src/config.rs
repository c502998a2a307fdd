//! Strict TOML run configuration layered over the experiment presets.

use std::path::{Path, PathBuf};

use pullpush::network::OptimizerKind;
use pullpush::problems::{
    ExperimentId, ExperimentSettings, InverseSettings, NetworkSettings, ScheduleKind, SolverSettings,
    TrainingSettings,
};
use pullpush::training::UpdateGranularity;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable that overrides where run directories are created.
pub const OUTPUT_ROOT_VAR: &str = "PULLPUSH_OUTPUT_ROOT";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_width: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub granularity: Option<UpdateGranularity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_decay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ic_weight: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
}

/// A run file. Only `experiment` is required; every other value falls back
/// to the experiment's preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Run directory. Relative paths resolve against the output root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default)]
    pub network: NetworkOverrides,
    #[serde(default)]
    pub training: TrainingOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<InverseOverrides>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Preset values with this file's overrides applied.
    pub fn settings(&self) -> Result<ExperimentSettings, CliError> {
        let mut s = ExperimentSettings::preset(self.experiment);
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        let sv = &self.solver;
        set(&mut s.solver.dt, sv.dt);
        set(&mut s.solver.steps, sv.steps);
        if sv.dx.is_some() {
            s.solver.dx = sv.dx;
        }
        set(&mut s.network.hidden_layers, self.network.hidden_layers);
        set(&mut s.network.hidden_width, self.network.hidden_width);
        let t = &self.training;
        set(&mut s.training.epochs, t.epochs);
        set(&mut s.training.batch_size, t.batch_size);
        set(&mut s.training.granularity, t.granularity);
        set(&mut s.training.lr, t.lr);
        set(&mut s.training.schedule, t.schedule);
        set(&mut s.training.min_lr, t.min_lr);
        set(&mut s.training.optimizer, t.optimizer);
        set(&mut s.training.weight_decay, t.weight_decay);
        set(&mut s.training.ic_weight, t.ic_weight);
        if let Some(inv) = &self.inverse {
            let target = s.inverse.as_mut().ok_or_else(|| {
                CliError::Config(format!("[inverse] given for the forward experiment {}", self.experiment))
            })?;
            set(&mut target.truth, inv.truth.clone());
            set(&mut target.initial, inv.initial.clone());
            set(&mut target.noise, inv.noise);
            set(&mut target.lr, inv.lr);
        }
        Ok(s)
    }

    /// Config with every value spelled out; loading it reproduces `settings`.
    pub fn resolved(settings: &ExperimentSettings, output_dir: Option<PathBuf>) -> Self {
        let SolverSettings { dt, steps, dx } = settings.solver.clone();
        let NetworkSettings {
            hidden_layers,
            hidden_width,
        } = settings.network.clone();
        let TrainingSettings {
            epochs,
            batch_size,
            granularity,
            lr,
            schedule,
            min_lr,
            optimizer,
            weight_decay,
            ic_weight,
        } = settings.training.clone();
        Self {
            experiment: settings.experiment,
            seed: Some(settings.seed),
            output_dir,
            solver: SolverOverrides {
                dt: Some(dt),
                dx,
                steps: Some(steps),
            },
            network: NetworkOverrides {
                hidden_layers: Some(hidden_layers),
                hidden_width: Some(hidden_width),
            },
            training: TrainingOverrides {
                epochs: Some(epochs),
                batch_size: Some(batch_size),
                granularity: Some(granularity),
                lr: Some(lr),
                schedule: Some(schedule),
                min_lr: Some(min_lr),
                optimizer: Some(optimizer),
                weight_decay: Some(weight_decay),
                ic_weight: Some(ic_weight),
            },
            inverse: settings.inverse.clone().map(|InverseSettings { truth, initial, noise, lr }| InverseOverrides {
                truth: Some(truth),
                initial: Some(initial),
                noise: Some(noise),
                lr: Some(lr),
            }),
        }
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Where this run writes. Absolute paths win; otherwise the run lands
    /// under the output root (`$PULLPUSH_OUTPUT_ROOT`, else `runs`).
    pub fn output_dir(&self) -> PathBuf {
        let dir = self
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(self.experiment.as_str()));
        if dir.is_absolute() {
            return dir;
        }
        output_root().join(dir)
    }
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
