use std::path::{Path, PathBuf};

use pullpush::diagnostics::ProbeConfig;
use pullpush::network::Mlp;
use pullpush::problems::{
    diagnose, export_fields, run, Diagnosis, ExperimentId, ExperimentSettings, Problem, ProblemError, RunOutcome,
};
use pullpush::training::{EpochRecord, RunRecord, Surrogate};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::{write_atomic, CliError};

pub const RUN_FILE: &str = "run.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const RESOLVED_CONFIG_FILE: &str = "resolved-config.toml";
pub const DIAGNOSIS_FILE: &str = "diagnosis.json";

/// Trained network plus everything needed to rebuild its problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub experiment: ExperimentId,
    pub settings: ExperimentSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    pub network: Mlp,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading {}", path.display()),
            source,
        })?;
        let ck: Self = serde_json::from_str(&text).map_err(|source| CliError::Json {
            context: path.display().to_string(),
            source,
        })?;
        if ck.settings.experiment != ck.experiment {
            return Err(CliError::Config(format!(
                "checkpoint names {} but its settings are for {}",
                ck.experiment, ck.settings.experiment
            )));
        }
        ck.network
            .validate()
            .map_err(|e| CliError::Config(format!("checkpoint network: {e}")))?;
        Ok(ck)
    }

    /// Rebuild problem and surrogate, insisting on the expected experiment.
    pub fn restore(&self, expected: ExperimentId) -> Result<(Problem, Surrogate), CliError> {
        if self.experiment != expected {
            return Err(CliError::Config(format!(
                "checkpoint is for {}, not {expected}",
                self.experiment
            )));
        }
        let problem = Problem::new(self.settings.clone())?;
        let surrogate = problem
            .surrogate_from_net(self.network.clone())
            .map_err(|e| CliError::Config(format!("checkpoint does not fit {expected}: {e}")))?;
        Ok((problem, surrogate))
    }
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub dir: PathBuf,
    pub record: RunRecord,
    pub checkpoint: Checkpoint,
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("plain data serializes");
    v.push(b'\n');
    v
}

fn write_record(dir: &Path, record: &RunRecord) -> Result<(), CliError> {
    write_atomic(&dir.join(RUN_FILE), &json(record))?;
    write_atomic(&dir.join(METRICS_FILE), record.metrics_csv().as_bytes())
}

/// Run a config and write its artifacts. An aborted run still leaves its
/// partial `run.json` and `metrics.csv` behind before the error returns.
pub fn train(config: &ExperimentConfig, observer: &mut dyn FnMut(&EpochRecord)) -> Result<TrainArtifacts, CliError> {
    let settings = config.settings()?;
    let dir = config.output_dir();
    let resolved = ExperimentConfig::resolved(&settings, config.output_dir.clone());
    // Validate before creating anything on disk.
    Problem::new(settings.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    write_atomic(&dir.join(RESOLVED_CONFIG_FILE), resolved.to_toml()?.as_bytes())?;
    let outcome = match run(settings.clone(), observer) {
        Ok(o) => o,
        Err(ProblemError::Aborted(abort)) => {
            write_record(&dir, &abort.record)?;
            return Err(ProblemError::Aborted(abort).into());
        }
        Err(e) => return Err(e.into()),
    };
    let RunOutcome {
        record, surrogate, beta, ..
    } = outcome;
    write_record(&dir, &record)?;
    let checkpoint = Checkpoint {
        experiment: settings.experiment,
        settings,
        beta,
        network: surrogate.net().clone(),
    };
    write_atomic(&dir.join(CHECKPOINT_FILE), &json(&checkpoint))?;
    Ok(TrainArtifacts {
        dir,
        record,
        checkpoint,
    })
}

/// Certificates for a checkpoint; also written as `diagnosis.json` beside it.
pub fn diagnose_checkpoint(
    path: &Path,
    expected: ExperimentId,
    probes: &ProbeConfig,
    safety: f64,
) -> Result<Diagnosis, CliError> {
    let ck = Checkpoint::load(path)?;
    let (problem, surrogate) = ck.restore(expected)?;
    let d = diagnose(&problem, &surrogate, probes, safety)?;
    let out = path.with_file_name(DIAGNOSIS_FILE);
    write_atomic(&out, &json(&d))?;
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportOutcome {
    pub files: Vec<PathBuf>,
    pub params: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Parameters for an export: named overrides on top of a default sample
/// (the observed system for inverse runs, else the middle training sample).
pub fn export_params(problem: &Problem, overrides: &[(String, f64)]) -> Result<Vec<f64>, CliError> {
    let names = problem.id().param_names();
    let mut params = match &problem.settings.inverse {
        Some(inv) => inv.truth.clone(),
        None => problem.train_params[problem.train_params.len() / 2].clone(),
    };
    for (name, value) in overrides {
        let i = names.iter().position(|n| n == name).ok_or_else(|| {
            CliError::Config(format!("{} has no parameter `{name}` (expected one of {names:?})", problem.id()))
        })?;
        params[i] = *value;
    }
    Ok(params)
}

/// Write one CSV per field into `out_dir` (default: `fields/` beside the checkpoint).
pub fn export_checkpoint(
    path: &Path,
    expected: ExperimentId,
    overrides: &[(String, f64)],
    t: Option<f64>,
    out_dir: Option<&Path>,
) -> Result<ExportOutcome, CliError> {
    let ck = Checkpoint::load(path)?;
    let (problem, surrogate) = ck.restore(expected)?;
    let params = export_params(&problem, overrides)?;
    let warnings = problem.range_warnings(&params);
    let tables = export_fields(&problem, &surrogate, &params, t)?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| path.with_file_name("fields"));
    let mut files = Vec::with_capacity(tables.len());
    for table in &tables {
        let file = dir.join(format!("{}.csv", table.name));
        write_atomic(&file, table.to_csv().as_bytes())?;
        files.push(file);
    }
    Ok(ExportOutcome {
        files,
        params,
        warnings,
    })
}

/// Parse `name=value`.
pub fn parse_param(text: &str) -> Result<(String, f64), CliError> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected name=value, got `{text}`")))?;
    let value: f64 = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("`{v}` is not a number")))?;
    Ok((k.trim().to_string(), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse_and_resolve() {
        assert_eq!(parse_param("alpha=1e-3").unwrap(), ("alpha".into(), 1e-3));
        assert!(parse_param("alpha").is_err());
        assert!(parse_param("alpha=x").is_err());
        let p = Problem::new(ExperimentSettings::preset(ExperimentId::OdeForward)).unwrap();
        let v = export_params(&p, &[("y0".into(), 2.75)]).unwrap();
        assert_eq!(v[1], 2.75);
        assert!(export_params(&p, &[("nu".into(), 1.0)]).is_err());
        let p = Problem::new(ExperimentSettings::preset(ExperimentId::OdeInverse)).unwrap();
        assert_eq!(export_params(&p, &[]).unwrap(), p.settings.inverse.clone().unwrap().truth);
    }
}
