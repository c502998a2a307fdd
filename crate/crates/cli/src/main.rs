use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pullpush::diagnostics::{ProbeConfig, DEFAULT_SAFETY};
use pullpush::problems::ExperimentId;
use pullpush_cli::commands::{export_checkpoint, parse_param};
use pullpush_cli::{diagnose_checkpoint, train, verify_solvers, CliError, ExperimentConfig, VerifyOptions};

#[derive(Parser)]
#[command(name = "pullpush", about = "Solver-consistency training of neural PDE surrogates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the experiment described by a TOML config.
    Train {
        config: PathBuf,
        /// Print the loss every this many epochs (0 disables).
        #[arg(long, default_value_t = 100)]
        log_every: usize,
    },
    /// Run the solver oracle suite.
    VerifySolvers {
        /// Time step checked against the Burgers CFL limits.
        #[arg(long)]
        cfl_dt: Option<f64>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Fixed-point and rollout certificates for a checkpoint.
    Diagnose {
        checkpoint: PathBuf,
        experiment: String,
        #[arg(long, default_value_t = DEFAULT_SAFETY)]
        safety: f64,
        #[arg(long, default_value_t = 0)]
        probe_seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Write prediction, reference and pointwise error as CSV.
    ExportFields {
        checkpoint: PathBuf,
        experiment: String,
        /// Parameter override, `name=value`; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Time slice (spatial problems) or single time (ODE systems).
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn experiment(name: &str) -> Result<ExperimentId, CliError> {
    name.parse().map_err(|e: pullpush::problems::ProblemError| CliError::Config(e.to_string()))
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Train { config, log_every } => {
            let cfg = ExperimentConfig::load(&config)?;
            let mut observer = |r: &pullpush::training::EpochRecord| {
                if log_every > 0 && r.epoch % log_every == 0 {
                    eprintln!("epoch {:>7}  loss {:.6e}  lr {:.3e}", r.epoch, r.loss_total, r.lr);
                }
            };
            let out = train(&cfg, &mut observer)?;
            for (k, v) in &out.record.final_metrics {
                println!("{k} = {v:.6e}");
            }
            println!("artifacts in {}", out.dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifySolvers { cfl_dt, json } => {
            let mut options = VerifyOptions::default();
            if let Some(dt) = cfl_dt {
                options.cfl_dt = dt;
            }
            let report = verify_solvers(&options)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.table());
            }
            Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Diagnose {
            checkpoint,
            experiment: name,
            safety,
            probe_seed,
            json,
        } => {
            let probes = ProbeConfig {
                seed: probe_seed,
                ..ProbeConfig::default()
            };
            let d = diagnose_checkpoint(&checkpoint, experiment(&name)?, &probes, safety)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&d).expect("report serializes"));
            } else {
                print!("{}", d.table());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportFields {
            checkpoint,
            experiment: name,
            params,
            t,
            out,
        } => {
            let overrides = params.iter().map(|p| parse_param(p)).collect::<Result<Vec<_>, _>>()?;
            let res = export_checkpoint(&checkpoint, experiment(&name)?, &overrides, t, out.as_deref())?;
            for w in &res.warnings {
                eprintln!("warning: {w}");
            }
            for f in &res.files {
                println!("{}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
