//! Command-line driver: configuration, subcommands and table output.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;
use spectral_lab::LabError;

use config::{Command, Overrides, RunConfig};
use table::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("table error: {0}")]
    Parse(String),
    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    /// Bad input exits with 2; a computation that breaks down counts as a
    /// failed check.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lab(LabError::Numerical { .. } | LabError::Contract(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spectral-lab",
    version,
    about = "Trace asymptotics of products of spectral projections"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated, strictly decreasing ε values.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_star: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Sub {
    /// Moments of the model Hankel operator over an ε sweep.
    GammaMoments,
    /// Traces of the projection product for a Schrödinger system.
    SchrodingerSweep,
    /// S-matrix eigenphases, amplitudes and limiting constants by energy.
    ScatteringTable,
    /// Run the verification suite.
    VerifySuite,
    /// Log-determinant slope against its one-sided bound.
    Logdet,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::GammaMoments => Command::GammaMoments,
            Sub::SchrodingerSweep => Command::SchrodingerSweep,
            Sub::ScatteringTable => Command::ScatteringTable,
            Sub::VerifySuite => Command::VerifySuite,
            Sub::Logdet => Command::Logdet,
        }
    }
}

/// Metadata written alongside every table.
pub fn metadata(cfg: &RunConfig) -> serde_json::Value {
    json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "config": cfg.echo(),
    })
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Parse, run and write; returns the process exit code.
pub fn execute(cli: &Cli) -> Result<u8, CliError> {
    let start = Instant::now();
    let overrides = Overrides {
        seed: cli.seed,
        output_path: cli.out.as_ref().map(|p| p.display().to_string()),
        eps_list: cli.eps.clone(),
        delta: cli.delta,
        lambda_star: cli.lambda_star,
    };
    let cfg = config::parse_config(cli.config.as_deref(), cli.command.into(), &overrides)?;
    let outcome = commands::run(&cfg)?;
    let meta = metadata(&cfg);
    let text = outcome.table.emit(cli.format, &meta);
    match cfg.output_path.as_deref().map(Path::new) {
        Some(path) => {
            write_file(path, &text)?;
            let mut side = meta;
            side["format"] = json!(match cli.format {
                Format::Csv => "csv",
                Format::Json => "json",
            });
            side["rows"] = json!(outcome.table.rows().len());
            side["check_seconds"] = json!(outcome
                .timings
                .iter()
                .map(|(k, v)| (k.clone(), json!(v)))
                .collect::<serde_json::Map<_, _>>());
            side["wall_time_seconds"] = json!(start.elapsed().as_secs_f64());
            let mut body = serde_json::to_string_pretty(&side).expect("metadata serializes");
            body.push('\n');
            write_file(&sidecar_path(path), &body)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                source: e,
            })?;
        }
    }
    for line in &outcome.lines {
        eprintln!("{line}");
    }
    Ok(if outcome.all_pass { 0 } else { 1 })
}

pub fn main_with(cli: Cli) -> ExitCode {
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
