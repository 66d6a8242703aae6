//! `kwg` batch front-end: configuration, subcommand orchestration and artifact output.
//!
//! Exit statuses: 0 ok, 1 io, 2 configuration, 3 physics abort, 4 property failure.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

use crate::config::{parse_config_with_env, Command, ConfigError, RunConfig};
use crate::output::{write_artifacts, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;
pub const EXIT_PROPERTY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kwg", version, about = "Navier-Stokes-Korteweg laboratory: simulations, sweeps, diagnostics")]
pub struct Cli {
    /// Subcommand; overrides `command` in the configuration.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML configuration; absent means all defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// ChaCha20 seed for random initial data; overrides `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweep members and block loops.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Machine-readable failure record printed to stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub exit_code: i32,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl ErrorRecord {
    fn new(exit_code: i32, kind: &'static str, message: String, line: Option<usize>) -> Self {
        Self { status: "error", exit_code, kind, message, line }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error record serializes")
    }

    fn config(e: ConfigError) -> Self {
        Self::new(EXIT_CONFIG, "config", e.message, e.line)
    }

    fn core(e: &kwg_core::KwgError) -> Self {
        use kwg_core::KwgError::*;
        let (code, kind) = if e.is_physics_abort() {
            (EXIT_PHYSICS, "physics-abort")
        } else {
            match e {
                InvalidParameter(_) | GridTooCoarse(_) | GridMismatch(_) | Domain(_) => (EXIT_CONFIG, "config"),
                Io(_) | Format(_) => (EXIT_IO, "io"),
                _ => (EXIT_IO, "module-failure"),
            }
        };
        Self::new(code, kind, e.to_string(), None)
    }
}

/// Result of a CLI invocation: exit status, stdout text, and an error record when nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub exit_code: i32,
    pub stdout: String,
    pub error: Option<ErrorRecord>,
}

/// Effective configuration: file text, then `KWG_` variables, then flags.
pub fn resolve_config<I>(cli: &Cli, env: I) -> Result<RunConfig, ErrorRecord>
where
    I: IntoIterator<Item = (String, String)>,
{
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| ErrorRecord::new(EXIT_CONFIG, "config", format!("{}: {e}", p.display()), None))?,
        None => String::new(),
    };
    let mut cfg = parse_config_with_env(&text, env).map_err(ErrorRecord::config)?;
    if let Some(c) = cli.command {
        cfg.command = c;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

pub fn output_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out.clone().or_else(|| cfg.out.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("kwg-out"))
}

/// Runs `cfg` and writes its artifacts and manifest into `dir`.
pub fn run_config(cfg: &RunConfig, dir: &Path) -> Invocation {
    let outcome = match commands::execute(cfg) {
        Ok(o) => o,
        Err(e) => return Invocation { exit_code: ErrorRecord::core(&e).exit_code, stdout: String::new(), error: Some(ErrorRecord::core(&e)) },
    };
    let normalized = cfg.normalized();
    let mut artifacts = outcome.artifacts;
    artifacts.add_text("config.normalized.toml", normalized.clone());
    let status = if outcome.failure.is_some() { "property-failure" } else { "ok" };
    let manifest = Manifest::of(&artifacts, cfg.command.name(), status, cfg.seed, &normalized);
    if let Err(e) = write_artifacts(dir, &artifacts, &manifest) {
        let rec = ErrorRecord::new(EXIT_IO, "io", e.to_string(), None);
        return Invocation { exit_code: EXIT_IO, stdout: outcome.report, error: Some(rec) };
    }
    match outcome.failure {
        None => Invocation { exit_code: EXIT_OK, stdout: outcome.report, error: None },
        Some(msg) => Invocation {
            exit_code: EXIT_PROPERTY,
            stdout: outcome.report,
            error: Some(ErrorRecord::new(EXIT_PROPERTY, "property-failure", msg, None)),
        },
    }
}

pub fn invoke<I>(cli: &Cli, env: I) -> Invocation
where
    I: IntoIterator<Item = (String, String)>,
{
    match resolve_config(cli, env) {
        Ok(cfg) => run_config(&cfg, &output_dir(cli, &cfg)),
        Err(rec) => Invocation { exit_code: rec.exit_code, stdout: String::new(), error: Some(rec) },
    }
}
