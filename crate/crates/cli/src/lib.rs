//! Batch front end for `wittmod`.
//!
//! A run reads a JSON configuration, executes one analysis and writes a JSON
//! report. Exit codes: 0 when every check passed (or the evidence was found),
//! 1 when a check failed or the evidence was not found, 2 for usage and
//! configuration errors.

pub mod cache;
pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

pub use commands::{execute, Outcome};
pub use config::RunConfig;

pub const SCHEMA: &str = "witt-report/1";
pub const TOOL_VERSION: &str = concat!("wittmod ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Run(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Subcommand)]
pub enum Command {
    /// Check the commutator identity on a box of operators and degrees.
    VerifyRep,
    /// Check the gl_d bracket relations on the module.
    VerifyGl,
    /// Classify every off-diagonal matrix unit.
    Classify,
    /// Span reached from generators under a closure budget.
    Closure,
    /// Windowed cyclicity search.
    Cyclic,
    /// Reducibility certificate for an exterior power.
    CertifyReducible,
    /// Isomorphism test against `options.other`.
    IsoCheck,
    /// Replay the two coefficient-extraction identities.
    ReplayClaims,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyRep => "verify-rep",
            Command::VerifyGl => "verify-gl",
            Command::Classify => "classify",
            Command::Closure => "closure",
            Command::Cyclic => "cyclic",
            Command::CertifyReducible => "certify-reducible",
            Command::IsoCheck => "iso-check",
            Command::ReplayClaims => "replay-claims",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "wittmod", version, about = "Exact computations with F^alpha_b(V) over W_d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// JSON configuration given inline.
    #[arg(long, global = true, value_name = "JSON", conflicts_with = "config")]
    config_json: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Size of the worker pool.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Report cache; defaults to $WITT_CACHE_DIR, then ./.wittcache.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    no_cache: bool,
}

/// A finished run.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: Command,
    pub config: Value,
    pub outcome: Outcome,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.outcome.success {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.deterministic_json();
        v["timing"] = json!({"elapsed_ms": self.elapsed_ms as u64});
        v
    }

    /// Everything except `timing`; identical for identical configs.
    pub fn deterministic_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "tool_version": TOOL_VERSION,
            "command": self.command.name(),
            "config": self.config,
            "outcome": self.outcome.outcome,
            "exit_code": self.exit_code(),
            "result": self.outcome.result,
            "counterexample": self.outcome.counterexample,
        })
    }

    pub fn render(&self) -> String {
        render(&self.to_json())
    }
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Report text with the `timing` field removed, for comparing runs.
pub fn strip_timing(report: &str) -> Result<String, CliError> {
    let mut v: Value = serde_json::from_str(report).map_err(|e| CliError::Io(format!("malformed report: {e}")))?;
    if let Some(m) = v.as_object_mut() {
        m.shift_remove("timing");
    }
    Ok(render(&v))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Config {
        path: String::new(),
        message: format!("invalid JSON: {e}"),
    })?;
    RunConfig::from_json(&v)
}

/// Runs `command` on `cfg` in a pool of `threads` workers.
pub fn run(command: Command, cfg: &RunConfig, threads: Option<usize>) -> Result<Report, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start {threads:?} threads: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| execute(command, cfg))?;
    Ok(Report {
        command,
        config: cfg.to_json(),
        outcome,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

fn cache_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("WITT_CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(".wittcache"))
}

fn exit_code_of(report: &str) -> i32 {
    serde_json::from_str::<Value>(report)
        .ok()
        .and_then(|v| v["exit_code"].as_i64())
        .map_or(1, |c| c as i32)
}

fn run_cli(cli: Cli) -> Result<(String, i32), CliError> {
    let cfg = match (&cli.config, &cli.config_json) {
        (Some(path), _) => load_config(path)?,
        (None, Some(text)) => parse_config(text)?,
        (None, None) => return Err(CliError::Usage("a configuration is required: --config FILE or --config-json JSON".into())),
    };
    let cache = (!cli.no_cache).then(|| cache::Cache::new(cache_dir(cli.cache_dir.clone())));
    let key = cache::key(cli.command, &cfg);
    if let Some(text) = cache.as_ref().and_then(|c| c.get(&key)) {
        let code = exit_code_of(&text);
        return Ok((text, code));
    }
    let report = run(cli.command, &cfg, cli.threads)?;
    let text = report.render();
    if let Some(c) = &cache {
        // a cache that cannot be written only costs a recomputation
        let _ = c.put(&key, &text);
    }
    Ok((text, report.exit_code()))
}

/// Entry point shared by the binary and the tests. `argv[0]` is the program
/// name.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out = cli.out.clone();
    match run_cli(cli) {
        Ok((text, code)) => {
            let written = match &out {
                Some(path) => fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("wittmod: {e}");
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("wittmod: {e}");
            2
        }
    }
}
