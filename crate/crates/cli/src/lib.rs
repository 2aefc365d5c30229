//! Batch front end for the dcq engine: command-line parsing, config merging and
//! dispatch. Exit status 0 on success, 1 on validation errors, 2 on numeric
//! failures and 3 when a corpus run fails its checks.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser};

pub use config::{Command, ExperimentConfig, Format};
pub use error::CliError;
use output::Sink;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DCQ_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "dcq",
    version,
    about = "Denjoy-Carleman weights, lacunary series and intersection experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// JSON experiment config; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, or `csv`/`json` to choose the format. Standard output when unset.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<String>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Worker threads for corpus-run.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub knobs: Overrides,
}

/// Per-key overrides of the config; each flag is its key with `-` for `_`.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub seq: Option<String>,
    #[arg(long, global = true)]
    pub j_lo: Option<u64>,
    #[arg(long, global = true)]
    pub j_hi: Option<u64>,
    #[arg(long, global = true)]
    pub r: Option<String>,
    #[arg(long, global = true)]
    pub jmax: Option<u64>,
    #[arg(long, global = true)]
    pub start: Option<u32>,
    #[arg(long, global = true)]
    pub scale: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, global = true)]
    pub deriv: Option<u32>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true)]
    pub orders: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub rel_eps: Option<f64>,
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub params: Option<String>,
    #[arg(long, global = true)]
    pub curve: Option<PathBuf>,
    #[arg(long, global = true)]
    pub disk: Option<PathBuf>,
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
}

macro_rules! apply {
    ($cfg:ident, $o:ident, $($field:ident),*) => {
        $(if let Some(v) = $o.$field { $cfg.$field = v; })*
    };
}

macro_rules! apply_opt {
    ($cfg:ident, $o:ident, $($field:ident),*) => {
        $(if $o.$field.is_some() { $cfg.$field = $o.$field; })*
    };
}

/// Merges the config file, the flags and the environment.
///
/// Precedence: flags, then the config file, then defaults; the output directory
/// falls back to `env_out` last.
pub fn resolve(cli: Cli, env_out: Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::validation("config", format!("cannot read {}: {e}", path.display()))
            })?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    match (cli.command, cfg.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::validation(
                "command",
                format!(
                    "config says '{}' but the command line says '{}'",
                    b.name(),
                    a.name()
                ),
            ))
        }
        (Some(a), _) => cfg.command = Some(a),
        _ => {}
    }
    let o = cli.knobs;
    apply!(
        cfg, o, seq, j_lo, j_hi, r, jmax, start, scale, x, deriv, eps, n, orders, lo, hi, grid,
        rel_eps
    );
    apply_opt!(cfg, o, spec, params, curve, disk, corpus);
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    match cli.out.as_deref() {
        Some("csv") => cfg.format = Format::Csv,
        Some("json") => cfg.format = Format::Json,
        Some(dir) => cfg.out = Some(PathBuf::from(dir)),
        None => {}
    }
    if cfg.out.is_none() {
        cfg.out = env_out;
    }
    if cfg.command.is_none() {
        return Err(CliError::validation("command", "no command given"));
    }
    Ok(cfg)
}

/// Runs a resolved config, writing to its output directory or to `stdout`.
pub fn execute(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut sink = match &cfg.out {
        Some(dir) => Sink::Dir(dir.clone()),
        None => Sink::Stdout(stdout),
    };
    run::run(cfg, &mut sink)
}
