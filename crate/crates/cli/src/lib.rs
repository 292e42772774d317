//! Library half of the `k3fm` command-line tool, split out so integration
//! tests can drive commands without spawning a process.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{ArgAction, Parser};

pub use commands::{run, AppError, Options, Verb};

/// Exit code when every verdict passes.
pub const EXIT_PASS: i32 = 0;
/// Exit code when the computation succeeded but some verdict failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for bad input or an arithmetic error.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "k3fm",
    version,
    about = "Exact Chern-character arithmetic for spectral sheaves on K3 fibrations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// TOML config, or a JSON report produced by `--json` to replay.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Print a JSON report instead of text tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// Reject unknown config keys. Pass `--strict=false` to downgrade them to warnings.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set, num_args = 0..=1,
          default_missing_value = "true")]
    pub strict: bool,
    /// Fail a scan that would report more than this many entries.
    #[arg(long, global = true)]
    pub max_results: Option<usize>,
}

/// Runs a parsed command line, returning the text to print and the exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32), AppError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| AppError::Invalid("--config <FILE> is required".into()))?;
    let (config, ignored) = config::load(path)?.into_config(cli.strict)?;
    let mut report = run(
        cli.verb,
        &config,
        Options {
            max_results: cli.max_results,
        },
    )?;
    report
        .warnings
        .splice(0..0, ignored.iter().map(|k| format!("ignored unknown key `{k}`")));
    let code = if report.pass() { EXIT_PASS } else { EXIT_FAIL };
    let text = if cli.json {
        report.render_json()
    } else {
        report.render_text()
    };
    Ok((text, code))
}
