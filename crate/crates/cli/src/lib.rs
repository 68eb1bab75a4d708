//! Command-line front end: TOML configs in, JSON reports out.

pub mod commands;
pub mod config;
pub mod error;
pub mod json;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use pnrtomo::{Execution, RootPolicy};

use crate::config::{ChannelTomoConfig, CurvesConfig, Shots, StateTomoConfig};
use crate::error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "pnrtomo", version, about = "Gaussian state and channel tomography from photon-number measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the state plan on a configured state and invert it.
    StateTomo(RunArgs),
    /// Simulate probe states through a configured channel and recover (A, B).
    ChannelTomo(ChannelArgs),
    /// Tabulate photon-number mean and variance along a sweep.
    VarianceCurves(CurveArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Report path; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Shots per setting, or `exact`. Overrides the config.
    #[arg(long, value_name = "M|exact")]
    pub shots: Option<Shots>,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Overrides the config's root policy.
    #[arg(long, value_name = "POLICY", value_parser = parse_policy)]
    pub root_policy: Option<RootPolicy>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Report path; the CSV table goes next to it with a `.csv` extension.
    /// Without it the report goes to stdout and no CSV is written.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn parse_policy(s: &str) -> Result<RootPolicy, String> {
    s.parse().map_err(|e: pnrtomo::Error| e.to_string())
}

fn execution() -> Execution {
    Execution::default()
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn serialize<T: serde::Serialize>(value: &T) -> CliResult<String> {
    json::to_string(value).map_err(|e| CliError::Invariant(format!("report serialisation: {e}")))
}

fn csv_path(out: &Path) -> CliResult<PathBuf> {
    if out.extension().is_some_and(|e| e == "csv") {
        return Err(CliError::Config(
            "--out must not end in .csv; the table is written next to the report".into(),
        ));
    }
    Ok(out.with_extension("csv"))
}

pub fn dispatch(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::StateTomo(a) => {
            let mut cfg: StateTomoConfig = config::load(&a.config)?;
            commands::apply_overrides(&mut cfg.seed, &mut cfg.shots, a.seed, a.shots);
            let report = commands::state_tomo(&cfg, execution())?;
            emit(a.out.as_deref(), &serialize(&report)?, stdout)
        }
        Command::ChannelTomo(a) => {
            let mut cfg: ChannelTomoConfig = config::load(&a.run.config)?;
            commands::apply_overrides(&mut cfg.seed, &mut cfg.shots, a.run.seed, a.run.shots);
            let policy = a.root_policy.unwrap_or(cfg.root_policy);
            let report = commands::channel_tomo(&cfg, policy, execution())?;
            emit(a.run.out.as_deref(), &serialize(&report)?, stdout)
        }
        Command::VarianceCurves(a) => {
            let cfg: CurvesConfig = config::load(&a.config)?;
            let csv = a.out.as_deref().map(csv_path).transpose()?;
            let (mut report, table) = commands::curves(&cfg)?;
            if let Some(csv) = &csv {
                report.csv = csv.file_name().map(|f| f.to_string_lossy().into_owned());
                write_file(csv, &table.to_csv())?;
            }
            emit(a.out.as_deref(), &serialize(&report)?, stdout)
        }
    }
}

/// Runs the program on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_CONFIG
                }
            };
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "pnrtomo: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests;
