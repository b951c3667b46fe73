use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

mod args;
mod commands;
mod config;
mod output;

use args::{Cli, Command, OutputArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] magstep::Error),
    #[error("{failed} of {total} criteria failed")]
    Verify { failed: usize, total: usize },
}

impl CliError {
    /// 1 for bad input, 2 for failures of the computation itself.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) if e.is_validation() => 1,
            _ => 2,
        }
    }
}

fn emit(text: &str, path: Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(&path, text).map_err(|source| CliError::Io { path, source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn destination(out: &OutputArgs, command: &str) -> Result<Option<PathBuf>, CliError> {
    if let Some(p) = &out.out {
        return Ok(Some(p.clone()));
    }
    let Some(dir) = &out.out_dir else {
        return Ok(None);
    };
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    Ok(Some(
        dir.join(format!("{command}.{}", out.format.extension())),
    ))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let (table, out) = match &cli.command {
        Command::BandCurve(a) => (commands::band_curve_cmd(a)?, &a.output),
        Command::Minimize(a) => (commands::minimize_cmd(a)?, &a.output),
        Command::Degennes(a) => (commands::degennes_cmd(a)?, &a.output),
        Command::Moments(a) => (commands::moments_cmd(a)?, &a.output),
        Command::WeightedSweep(a) => (commands::weighted_cmd(a)?, &a.output),
        Command::CriticalFields(a) => (commands::fields_cmd(a)?, &a.output),
        Command::Verify(a) => {
            let (results, text) = commands::verify_cmd(a)?;
            emit(&text, None)?;
            if let Some(p) = &a.out {
                emit(&text, Some(p.clone()))?;
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(CliError::Verify {
                    failed,
                    total: results.len(),
                });
            }
            return Ok(());
        }
    };
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    emit(&table.render(out.format), destination(out, name)?)
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let args = match config::expand(raw, &Cli::command()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::command()
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
