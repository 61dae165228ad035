use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use splitdg::driver::{self, RunConfig, RunStatus};
use splitdg::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_CRASH: u8 = 3;

/// Split-form DGSEM solver for the compressible Euler equations.
#[derive(Debug, Parser)]
#[command(name = "splitdg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one case and write the diagnostics time series.
    Run(Io),
    /// Manufactured-solution h-convergence over `grids`.
    Converge(Io),
    /// Completion matrix over `degrees` x `grids` x `schemes`.
    Sweep(Io),
}

#[derive(Debug, clap::Args)]
struct Io {
    /// key = value configuration file.
    config: PathBuf,
    /// CSV destination; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::parse(&text)
}

fn emit(csv: &str, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(path) => fs::write(path, csv)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| Error::Config(format!("cannot write output: {e}"))),
    }
}

fn execute(command: &Command) -> Result<u8, Error> {
    match command {
        Command::Run(io) => {
            let cfg = load(&io.config)?;
            let out = driver::run_simulation(&cfg)?;
            emit(&driver::records_to_csv(&out), io.output.as_deref())?;
            match &out.status {
                RunStatus::Completed => Ok(0),
                RunStatus::Crashed { time, reason } => {
                    eprintln!("solver crashed at t = {time}: {reason}");
                    Ok(EXIT_CRASH)
                }
            }
        }
        Command::Converge(io) => {
            let cfg = load(&io.config)?;
            let rows = driver::run_convergence(&cfg)?;
            emit(&driver::convergence_to_csv(&rows), io.output.as_deref())?;
            Ok(0)
        }
        Command::Sweep(io) => {
            let cfg = load(&io.config)?;
            let entries = driver::run_sweep(&cfg)?;
            emit(&driver::sweep_to_csv(&entries), io.output.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CRASH)
        }
    }
}
