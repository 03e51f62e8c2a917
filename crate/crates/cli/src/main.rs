//! `lzs`: pattern sweeps, transforms, dark-state reports and single-passage
//! checks for Landau-Zener-Stuckelberg interference in a driven qubit
//! coupled to a ladder of two-level systems.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numeric failure during a
//! run, 3 file I/O failure.

mod config;
mod error;
mod export;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::Task;

#[derive(Parser)]
#[command(name = "lzs", version, about = "Landau-Zener-Stuckelberg interference toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured engines over the pulse grid and export the
    /// pattern, its transform, ridges, and (for two TLSs) predicted arcs
    Sweep(Common),
    /// Transform an existing pattern file and extract its ridges
    Ft(Common),
    /// Report the dark-state spectrum over a detuning sweep
    Darkstate(Common),
    /// Tabulate single-passage transition probability against the closed form
    Lzcheck(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads, overriding the config; 0 means one per hardware thread
    #[arg(long)]
    workers: Option<usize>,
    /// Also write an 8-bit graymap beside each pattern
    #[arg(long)]
    image: bool,
}

impl Cmd {
    fn split(self) -> (Task, Common) {
        match self {
            Cmd::Sweep(c) => (Task::Sweep, c),
            Cmd::Ft(c) => (Task::Ft, c),
            Cmd::Darkstate(c) => (Task::Darkstate, c),
            Cmd::Lzcheck(c) => (Task::Lzcheck, c),
        }
    }
}

fn drive(task: Task, args: Common) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    run::execute(task, &cfg, &args.out, args.image)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version leave through this path with success
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (task, args) = cli.cmd.split();
    match drive(task, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lzs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
