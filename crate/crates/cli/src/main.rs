//! `rmbec`: command-line driver for Reed–Muller erasure-channel analysis.
//!
//! Exit status: 0 success, 1 usage error, 2 failed check, 3 resource cap.

mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::{RunArgs, RunConfig};
use output::OutputDir;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
    Cap(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Check(m) | CliError::Cap(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn status(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Check(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

impl From<rmbec::Error> for CliError {
    fn from(e: rmbec::Error) -> Self {
        use rmbec::Error as E;
        match e {
            E::Size { .. } => CliError::Cap(e.to_string()),
            E::Argument(_) | E::Parse(_) => CliError::Usage(e.to_string()),
            E::InsufficientData(_) | E::NotMonotone(_) => CliError::Check(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rmbec", version, about = "Reed-Muller codes on the binary erasure channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Verb {
    /// Code specs (`rm:n,r` or generator file); same as `--code`.
    #[arg(value_name = "SPEC")]
    specs: Vec<String>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print N, K, minimum distance and rate.
    CodeInfo(Verb),
    /// Compute EXIT curves (exact with --exact, else Monte Carlo).
    Exit(Verb),
    /// Run the exact verification suite (N <= 16).
    Verify(Verb),
    /// Affine-group symmetry checks.
    Symmetry {
        #[command(subcommand)]
        action: SymmetryAction,
    },
    /// Locate the threshold and transition width.
    Threshold(Verb),
    /// Thresholds for several codes plus a combined plot.
    Sweep(Verb),
}

#[derive(Debug, Subcommand)]
enum SymmetryAction {
    /// Check 2-transitivity witnesses and failure-set symmetry.
    Verify(Verb),
}

fn run(command: Command) -> Result<Outcome, CliError> {
    let (name, verb) = match &command {
        Command::CodeInfo(v) => ("code-info", v),
        Command::Exit(v) => ("exit", v),
        Command::Verify(v) => ("verify", v),
        Command::Symmetry { action: SymmetryAction::Verify(v) } => ("symmetry verify", v),
        Command::Threshold(v) => ("threshold", v),
        Command::Sweep(v) => ("sweep", v),
    };
    let cfg = RunConfig::resolve(&verb.run, &verb.specs)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        if let Command::CodeInfo(_) = command {
            return commands::code_info(&cfg);
        }
        let start = Instant::now();
        let mut out = OutputDir::create(&cfg.out)?;
        let outcome = match command {
            Command::Exit(_) => commands::exit(&cfg, &mut out),
            Command::Verify(_) => commands::verify(&cfg, &mut out),
            Command::Symmetry { .. } => commands::symmetry(&cfg, &mut out),
            Command::Threshold(_) => commands::threshold(&cfg, &mut out),
            Command::Sweep(_) => commands::sweep(&cfg, &mut out),
            Command::CodeInfo(_) => unreachable!("handled above"),
        }?;
        out.finish(name, &cfg, start.elapsed())?;
        Ok(outcome)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}
