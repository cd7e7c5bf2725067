//! `admittance` command-line tool.
//!
//! Exit codes: 0 ok or stable, 1 usage or configuration error, 2 unstable,
//! 3 marginal.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;

#[derive(Parser)]
#[command(
    name = "admittance",
    version,
    about = "Stability analysis of admittance control with asymmetric stiffness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat JSON configuration; the reference parameters at d = 0.34 when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replace one config key, e.g. `--override d=0.3`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the stability report; the exit code carries the verdict.
    Analyze(Common),
    /// Trace eigenvalue branches over a damper range.
    Rootlocus(Common),
    /// Integrate the step-force scenario and write its energy terms.
    Simulate(Common),
    /// Minimum-damper maps over the (ks, ka) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Compare closed-form eigenvalues with the quartic oracle on random draws.
    Verify(Common),
    /// Sample the stiffness force field and its two parts.
    Forcefield(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Rootlocus(_) => "rootlocus",
            Command::Simulate(_) => "simulate",
            Command::Sweep { .. } => "sweep",
            Command::Verify(_) => "verify",
            Command::Forcefield(_) => "forcefield",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Analyze(c)
            | Command::Rootlocus(c)
            | Command::Simulate(c)
            | Command::Verify(c)
            | Command::Forcefield(c) => c,
            Command::Sweep { common, .. } => common,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let common = cli.command.common();
    let loaded = match config::load(common.config.as_deref(), &common.overrides) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let ctx = Context {
        loaded,
        out: common.out.clone(),
        command: cli.command.name(),
    };
    let result = match &cli.command {
        Command::Analyze(_) => commands::analyze(&ctx),
        Command::Rootlocus(_) => commands::rootlocus(&ctx),
        Command::Simulate(_) => commands::simulate_cmd(&ctx),
        Command::Sweep { workers, .. } => commands::sweep(&ctx, *workers),
        Command::Verify(_) => commands::verify(&ctx),
        Command::Forcefield(_) => commands::forcefield(&ctx),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
