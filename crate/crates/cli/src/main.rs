//! `cocycle-lab`: run recurrence experiments from a JSON config.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cocycle_lab_core::runner::{run, Command, RunOptions};

#[derive(Parser)]
#[command(
    name = "cocycle-lab",
    version,
    about = "Monte Carlo recurrence experiments for cocycles"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Near-return fractions of one cocycle.
    Estimate(Common),
    /// Drift scan over a grid of c.
    Scan(Common),
    /// A theorem check suite.
    Suite {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// An example from the gallery.
    Gallery {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Local-limit monitors and kernel bounds.
    Monitor(Common),
    /// The invariant battery at reduced scale.
    Selftest(Common),
    /// Check a config without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "COCYCLE_LAB_WORKERS")]
    workers: Option<usize>,
    /// dotted.key=value, applied in order.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn options(self) -> RunOptions {
        RunOptions {
            config: self.config,
            seed: self.seed,
            out: self.out,
            workers: self.workers,
            overrides: self.overrides,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Estimate(c) => (Command::Estimate, c),
        Cmd::Scan(c) => (Command::Scan, c),
        Cmd::Suite { name, common } => (Command::Suite(name), common),
        Cmd::Gallery { name, common } => (Command::Gallery(name), common),
        Cmd::Monitor(c) => (Command::Monitor, c),
        Cmd::Selftest(c) => (Command::Selftest, c),
        Cmd::Validate(c) => (Command::Validate, c),
    };
    match run(&command, &common.options()) {
        Ok(outcome) => {
            if command == Command::Validate {
                let errors = outcome.report["errors"]
                    .as_array()
                    .cloned()
                    .unwrap_or_default();
                let warnings = outcome.report["warnings"]
                    .as_array()
                    .cloned()
                    .unwrap_or_default();
                for e in errors {
                    eprintln!("error: {}", e.as_str().unwrap_or_default());
                }
                for w in warnings {
                    eprintln!("warning: {}", w.as_str().unwrap_or_default());
                }
            }
            println!("{}", outcome.summary);
            if let Some(dir) = outcome.out_dir {
                println!("artifacts in {}", dir.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
