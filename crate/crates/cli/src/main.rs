//! `qwalk`: command-line front end for the walk mixing experiments.
//!
//! Exit status: 0 on success, 2 when an asserted bound fails (the report is
//! still written), 1 on usage or I/O errors.

mod commands;
mod config;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use config::{resolve, Cli, WORKERS_ENV};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Runs the job; `Ok(false)` means a bound was violated.
fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let config = resolve(&cli.command, std::env::var(WORKERS_ENV).ok())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()?;
    let start = Instant::now();
    let artifact = pool.install(|| commands::run(&config))?;
    let written = output::write_artifact(&config, &artifact)?;
    for line in &artifact.summary {
        eprintln!("{line}");
    }
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    eprintln!("wall clock {:.2}s", start.elapsed().as_secs_f64());
    if artifact.violation {
        eprintln!("bound violated");
    }
    Ok(!artifact.violation)
}
