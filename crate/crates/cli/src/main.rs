use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use edgeworth_lab::{run, RunOptions, EXIT_ERROR};

#[derive(Debug, Parser)]
#[command(name = "edgeworth-lab", version, about = "Run Edgeworth expansion experiments from a JSON config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the tasks of a config file and write the reports.
    Run {
        config: PathBuf,
        /// Worker threads (0 = all cores); overrides the config.
        #[arg(long, env = "EDGEWORTH_LAB_WORKERS")]
        workers: Option<usize>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report assumption failures without a non-zero exit code.
        #[arg(long)]
        warn_only: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, workers, out, warn_only } = Cli::parse().command;
    let opts = RunOptions { workers, out_dir: out, warn_only };
    match run(&config, &opts) {
        Ok(outcome) => {
            for r in outcome.report.results.iter().filter(|r| r.error.is_some()) {
                eprintln!("error: {} (n = {}): {}", r.task, r.n, r.error.as_deref().unwrap_or(""));
            }
            if outcome.report.assumption_failures > 0 {
                eprintln!("warning: {} assumption check(s) failed", outcome.report.assumption_failures);
            }
            println!("{}", outcome.csv_path.display());
            println!("{}", outcome.json_path.display());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
