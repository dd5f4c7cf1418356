use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fmrl_cli::output::output_root;
use fmrl_cli::{CliError, Command};

/// Lifelong meta-learning experiments. Outputs go under $FMRL_OUTPUT_ROOT.
#[derive(Parser)]
#[command(name = "fmrl", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the lifelong experiment grid of a config.
    Run { config: PathBuf },
    /// Align run summaries and print TAR deltas as CSV.
    Compare {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
    },
    /// Estimate the quadratic-growth factor of logistic sums across m.
    Qg { config: PathBuf },
    /// Run agents against the lower-bound adversary.
    Adversary { config: PathBuf },
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let (command, config) = match cli.command {
        Cmd::Compare { summaries } => {
            let (table, warning) = fmrl_cli::compare(&summaries)?;
            if let Some(w) = warning {
                eprintln!("{w}");
            }
            print!("{table}");
            return Ok(());
        }
        Cmd::Run { config } => (Command::Run, config),
        Cmd::Qg { config } => (Command::Qg, config),
        Cmd::Adversary { config } => (Command::Adversary, config),
    };
    let outcome = fmrl_cli::execute(command, &config, &output_root())
        .with_context(|| config.display().to_string())?;
    for line in &outcome.lines {
        println!("{line}");
    }
    println!("wrote {}", outcome.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(2, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
