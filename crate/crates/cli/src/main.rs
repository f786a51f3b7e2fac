use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgqt_cli::{cmd_compare, cmd_list_experiments, cmd_run, configure_workers, CliError};

#[derive(Parser)]
#[command(
    name = "sgqt",
    version,
    about = "Self-guided quantum tomography simulation lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Write results here instead of the config's output_dir.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare the summaries of two run directories.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
    /// List the experiment kinds.
    ListExperiments,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, output } => {
            configure_workers()?;
            let dir = cmd_run(&config, output.as_deref())?;
            println!("results written to {}", dir.display());
        }
        Command::Compare { dir_a, dir_b } => print!("{}", cmd_compare(&dir_a, &dir_b)?),
        Command::ListExperiments => print!("{}", cmd_list_experiments()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
