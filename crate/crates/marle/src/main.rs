use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use marle::{execute, Command};

#[derive(Parser)]
#[command(name = "marle", version, about = "Relativistic BGK relaxation runs with CSV output")]
struct Cli {
    #[command(subcommand)]
    command: Run,
}

#[derive(Subcommand)]
enum Run {
    /// Normalisers M, M̃ and their ratio over a γ scan.
    Mcurves(Paths),
    /// Equilibrium recovered from an initial distribution, with grid refinement.
    Equilibrate(Paths),
    /// Homogeneous relaxation time series.
    Relax(Paths),
    /// Periodic slab transport time series.
    Transport(Paths),
}

#[derive(Args)]
struct Paths {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination, overriding the configured path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors exit with 1; status 2 is reserved for numerical failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let (command, paths) = match cli.command {
        Run::Mcurves(p) => (Command::Mcurves, p),
        Run::Equilibrate(p) => (Command::Equilibrate, p),
        Run::Relax(p) => (Command::Relax, p),
        Run::Transport(p) => (Command::Transport, p),
    };
    match execute(command, &paths.config, paths.out.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
