//! Configuration files, run orchestration and CSV output on top of
//! [`marle_core`].

pub mod config;
mod error;
pub mod presets;
pub mod runs;
pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
pub use table::{Table, Value};

/// The four runs selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Mcurves,
    Equilibrate,
    Relax,
    Transport,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Table> {
    match command {
        Command::Mcurves => runs::run_mcurves(cfg),
        Command::Equilibrate => runs::run_equilibrate(cfg),
        Command::Relax => runs::run_relax(cfg),
        Command::Transport => runs::run_transport(cfg),
    }
}

/// Reads the configuration at `config`, runs `command` and writes the CSV to
/// `out`, the configured path, or standard output, in that order of priority.
pub fn execute(command: Command, config: &Path, out: Option<&Path>) -> Result<()> {
    let cfg = parse_config(&std::fs::read_to_string(config)?)?;
    let table = run(command, &cfg)?;
    let destination = out.map(Path::to_path_buf).or_else(|| cfg.output.path.as_ref().map(Into::into));
    match destination {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write_csv(&mut w, cfg.output.precision)?;
            w.flush()?;
        }
        None => table.write_csv(io::stdout().lock(), cfg.output.precision)?,
    }
    Ok(())
}
