//! Command-line orchestration: seeded, reproducible experiment commands.
//!
//! Five subcommands cover the artifacts: `surface` (exact signal surface
//! CSV), `sweep` (per-cell two-phase probe runs plus the signal/accuracy
//! correlation), `table1` (extractor comparison at full left corruption
//! decoupling), `gansim` (discrete adversarial scenario checks and
//! balancing traces), and `micalc` (direct information measures over a
//! serialized joint distribution).
//!
//! Every run is fully specified by its config plus seed; rerunning any
//! command with the same inputs produces byte-identical outputs. Exit codes:
//! 0 success, 1 config or runtime error, 2 when an identity check or a
//! sweep/table cell failed.

mod commands;
mod config;
mod experiments;
mod stats;

pub use commands::{
    cmd_gansim, cmd_micalc, cmd_probe_sweep, cmd_signal_surface, cmd_table1, MicalcOp,
};
pub use config::ConfigFile;
pub use experiments::{
    run_sweep, run_table1, CellResult, CellStatus, DataSource, DataSpec, SweepReport, SweepSpec,
    Table1Report, Table1Row, Table1Spec, TrainSpec,
};
pub use stats::pearson_r;

use std::path::Path;

use thiserror::Error;

use crate::competition::TaskError;
use crate::data::DataError;
use crate::gansim::SimError;
use crate::info::InfoError;
use crate::nn::TrainError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error("statistics error: {0}")]
    Stats(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Exit status for a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    /// The command ran to completion but a cell or identity check failed.
    ChecksFailed,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::ChecksFailed => 2,
        }
    }
}

/// Write a file through a temp sibling and rename, so concurrent jobs never
/// expose partial output.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp-write");
    std::fs::write(&tmp, contents).map_err(|source| CliError::Io {
        context: format!("writing {}", tmp.display()),
        source,
    })?;
    std::fs::rename(&tmp, path).map_err(|source| CliError::Io {
        context: format!("renaming into {}", path.display()),
        source,
    })?;
    Ok(())
}
