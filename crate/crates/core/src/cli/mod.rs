//! Config-driven front end: `render`, `verify` and `report`.

mod config;
mod output;
mod render;
mod report;
mod verify;

use std::path::PathBuf;

pub use config::{
    BlockSpec, LpSpec, OperatorSpec, Outputs, PValue, PartitionSpec, RasterSource, RasterSpec, ReportSpec, Resolved,
    RunConfig, ScheduleSpec, VerifySpec,
};
pub use output::{parse_csv, pgm_string, write_csv_string};
pub use render::cmd_render;
pub use report::cmd_report;
pub use verify::{cmd_verify, Verdict, VerifyOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Compute(#[from] crate::error::Error),
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn ensure_dir(dir: &std::path::Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}
