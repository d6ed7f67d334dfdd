//! Parameter sweeps behind the `jchsim` command line.

pub mod commands;
pub mod config;
pub mod plot;
pub mod table;

use std::path::Path;

pub use commands::{run, Report};
pub use config::{Cli, Command, Options, RunConfig};
pub use table::{write_csv, Cell, SeriesTable};

use crate::error::{Error, Result};

/// Writes the report table to `--out` (or returns it for stdout) and the
/// plot script alongside when requested.
pub fn emit(cfg: &RunConfig, report: &Report) -> Result<Option<String>> {
    let Some(out) = &cfg.options.out else {
        return Ok(Some(report.table.to_csv()));
    };
    write_csv(&report.table, out)?;
    if cfg.options.plot {
        let name = out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let script = report.plot.script(&report.table, &name);
        let script_path = out.with_extension("gp");
        write_text(&script_path, &script)?;
    }
    Ok(None)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
