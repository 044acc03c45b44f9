//! Tables, templates and plots rendered from a library.

pub mod markers;
pub mod plot;
pub mod table;
pub mod template;

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use markers::{MarkerRegistry, MarkerShape, MarkerStyle};
pub use plot::{plot_library, render_svg, PlotWindow};
pub use table::{export_table, parse_csv, read_csv, render_table, ExportFormat, CSV_COLUMNS};
pub use template::{export_template, render_template, Template, TemplateError};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unsupported export format `{0}`")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("invalid plot window: {0}")]
    InvalidWindow(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

/// Writes `content` through a temporary file so readers never see a partial file.
pub(crate) fn write_atomic(path: &Path, content: &[u8]) -> Result<(), ExportError> {
    let io = |source| ExportError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(content).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
