//! Persistence and export: checksummed bundle archives, SVG rendering,
//! and CSV export of synthesized diagrams.

pub mod bundle;
pub mod csv;
pub mod svg;

pub use bundle::{load_bundle, save_bundle, ArchiveEntry, ArchiveManifest, ARCHIVE_ENTRIES};
pub use csv::diagram_to_csv;
pub use svg::render_svg;

use thiserror::Error;

use crate::stack::StackError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("archive: {0}")]
    Zip(#[from] zip::result::ZipError),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bundle schema {found} is not readable by this build (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("corrupt archive: {0}")]
    CorruptArchive(String),
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error("diagram has no predictions to render")]
    EmptyDiagram,
}
