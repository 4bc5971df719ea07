//! Instance and result serialization.

pub mod dump;
pub mod mps;
pub mod native;
pub mod result;

use std::path::Path;

use semidive_core::model::{ModelError, Problem};
use thiserror::Error;

pub use dump::canonical_dump;
pub use mps::{parse_mps, MpsError};
pub use native::{parse_native, write_native, NativeError};
pub use result::{digits17, number, read_solution, write_result, RunInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Mps,
    Native,
}

impl Format {
    /// Guesses from the extension: `.mps` or `.json`.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "mps" => Some(Format::Mps),
            "json" => Some(Format::Native),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Mps { path: String, source: MpsError },
    #[error("{path}: {source}")]
    Native { path: String, source: NativeError },
    #[error("{path}: {source}")]
    Model { path: String, source: ModelError },
    #[error("{0}: unknown format, pass --format mps|json")]
    UnknownFormat(String),
}

/// Reads an instance and brings it into indicator form.
pub fn load_problem(path: &Path, format: Option<Format>) -> Result<Problem, LoadError> {
    let shown = path.display().to_string();
    let format = format
        .or_else(|| Format::from_path(path))
        .ok_or_else(|| LoadError::UnknownFormat(shown.clone()))?;
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: shown.clone(),
        source,
    })?;
    match format {
        Format::Mps => parse_mps(&text).map_err(|source| LoadError::Mps { path: shown, source }),
        Format::Native => {
            let p = parse_native(&text).map_err(|source| LoadError::Native {
                path: shown.clone(),
                source,
            })?;
            p.reformulate_indicator()
                .map_err(|source| LoadError::Model { path: shown, source })
        }
    }
}
