//! File formats: models, token files, codebooks, n-gram models, reports,
//! OBJ tessellations and VHP debug dumps. Every write is atomic.

mod codebook;
mod export;
mod model;
mod tokens;

pub use codebook::{load_codebook, load_ngram, save_codebook, save_ngram, CodebookFile, NGramFile};
pub use export::{obj_string, save_obj, save_vhp_debug, vhp_debug, VhpDebug, OBJ_GRID};
pub use model::{load_model, model_from_str, model_to_string, save_model, ModelFile};
pub use tokens::{load_tokens, save_tokens, tokens_from_str, tokens_to_string, TokenFile};

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Write through a temporary file in the target directory, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// JSON parse whose errors carry the line and column.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Located { line: e.line(), position: Some(e.column()), message: e.to_string() })
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&read_text(path)?)
}

fn check_header(kind: &str, expected: &str, version: u32) -> Result<()> {
    if kind != expected {
        return Err(Error::Format(format!("expected a {expected} file, found {kind:?}")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported {expected} version {version}")));
    }
    Ok(())
}
