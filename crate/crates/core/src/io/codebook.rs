use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_header, load_json, save_json, FORMAT_VERSION};
use crate::codec::{Codebook, CodecConfig};
use crate::error::{Error, Result};
use crate::lm::NGramModel;

const CODEBOOK_KIND: &str = "vhp-codebook";
const NGRAM_KIND: &str = "vhp-ngram";

/// A codebook together with the codec settings its descriptors were built with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub format: String,
    pub version: u32,
    pub id: String,
    pub levels: usize,
    pub size: usize,
    pub descriptor_len: usize,
    pub codec: CodecConfig,
    pub codebook: Codebook,
}

impl CodebookFile {
    pub fn new(codebook: Codebook, codec: CodecConfig) -> Self {
        CodebookFile {
            format: CODEBOOK_KIND.into(),
            version: FORMAT_VERSION,
            id: codebook.id(),
            levels: codebook.level_count(),
            size: codebook.size,
            descriptor_len: codebook.dim,
            codec,
            codebook,
        }
    }

    pub fn check(&self) -> Result<()> {
        check_header(&self.format, CODEBOOK_KIND, self.version)?;
        let cb = &self.codebook;
        self.codec.sampling.check()?;
        let bad = |m: String| Err(Error::Format(m));
        if cb.dim != self.codec.sampling.descriptor_len() || cb.dim != self.descriptor_len {
            return bad(format!("descriptor length {} does not match the sampling settings", cb.dim));
        }
        if cb.levels.len() != self.levels || cb.size != self.size || cb.levels.is_empty() || cb.size == 0 {
            return bad("codebook header disagrees with its tables".into());
        }
        if cb.mean.len() != cb.dim || cb.scale.len() != cb.dim || cb.scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("malformed normalization record".into());
        }
        for (d, level) in cb.levels.iter().enumerate() {
            if level.len() != cb.size + 1 || level.iter().any(|c| c.len() != cb.dim || c.iter().any(|x| !x.is_finite())) {
                return bad(format!("level {d} must hold {} finite centroids of length {}", cb.size + 1, cb.dim));
            }
            if level[cb.size].iter().any(|&x| x != 0.0) {
                return bad(format!("level {d} lacks the zero centroid"));
            }
        }
        if cb.id() != self.id {
            return bad(format!("content hash {} does not match the recorded id {}", cb.id(), self.id));
        }
        Ok(())
    }
}

pub fn save_codebook(path: &Path, f: &CodebookFile) -> Result<()> {
    save_json(path, f)
}

pub fn load_codebook(path: &Path) -> Result<CodebookFile> {
    let f: CodebookFile = load_json(path)?;
    f.check()?;
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGramFile {
    pub format: String,
    pub version: u32,
    pub codebook_id: String,
    pub codec: CodecConfig,
    pub model: NGramModel,
}

impl NGramFile {
    pub fn new(model: NGramModel, codebook_id: String, codec: CodecConfig) -> Self {
        NGramFile { format: NGRAM_KIND.into(), version: FORMAT_VERSION, codebook_id, codec, model }
    }
}

pub fn save_ngram(path: &Path, f: &NGramFile) -> Result<()> {
    save_json(path, f)
}

pub fn load_ngram(path: &Path) -> Result<NGramFile> {
    let f: NGramFile = load_json(path)?;
    check_header(&f.format, NGRAM_KIND, f.version)?;
    f.model.check().map_err(|e| Error::Format(e.to_string()))?;
    Ok(f)
}
