use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, write_atomic, FORMAT_VERSION};
use crate::codec::{finish, step, GrammarState, TokenSequence, VocabLayout};
use crate::error::{Error, Result};
use crate::geom::Similarity;

const MAGIC: &str = "# vhp-tokens";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    version: u32,
    layout_hash: String,
    codebook_id: String,
    /// One entry per sequence line.
    transforms: Vec<Option<Similarity>>,
}

/// Sequences sharing one vocabulary layout and codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenFile {
    pub layout_hash: String,
    pub codebook_id: String,
    pub sequences: Vec<TokenSequence>,
}

impl TokenFile {
    /// Fails when the sequences disagree on layout or codebook.
    pub fn from_sequences(sequences: Vec<TokenSequence>) -> Result<Self> {
        let first = sequences.first().ok_or_else(|| Error::Precondition("no sequences to store".into()))?;
        let (layout_hash, codebook_id) = (first.layout_hash.clone(), first.codebook_id.clone());
        if sequences.iter().any(|s| s.layout_hash != layout_hash || s.codebook_id != codebook_id) {
            return Err(Error::Precondition("sequences use different layouts or codebooks".into()));
        }
        Ok(TokenFile { layout_hash, codebook_id, sequences })
    }

    /// Replays every line through the grammar; errors carry the 1-based file line.
    pub fn check_grammar(&self, layout: &VocabLayout) -> Result<()> {
        if layout.hash() != self.layout_hash {
            return Err(Error::Format(format!("token file layout {} does not match {}", self.layout_hash, layout.hash())));
        }
        for (i, s) in self.sequences.iter().enumerate() {
            let line = i + 2;
            let mut st = GrammarState::default();
            for &t in &s.tokens {
                st = step(&st, t, layout).map_err(|e| Error::Located { line, position: Some(e.position), message: e.to_string() })?;
            }
            finish(&st).map_err(|e| Error::Located { line, position: Some(e.position), message: e.to_string() })?;
        }
        Ok(())
    }
}

pub fn tokens_to_string(f: &TokenFile) -> Result<String> {
    let header = Header {
        version: FORMAT_VERSION,
        layout_hash: f.layout_hash.clone(),
        codebook_id: f.codebook_id.clone(),
        transforms: f.sequences.iter().map(|s| s.transform).collect(),
    };
    let mut out = format!("{MAGIC} {}\n", serde_json::to_string(&header)?);
    for s in &f.sequences {
        let line: Vec<String> = s.tokens.iter().map(|t| t.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Parses the header and integer lines. With a layout, every line is also
/// replayed through the grammar.
pub fn tokens_from_str(text: &str, layout: Option<&VocabLayout>) -> Result<TokenFile> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::Located { line: 1, position: None, message: "empty token file".into() })?;
    let json = first
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Located { line: 1, position: None, message: format!("missing `{MAGIC}` header") })?;
    let header: Header =
        serde_json::from_str(json.trim()).map_err(|e| Error::Located { line: 1, position: None, message: e.to_string() })?;
    if header.version != FORMAT_VERSION {
        return Err(Error::Located { line: 1, position: None, message: format!("unsupported version {}", header.version) });
    }
    let body: Vec<&str> = lines.collect();
    let body = &body[..body.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |i| i + 1)];
    if body.len() != header.transforms.len() {
        return Err(Error::Located {
            line: 1,
            position: None,
            message: format!("header lists {} transforms for {} sequences", header.transforms.len(), body.len()),
        });
    }
    let mut sequences = Vec::with_capacity(body.len());
    for (i, (l, transform)) in body.iter().zip(&header.transforms).enumerate() {
        let tokens = l
            .split_whitespace()
            .enumerate()
            .map(|(p, w)| {
                w.parse::<u32>().map_err(|_| Error::Located { line: i + 2, position: Some(p), message: format!("{w:?} is not a token id") })
            })
            .collect::<Result<Vec<u32>>>()?;
        sequences.push(TokenSequence {
            tokens,
            layout_hash: header.layout_hash.clone(),
            codebook_id: header.codebook_id.clone(),
            transform: *transform,
        });
    }
    let f = TokenFile { layout_hash: header.layout_hash, codebook_id: header.codebook_id, sequences };
    if let Some(layout) = layout {
        f.check_grammar(layout)?;
    }
    Ok(f)
}

pub fn save_tokens(path: &Path, f: &TokenFile) -> Result<()> {
    write_atomic(path, tokens_to_string(f)?.as_bytes())
}

pub fn load_tokens(path: &Path, layout: Option<&VocabLayout>) -> Result<TokenFile> {
    tokens_from_str(&read_text(path)?, layout)
}
