use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const COORD_BINS: u32 = 128;
pub const DEFAULT_POINTER_MAX: u32 = 256;
pub const DEFAULT_MAX_LEN: usize = 3072;

/// Meaning of a token id under a [`VocabLayout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Coord(u32),
    Pointer(u32),
    /// Code `code` of quantizer level `level`; `code == K` is the zero centroid.
    Rq { level: u32, code: u32 },
    Start,
    Sep,
    End,
}

/// Partition of the token id space: coordinates, pointers, one range of
/// `K + 1` codes per quantizer level, then `<start>`, `<sep>`, `<end>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VocabLayout {
    pub pointer_max: u32,
    pub levels: u32,
    pub codebook_size: u32,
}

impl VocabLayout {
    pub fn new(pointer_max: u32, levels: u32, codebook_size: u32) -> Self {
        VocabLayout { pointer_max, levels, codebook_size }
    }

    pub fn pointer_base(&self) -> u32 {
        COORD_BINS
    }

    /// Codes per level, the zero centroid included.
    pub fn level_width(&self) -> u32 {
        self.codebook_size + 1
    }

    pub fn level_range(&self, level: u32) -> Range<u32> {
        let lo = COORD_BINS + self.pointer_max + level * self.level_width();
        lo..lo + self.level_width()
    }

    pub fn coord_range(&self) -> Range<u32> {
        0..COORD_BINS
    }

    pub fn pointer_range(&self) -> Range<u32> {
        COORD_BINS..COORD_BINS + self.pointer_max
    }

    pub fn start(&self) -> u32 {
        COORD_BINS + self.pointer_max + self.levels * self.level_width()
    }

    pub fn sep(&self) -> u32 {
        self.start() + 1
    }

    pub fn end(&self) -> u32 {
        self.start() + 2
    }

    pub fn size(&self) -> u32 {
        self.start() + 3
    }

    pub fn classify(&self, token: u32) -> Option<TokenKind> {
        let rq0 = COORD_BINS + self.pointer_max;
        Some(match token {
            t if t < COORD_BINS => TokenKind::Coord(t),
            t if t < rq0 => TokenKind::Pointer(t - COORD_BINS),
            t if t < self.start() => {
                let off = t - rq0;
                TokenKind::Rq { level: off / self.level_width(), code: off % self.level_width() }
            }
            t if t == self.start() => TokenKind::Start,
            t if t == self.sep() => TokenKind::Sep,
            t if t == self.end() => TokenKind::End,
            _ => return None,
        })
    }

    /// Inverse of [`VocabLayout::classify`]; `None` for out-of-range payloads.
    pub fn token(&self, kind: TokenKind) -> Option<u32> {
        match kind {
            TokenKind::Coord(k) => (k < COORD_BINS).then_some(k),
            TokenKind::Pointer(p) => (p < self.pointer_max).then_some(COORD_BINS + p),
            TokenKind::Rq { level, code } => {
                (level < self.levels && code < self.level_width()).then(|| self.level_range(level).start + code)
            }
            TokenKind::Start => Some(self.start()),
            TokenKind::Sep => Some(self.sep()),
            TokenKind::End => Some(self.end()),
        }
    }

    /// Short content hash identifying the layout in token-file headers.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("vhp-vocab/1 coord={COORD_BINS} pointer={} levels={} size={}", self.pointer_max, self.levels, self.codebook_size));
        hex::encode(&h.finalize()[..8])
    }
}
