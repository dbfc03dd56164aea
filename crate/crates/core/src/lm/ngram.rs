use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_SMOOTHING: f64 = 0.1;

/// Continuation counts of one context.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Counts {
    pub total: u64,
    pub next: BTreeMap<u32, u64>,
}

/// Additively smoothed n-gram model that backs off to the longest context seen
/// in training. Contexts before the first token are padded with `vocab_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "NGramFile", into = "NGramFile")]
pub struct NGramModel {
    pub order: usize,
    pub smoothing: f64,
    pub vocab_size: u32,
    pub layout_hash: String,
    /// `tables[k]` maps length-`k` contexts to their counts.
    pub tables: Vec<HashMap<Vec<u32>, Counts>>,
}

#[derive(Serialize, Deserialize)]
struct ContextRow {
    context: Vec<u32>,
    next: Vec<(u32, u64)>,
}

#[derive(Serialize, Deserialize)]
struct NGramFile {
    order: usize,
    smoothing: f64,
    vocab_size: u32,
    layout_hash: String,
    tables: Vec<Vec<ContextRow>>,
}

impl From<NGramModel> for NGramFile {
    fn from(m: NGramModel) -> Self {
        let tables = m
            .tables
            .into_iter()
            .map(|t| {
                let mut rows: Vec<ContextRow> =
                    t.into_iter().map(|(context, c)| ContextRow { context, next: c.next.into_iter().collect() }).collect();
                rows.sort_by(|a, b| a.context.cmp(&b.context));
                rows
            })
            .collect();
        NGramFile { order: m.order, smoothing: m.smoothing, vocab_size: m.vocab_size, layout_hash: m.layout_hash, tables }
    }
}

impl From<NGramFile> for NGramModel {
    fn from(f: NGramFile) -> Self {
        let tables = f
            .tables
            .into_iter()
            .map(|rows| {
                rows.into_iter()
                    .map(|r| {
                        let next: BTreeMap<u32, u64> = r.next.into_iter().collect();
                        (r.context, Counts { total: next.values().sum(), next })
                    })
                    .collect()
            })
            .collect();
        NGramModel { order: f.order, smoothing: f.smoothing, vocab_size: f.vocab_size, layout_hash: f.layout_hash, tables }
    }
}

pub fn fit_ngram(corpus: &[Vec<u32>], vocab_size: u32, layout_hash: &str, order: usize, smoothing: f64) -> Result<NGramModel> {
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::Precondition("n-gram corpus is empty".into()));
    }
    if order == 0 || !(smoothing > 0.0) {
        return Err(Error::Precondition("n-gram order and smoothing must be positive".into()));
    }
    if let Some(&t) = corpus.iter().flatten().find(|&&t| t >= vocab_size) {
        return Err(Error::Precondition(format!("token {t} outside a vocabulary of {vocab_size}")));
    }
    let mut tables: Vec<HashMap<Vec<u32>, Counts>> = vec![HashMap::new(); order];
    for seq in corpus {
        let mut padded = vec![vocab_size; order - 1];
        padded.extend_from_slice(seq);
        for i in order - 1..padded.len() {
            let t = padded[i];
            for (k, table) in tables.iter_mut().enumerate() {
                let c = table.entry(padded[i - k..i].to_vec()).or_default();
                c.total += 1;
                *c.next.entry(t).or_default() += 1;
            }
        }
    }
    Ok(NGramModel { order, smoothing, vocab_size, layout_hash: layout_hash.to_string(), tables })
}

impl NGramModel {
    /// Structural checks for models read from disk.
    pub fn check(&self) -> Result<()> {
        if self.order == 0 || self.tables.len() != self.order {
            return Err(Error::Precondition(format!("n-gram model has {} tables for order {}", self.tables.len(), self.order)));
        }
        if !(self.smoothing > 0.0 && self.smoothing.is_finite()) {
            return Err(Error::Precondition("n-gram smoothing must be positive".into()));
        }
        if !self.tables[0].contains_key(&Vec::new()) {
            return Err(Error::Precondition("n-gram model lacks the empty context".into()));
        }
        for (k, table) in self.tables.iter().enumerate() {
            for (ctx, c) in table {
                if ctx.len() != k || ctx.iter().any(|&t| t > self.vocab_size) || c.next.keys().any(|&t| t >= self.vocab_size) {
                    return Err(Error::Precondition(format!("malformed n-gram context {ctx:?}")));
                }
            }
        }
        Ok(())
    }

    /// Counts of the longest seen suffix of `history` (at most `order - 1` tokens).
    pub fn counts(&self, history: &[u32]) -> &Counts {
        let pad = self.vocab_size;
        for k in (0..self.order).rev() {
            let ctx: Vec<u32> = if history.len() >= k {
                history[history.len() - k..].to_vec()
            } else {
                std::iter::repeat_n(pad, k - history.len()).chain(history.iter().copied()).collect()
            };
            if let Some(c) = self.tables[k].get(&ctx) {
                return c;
            }
        }
        unreachable!("the empty context is always present")
    }

    /// `P(t | history)` over the full vocabulary.
    pub fn prob(&self, history: &[u32], t: u32) -> f64 {
        let c = self.counts(history);
        let n = c.next.get(&t).copied().unwrap_or(0) as f64;
        (n + self.smoothing) / (c.total as f64 + self.smoothing * self.vocab_size as f64)
    }
}
