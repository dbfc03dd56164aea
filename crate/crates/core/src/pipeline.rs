//! End-to-end round trip and the source-versus-result comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brep::{euler_report, normalize, BrepModel};
use crate::codec::{canonical_order, parse, tokenize, train_codebook_weighted, Codebook, CodecConfig, TokenSequence};
use crate::error::{Error, Result};
use crate::recon::{reconstruct, ReconstructionReport};
use crate::vhp::{extract_vhp, SamplingConfig};

pub const DEFAULT_LEVELS: usize = 4;
pub const DEFAULT_CODEBOOK_SIZE: usize = 256;
/// Per-axis vertex tolerance of a successful round trip, in normalized units.
pub const VERTEX_TOL: f64 = 1.0 / 256.0 + 1e-9;

type ShellTuple = (usize, usize, usize, usize, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub source_shells: Vec<ShellTuple>,
    pub result_shells: Vec<ShellTuple>,
    pub shells_match: bool,
    /// Edge endpoint multisets agree once vertices are numbered canonically.
    pub multigraph_match: bool,
    pub max_vertex_error: f64,
    pub watertight: bool,
}

impl Comparison {
    pub fn ok(&self, vertex_tol: f64) -> bool {
        self.shells_match && self.multigraph_match && self.watertight && self.max_vertex_error <= vertex_tol
    }
}

fn sorted_shells(m: &BrepModel) -> Vec<ShellTuple> {
    let mut t: Vec<ShellTuple> = euler_report(m).iter().map(|s| s.tuple()).collect();
    t.sort_by(|a, b| a.partial_cmp(b).expect("finite genus"));
    t
}

/// `rebuilt` must number its vertices in `source`'s canonical order, as
/// [`reconstruct`] does.
pub fn compare(source: &BrepModel, rebuilt: &BrepModel, report: &ReconstructionReport) -> Result<Comparison> {
    let order = canonical_order(source)?;
    let offsets: Vec<usize> = order
        .components
        .iter()
        .scan(0, |acc, c| {
            let o = *acc;
            *acc += c.len();
            Some(o)
        })
        .collect();
    let id = |v: usize| offsets[order.position[v].0] + order.position[v].1;
    let edge_set = |m: &BrepModel, f: &dyn Fn(usize) -> usize| {
        let mut e: Vec<(usize, usize)> = m.edges.iter().map(|e| {
            let (a, b) = (f(e.vertices[0]), f(e.vertices[1]));
            (a.min(b), a.max(b))
        }).collect();
        e.sort_unstable();
        e
    };
    let multigraph_match =
        source.vertices.len() == rebuilt.vertices.len() && edge_set(source, &id) == edge_set(rebuilt, &|v| v);
    let max_vertex_error = if source.vertices.len() == rebuilt.vertices.len() {
        (0..source.vertices.len())
            .map(|v| {
                let (p, q) = (source.vertices[v], rebuilt.vertices[id(v)]);
                (0..3).map(|a| (p.axis(a) - q.axis(a)).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let (source_shells, result_shells) = (sorted_shells(source), sorted_shells(rebuilt));
    Ok(Comparison {
        shells_match: source_shells == result_shells,
        source_shells,
        result_shells,
        multigraph_match,
        max_vertex_error,
        watertight: report.success,
    })
}

/// Codebook weight of each next-pointer scalar.
pub const NEXT_WEIGHT: f64 = 2.0;

/// Per-scalar codebook weights: half-patch points 1, next-pointer samples
/// [`NEXT_WEIGHT`], and the loop label as much as all geometric scalars together.
pub fn descriptor_weights(sampling: &SamplingConfig) -> Vec<f64> {
    let n = sampling.descriptor_len();
    let mut w = vec![1.0; n];
    for x in &mut w[n - 1 - 3 * sampling.n_next..n - 1] {
        *x = NEXT_WEIGHT;
    }
    w[n - 1] = ((n - 1) as f64).sqrt();
    w
}

/// Codebook over the descriptors of (normalized) models; `K` shrinks to the corpus size if needed.
pub fn codebook_for_models(models: &[BrepModel], cfg: &CodecConfig, levels: usize, size: usize, seed: u64) -> Result<Codebook> {
    let corpus: Vec<Vec<f64>> = models
        .par_iter()
        .map(|m| Ok(extract_vhp(m, &cfg.sampling)?.iter().map(|r| r.descriptor()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?
        .concat();
    if corpus.is_empty() {
        return Err(Error::CorpusTooSmall { needed: 1, got: 0 });
    }
    train_codebook_weighted(&corpus, levels, size.min(corpus.len()), seed, &descriptor_weights(&cfg.sampling))
}

/// Normalize and tokenize; the sequence carries the map back to the source frame.
pub fn encode_model(m: &BrepModel, cb: &Codebook, cfg: &CodecConfig) -> Result<(BrepModel, TokenSequence)> {
    let (nm, t) = normalize(m)?;
    let mut seq = tokenize(&nm, cb, cfg)?;
    seq.transform = Some(t.inverse());
    Ok((nm, seq))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripResult {
    pub tokens: usize,
    pub report: ReconstructionReport,
    pub comparison: Comparison,
}

/// tokenize → parse → reconstruct → compare, all in the normalized frame.
pub fn roundtrip(m: &BrepModel, cb: &Codebook, cfg: &CodecConfig) -> Result<(BrepModel, RoundtripResult)> {
    let (nm, seq) = encode_model(m, cb, cfg)?;
    let records = parse(&seq.tokens, cb, cfg)?;
    let (rebuilt, report) = reconstruct(&records);
    let comparison = compare(&nm, &rebuilt, &report)?;
    Ok((rebuilt, RoundtripResult { tokens: seq.tokens.len(), report, comparison }))
}
