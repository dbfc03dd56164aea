use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brep::BrepModel;
use crate::error::{Error, Result};
use crate::geom::{Point3, Similarity};
use crate::vhp::{extract_vhp, SamplingConfig};

use super::grammar::{finish, step, GrammarState};
use super::order::{canonical_order, dequantize_point, quantize_point, CanonicalOrder};
use super::rq::Codebook;
use super::vocab::{TokenKind, VocabLayout, DEFAULT_MAX_LEN, DEFAULT_POINTER_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub sampling: SamplingConfig,
    pub pointer_max: u32,
    pub max_len: usize,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig { sampling: SamplingConfig::default(), pointer_max: DEFAULT_POINTER_MAX, max_len: DEFAULT_MAX_LEN }
    }
}

impl CodecConfig {
    pub fn layout(&self, cb: &Codebook) -> VocabLayout {
        VocabLayout::new(self.pointer_max, cb.level_count() as u32, cb.size as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<u32>,
    pub layout_hash: String,
    pub codebook_id: String,
    /// Maps normalized coordinates back to the source model's frame.
    pub transform: Option<Similarity>,
}

/// One undirected edge as seen from its later endpoint `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    /// Descriptor of the half-edge `from → to`.
    pub forward: Vec<f64>,
    /// Descriptor of the half-edge `to → from`.
    pub backward: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComponentRecords {
    pub vertices: Vec<Point3>,
    /// In emission order: by `to`, then `from`.
    pub edges: Vec<EdgeRecord>,
}

/// Decoded content of a token sequence, per connected component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecordSet {
    pub components: Vec<ComponentRecords>,
    pub sampling: SamplingConfig,
}

impl VertexRecordSet {
    pub fn vertex_count(&self) -> usize {
        self.components.iter().map(|c| c.vertices.len()).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.components.iter().map(|c| c.edges.len()).sum()
    }
}

/// Where a source half-edge lands in a record set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfEdgeSlot {
    pub component: usize,
    pub edge: usize,
    /// True for the `from → to` direction.
    pub forward: bool,
}

struct Emission {
    to: usize,
    from: usize,
    /// Half-edges `from → to` and `to → from`.
    halfedges: [usize; 2],
}

/// Edges grouped per component and sorted into emission order by `(to, from, key)`.
fn emissions<K: Ord>(m: &BrepModel, order: &CanonicalOrder, key: impl Fn(usize) -> K) -> Vec<Vec<Emission>> {
    let mut out: Vec<Vec<Emission>> = (0..order.components.len()).map(|_| Vec::new()).collect();
    for e in &m.edges {
        let [a, b] = e.vertices;
        let [h0, h1] = e.halfedges;
        let (ca, pa) = order.position[a];
        let (_, pb) = order.position[b];
        let (from, to) = (pa.min(pb), pa.max(pb));
        let origin_is_from = |h: usize| order.position[m.halfedges[h].origin].1 == from;
        let halfedges = if a == b {
            if (key(h1), h1) < (key(h0), h0) {
                [h1, h0]
            } else {
                [h0, h1]
            }
        } else if origin_is_from(h0) {
            [h0, h1]
        } else {
            [h1, h0]
        };
        out[ca].push(Emission { to, from, halfedges });
    }
    for comp in &mut out {
        comp.sort_by(|x, y| {
            (x.to, x.from, key(x.halfedges[0]), key(x.halfedges[1]), x.halfedges)
                .cmp(&(y.to, y.from, key(y.halfedges[0]), key(y.halfedges[1]), y.halfedges))
        });
    }
    out
}

pub fn tokenize(m: &BrepModel, cb: &Codebook, cfg: &CodecConfig) -> Result<TokenSequence> {
    let dim = cfg.sampling.descriptor_len();
    if cb.dim != dim {
        return Err(Error::DescriptorLength { got: cb.dim, expected: dim });
    }
    let layout = cfg.layout(cb);
    let order = canonical_order(m)?;
    for c in &order.components {
        if c.len() > cfg.pointer_max as usize {
            return Err(Error::Capacity { what: "vertices per component", got: c.len(), limit: cfg.pointer_max as usize });
        }
    }
    let records = extract_vhp(m, &cfg.sampling)?;
    let codes: Vec<Vec<usize>> = records.par_iter().map(|r| cb.encode(&r.descriptor())).collect::<Result<_>>()?;
    let groups = emissions(m, &order, |h| codes[h].clone());

    let rq = |level: usize, code: usize| layout.token(TokenKind::Rq { level: level as u32, code: code as u32 }).expect("code in range");
    let mut tokens = vec![layout.start()];
    for (ci, comp) in order.components.iter().enumerate() {
        if ci > 0 {
            tokens.push(layout.sep());
        }
        let mut edges = groups[ci].iter().peekable();
        for (j, &v) in comp.iter().enumerate() {
            tokens.extend(quantize_point(m.vertices[v])?);
            while let Some(e) = edges.next_if(|e| e.to == j) {
                tokens.push(layout.pointer_base() + e.from as u32);
                for &h in &e.halfedges {
                    tokens.extend(codes[h].iter().enumerate().map(|(l, &c)| rq(l, c)));
                }
            }
        }
    }
    tokens.push(layout.end());
    if tokens.len() > cfg.max_len {
        return Err(Error::Capacity { what: "sequence length", got: tokens.len(), limit: cfg.max_len });
    }
    Ok(TokenSequence { tokens, layout_hash: layout.hash(), codebook_id: cb.id(), transform: None })
}

/// Record set with exact positions and descriptors, plus where each half-edge landed.
pub fn records_from_model(m: &BrepModel, sampling: &SamplingConfig) -> Result<(VertexRecordSet, Vec<HalfEdgeSlot>)> {
    let order = canonical_order(m)?;
    let records = extract_vhp(m, sampling)?;
    let groups = emissions(m, &order, |_| ());
    let mut slots = vec![HalfEdgeSlot { component: 0, edge: 0, forward: true }; m.halfedges.len()];
    let components = order
        .components
        .iter()
        .zip(groups)
        .enumerate()
        .map(|(ci, (comp, group))| ComponentRecords {
            vertices: comp.iter().map(|&v| m.vertices[v]).collect(),
            edges: group
                .into_iter()
                .enumerate()
                .map(|(ei, e)| {
                    slots[e.halfedges[0]] = HalfEdgeSlot { component: ci, edge: ei, forward: true };
                    slots[e.halfedges[1]] = HalfEdgeSlot { component: ci, edge: ei, forward: false };
                    EdgeRecord {
                        from: e.from,
                        to: e.to,
                        forward: records[e.halfedges[0]].descriptor(),
                        backward: records[e.halfedges[1]].descriptor(),
                    }
                })
                .collect(),
        })
        .collect();
    Ok((VertexRecordSet { components, sampling: *sampling }, slots))
}

pub fn parse(tokens: &[u32], cb: &Codebook, cfg: &CodecConfig) -> Result<VertexRecordSet> {
    let layout = cfg.layout(cb);
    let mut out = VertexRecordSet { components: Vec::new(), sampling: cfg.sampling };
    if tokens == [layout.start(), layout.end()] {
        return Ok(out);
    }
    let d = layout.levels as usize;
    let mut state = GrammarState::default();
    let mut coord = [0u32; 3];
    let mut codes: Vec<usize> = Vec::with_capacity(2 * d);
    let mut pending: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut comps: Vec<(Vec<Point3>, Vec<(usize, usize, Vec<usize>)>)> = Vec::new();
    for &t in tokens {
        let prev = state.phase;
        state = step(&state, t, &layout)?;
        use super::grammar::Phase;
        match layout.classify(t).expect("accepted tokens classify") {
            TokenKind::Start => comps.push(Default::default()),
            TokenKind::Sep => comps.push(Default::default()),
            TokenKind::Coord(k) => {
                let idx = match prev {
                    Phase::Coord(i) => i as usize,
                    _ => 0,
                };
                coord[idx] = k;
                if state.phase == Phase::Open {
                    comps.last_mut().unwrap().0.push(dequantize_point(coord));
                }
            }
            TokenKind::Pointer(p) => {
                let to = comps.last().unwrap().0.len() - 1;
                pending.push((p as usize, to, Vec::new()));
                codes.clear();
            }
            TokenKind::Rq { code, .. } => {
                codes.push(code as usize);
                if codes.len() == 2 * d {
                    let (from, to, _) = pending.pop().unwrap();
                    comps.last_mut().unwrap().1.push((from, to, std::mem::take(&mut codes)));
                }
            }
            TokenKind::End => {}
        }
    }
    finish(&state)?;
    for (vertices, edges) in comps {
        let edges = edges
            .into_par_iter()
            .map(|(from, to, codes)| {
                Ok(EdgeRecord { from, to, forward: cb.decode(&codes[..d])?, backward: cb.decode(&codes[d..])? })
            })
            .collect::<Result<_>>()?;
        out.components.push(ComponentRecords { vertices, edges });
    }
    Ok(out)
}

/// Token count of a single-component layout: `2 + 3V + (1 + 2D) E`.
pub fn expected_length(vertices: usize, edges: usize, levels: usize) -> usize {
    2 + 3 * vertices + (1 + 2 * levels) * edges
}

#[cfg(test)]
mod tests;
