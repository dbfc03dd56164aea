use serde::{Deserialize, Serialize};

use crate::brep::LoopKind;
use crate::codec::VertexRecordSet;
use crate::error::Result;
use crate::geom::Point3;
use crate::vhp::VhpRecord;

/// A half-edge decoded from a record. Draft `2 e` runs `from → to` of edge `e`,
/// draft `2 e + 1` the other way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfEdgeDraft {
    pub id: usize,
    pub edge: usize,
    pub origin: usize,
    pub destination: usize,
    /// Vertex positions of origin and destination.
    pub endpoints: [Point3; 2],
    /// Interior on-curve samples ordered from the origin.
    pub curve: Vec<Point3>,
    /// Per curve sample, the remaining points of its half-patch row.
    pub surface: Vec<Vec<Point3>>,
    pub next: Vec<Point3>,
    pub label: LoopKind,
}

impl HalfEdgeDraft {
    pub fn twin(&self) -> usize {
        self.id ^ 1
    }

    /// Curve samples with both endpoints attached.
    pub fn polyline(&self) -> Vec<Point3> {
        let mut pts = Vec::with_capacity(self.curve.len() + 2);
        pts.push(self.endpoints[0]);
        pts.extend_from_slice(&self.curve);
        pts.push(self.endpoints[1]);
        pts
    }

    pub fn surface_points(&self) -> impl Iterator<Item = Point3> + '_ {
        self.surface.iter().flatten().copied()
    }
}

/// Global vertex positions, components concatenated in order.
pub fn global_vertices(records: &VertexRecordSet) -> Vec<Point3> {
    records.components.iter().flat_map(|c| c.vertices.iter().copied()).collect()
}

pub fn materialize_half_edges(records: &VertexRecordSet) -> Result<Vec<HalfEdgeDraft>> {
    let cfg = &records.sampling;
    let vertices = global_vertices(records);
    let mut drafts = Vec::with_capacity(2 * records.edge_count());
    let mut offset = 0;
    for comp in &records.components {
        for e in &comp.edges {
            let edge = drafts.len() / 2;
            let (a, b) = (offset + e.from, offset + e.to);
            let fwd = VhpRecord::from_descriptor(2 * edge, &e.forward, cfg)?;
            let bwd = VhpRecord::from_descriptor(2 * edge + 1, &e.backward, cfg)?;
            let (f, r) = (fwd.half_patch.curve_points(), bwd.half_patch.curve_points());
            let n = f.len();
            let avg: Vec<Point3> = (0..n).map(|k| (f[k] + r[n - 1 - k]) * 0.5).collect();
            let rev: Vec<Point3> = avg.iter().rev().copied().collect();
            let tail = |rec: &VhpRecord| rec.half_patch.rows.iter().map(|row| row[1..].to_vec()).collect();
            drafts.push(HalfEdgeDraft {
                id: 2 * edge,
                edge,
                origin: a,
                destination: b,
                endpoints: [vertices[a], vertices[b]],
                curve: avg,
                surface: tail(&fwd),
                next: fwd.next_samples.clone(),
                label: fwd.label,
            });
            drafts.push(HalfEdgeDraft {
                id: 2 * edge + 1,
                edge,
                origin: b,
                destination: a,
                endpoints: [vertices[b], vertices[a]],
                curve: rev,
                surface: tail(&bwd),
                next: bwd.next_samples.clone(),
                label: bwd.label,
            });
        }
        offset += comp.vertices.len();
    }
    Ok(drafts)
}
