use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CurveGeom, Point3, SurfaceGeom, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub curve: CurveGeom,
    /// `[start, end]` of the curve.
    pub vertices: [usize; 2],
    /// `[forward, reverse]` half-edges.
    pub halfedges: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfEdge {
    pub origin: usize,
    pub twin: usize,
    #[serde(rename = "loop")]
    pub loop_id: usize,
    pub edge: usize,
    /// Runs along the edge curve's parameter direction.
    pub forward: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    Outer,
    Inner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub halfedges: Vec<usize>,
    pub kind: LoopKind,
    pub face: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub surface: SurfaceGeom,
    /// Outward normal agrees with `∂S/∂u × ∂S/∂v`.
    pub same_sense: bool,
    pub outer: usize,
    pub inners: Vec<usize>,
}

/// Half-edge boundary representation. Outer loops run counter-clockwise seen
/// from outside the solid, inner loops clockwise; each half-edge's twin runs
/// the other way along the same edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct BrepModel {
    pub vertices: Vec<Point3>,
    pub edges: Vec<Edge>,
    pub halfedges: Vec<HalfEdge>,
    pub loops: Vec<Loop>,
    pub faces: Vec<Face>,
    pub shells: Vec<Vec<usize>>,
}

impl BrepModel {
    pub fn destination(&self, h: usize) -> usize {
        self.halfedges[self.halfedges[h].twin].origin
    }

    /// Successor of `h` in its loop.
    pub fn next(&self, h: usize) -> usize {
        let lp = &self.loops[self.halfedges[h].loop_id];
        let pos = lp.halfedges.iter().position(|&x| x == h).expect("half-edge listed in its loop");
        lp.halfedges[(pos + 1) % lp.halfedges.len()]
    }

    /// `next` for every half-edge at once.
    pub fn next_map(&self) -> Vec<usize> {
        let mut next = vec![usize::MAX; self.halfedges.len()];
        for lp in &self.loops {
            let n = lp.halfedges.len();
            for (k, &h) in lp.halfedges.iter().enumerate() {
                next[h] = lp.halfedges[(k + 1) % n];
            }
        }
        next
    }

    pub fn face_of(&self, h: usize) -> usize {
        self.loops[self.halfedges[h].loop_id].face
    }

    /// Curve parameter for half-edge-relative parameter `t` (0 at the origin).
    pub fn curve_param(&self, h: usize, t: f64) -> f64 {
        if self.halfedges[h].forward {
            t
        } else {
            1.0 - t
        }
    }

    pub fn halfedge_point(&self, h: usize, t: f64) -> Point3 {
        self.edges[self.halfedges[h].edge].curve.eval(self.curve_param(h, t))
    }

    pub fn halfedge_tangent(&self, h: usize, t: f64) -> Vec3 {
        let he = &self.halfedges[h];
        let d = self.edges[he.edge].curve.derivative(self.curve_param(h, t));
        if he.forward {
            d
        } else {
            -d
        }
    }

    /// Interior or endpoint-inclusive samples of an edge's curve.
    pub fn sample_curve(&self, edge: usize, n: usize, include_endpoints: bool) -> Result<Vec<Point3>> {
        let e = self.edges.get(edge).ok_or_else(|| Error::Topology(format!("no edge {edge}")))?;
        e.curve.sample(n, include_endpoints)
    }

    /// `n` interior samples ordered from the half-edge's origin. The parameters are
    /// computed from the edge's own indices, so twins produce bit-identical points.
    pub fn sample_halfedge(&self, h: usize, n: usize) -> Result<Vec<Point3>> {
        let he = &self.halfedges[h];
        let curve = &self.edges[he.edge].curve;
        curve.check()?;
        Ok((1..=n)
            .map(|k| {
                let idx = if he.forward { k } else { n + 1 - k };
                curve.eval(idx as f64 / (n + 1) as f64)
            })
            .collect())
    }

    /// Point and outward unit normal of a face at `(u, v)`.
    pub fn eval_surface(&self, face: usize, u: f64, v: f64) -> Result<(Point3, Vec3)> {
        let f = self.faces.get(face).ok_or_else(|| Error::Topology(format!("no face {face}")))?;
        if !f.surface.domain.contains([u, v], 1e-12) {
            return Err(Error::Precondition(format!("({u}, {v}) outside the domain of face {face}")));
        }
        let n = f.surface.normal(u, v, f.same_sense)?;
        Ok((f.surface.eval(u, v), n))
    }

    pub fn inner_loop_count(&self) -> usize {
        self.loops.iter().filter(|l| l.kind == LoopKind::Inner).count()
    }

    /// Undirected vertex adjacency, one entry per edge end (self-loops appear twice).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            let [a, b] = e.vertices;
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

/// Incremental construction of a [`BrepModel`] from faces given as loops of
/// `(edge, forward)` uses.
#[derive(Debug, Default)]
pub struct BrepBuilder {
    vertices: Vec<Point3>,
    edges: Vec<(usize, usize, CurveGeom)>,
    faces: Vec<(SurfaceGeom, bool, Vec<(usize, bool)>, Vec<Vec<(usize, bool)>>)>,
}

impl BrepBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, p: Point3) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    pub fn vertex(&self, v: usize) -> Point3 {
        self.vertices[v]
    }

    /// Edge from `a` to `b`; the curve must run from `a` to `b`.
    pub fn add_edge(&mut self, a: usize, b: usize, curve: CurveGeom) -> usize {
        self.edges.push((a, b, curve));
        self.edges.len() - 1
    }

    pub fn add_line(&mut self, a: usize, b: usize) -> usize {
        let curve = CurveGeom::Line { start: self.vertices[a], end: self.vertices[b] };
        self.add_edge(a, b, curve)
    }

    pub fn add_face(
        &mut self,
        surface: SurfaceGeom,
        same_sense: bool,
        outer: Vec<(usize, bool)>,
        inners: Vec<Vec<(usize, bool)>>,
    ) -> usize {
        self.faces.push((surface, same_sense, outer, inners));
        self.faces.len() - 1
    }

    pub fn build(self) -> Result<BrepModel> {
        let mut m = BrepModel { vertices: self.vertices, ..Default::default() };
        for (i, (a, b, curve)) in self.edges.into_iter().enumerate() {
            m.halfedges.push(HalfEdge { origin: a, twin: 2 * i + 1, loop_id: usize::MAX, edge: i, forward: true });
            m.halfedges.push(HalfEdge { origin: b, twin: 2 * i, loop_id: usize::MAX, edge: i, forward: false });
            m.edges.push(Edge { curve, vertices: [a, b], halfedges: [2 * i, 2 * i + 1] });
        }
        for (fi, (surface, same_sense, outer, inners)) in self.faces.into_iter().enumerate() {
            let mut loop_ids = Vec::with_capacity(1 + inners.len());
            for (k, uses) in std::iter::once(outer).chain(inners).enumerate() {
                let lid = m.loops.len();
                let mut hs = Vec::with_capacity(uses.len());
                for (e, fwd) in uses {
                    let edge = m.edges.get(e).ok_or_else(|| Error::Topology(format!("face {fi} uses missing edge {e}")))?;
                    let h = edge.halfedges[if fwd { 0 } else { 1 }];
                    if m.halfedges[h].loop_id != usize::MAX {
                        return Err(Error::Topology(format!("half-edge {h} used by two loops")));
                    }
                    m.halfedges[h].loop_id = lid;
                    hs.push(h);
                }
                let kind = if k == 0 { LoopKind::Outer } else { LoopKind::Inner };
                m.loops.push(Loop { halfedges: hs, kind, face: fi });
                loop_ids.push(lid);
            }
            m.faces.push(Face { surface, same_sense, outer: loop_ids[0], inners: loop_ids[1..].to_vec() });
        }
        if let Some(h) = m.halfedges.iter().position(|h| h.loop_id == usize::MAX) {
            return Err(Error::Topology(format!("half-edge {h} belongs to no loop")));
        }
        m.shells = super::topo::face_shells(&m);
        Ok(m)
    }
}
