use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{topo, BrepModel, LoopKind};

/// Absolute tolerance for structural coincidence checks, in model units.
pub const STRUCTURAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    DanglingReference,
    TwinInconsistent,
    LoopNotClosed,
    LoopMembership,
    NonManifoldEdge,
    /// A loop runs along an edge and straight back (`next(h) = twin(h)`).
    Spur,
    IsolatedVertex,
    FaceLoops,
    ShellPartition,
    EulerResidual,
    CurveEndpoint,
    InvalidGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "element", content = "id", rename_all = "snake_case")]
pub enum Location {
    Vertex(usize),
    Edge(usize),
    HalfEdge(usize),
    Loop(usize),
    Face(usize),
    Shell(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub kind: DefectKind,
    pub location: Location,
    pub detail: String,
}

/// Loop-corrected Euler characteristics of one shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellEuler {
    pub v: usize,
    pub e: usize,
    pub f: usize,
    pub h: usize,
    /// `1 - (V - E + F - H) / 2`; non-integral or negative values are defects.
    pub genus: f64,
}

impl ShellEuler {
    pub fn chi(&self) -> i64 {
        self.v as i64 - self.e as i64 + self.f as i64 - self.h as i64
    }

    pub fn is_consistent(&self) -> bool {
        self.genus >= 0.0 && self.genus.fract() == 0.0
    }

    pub fn tuple(&self) -> (usize, usize, usize, usize, f64) {
        (self.v, self.e, self.f, self.h, self.genus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub twin_consistent: bool,
    pub loops_closed: bool,
    pub manifold: bool,
    pub geometry_consistent: bool,
    pub watertight: bool,
    pub shells: Vec<ShellEuler>,
    pub defects: Vec<Defect>,
}

impl ValidationReport {
    pub fn has(&self, kind: DefectKind) -> bool {
        self.defects.iter().any(|d| d.kind == kind)
    }
}

struct Collector(Vec<Defect>);

impl Collector {
    fn push(&mut self, kind: DefectKind, location: Location, detail: impl Into<String>) {
        self.0.push(Defect { kind, location, detail: detail.into() });
    }
}

/// Per-shell `(V, E, F, H, genus)` with shells recomputed from face adjacency.
pub fn euler_report(m: &BrepModel) -> Vec<ShellEuler> {
    topo::face_shells(m).iter().map(|faces| shell_euler(m, faces)).collect()
}

fn shell_euler(m: &BrepModel, faces: &[usize]) -> ShellEuler {
    let mut verts = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut h = 0;
    for &f in faces {
        let Some(face) = m.faces.get(f) else { continue };
        h += face.inners.len();
        for &l in std::iter::once(&face.outer).chain(&face.inners) {
            let Some(lp) = m.loops.get(l) else { continue };
            for &he in &lp.halfedges {
                if let Some(x) = m.halfedges.get(he) {
                    verts.insert(x.origin);
                    edges.insert(x.edge);
                }
            }
        }
    }
    let mut s = ShellEuler { v: verts.len(), e: edges.len(), f: faces.len(), h, genus: 0.0 };
    s.genus = 1.0 - s.chi() as f64 / 2.0;
    s
}

/// Structural and Euler checks. Never fails; every problem becomes a defect.
pub fn validate(m: &BrepModel) -> ValidationReport {
    let mut d = Collector(Vec::new());
    let (nv, ne, nh, nl, nf) = (m.vertices.len(), m.edges.len(), m.halfedges.len(), m.loops.len(), m.faces.len());

    let mut indices_ok = true;
    for (i, he) in m.halfedges.iter().enumerate() {
        if he.origin >= nv || he.twin >= nh || he.loop_id >= nl || he.edge >= ne {
            indices_ok = false;
            d.push(DefectKind::DanglingReference, Location::HalfEdge(i), "index out of range");
        }
    }
    for (i, e) in m.edges.iter().enumerate() {
        if e.vertices.iter().any(|&v| v >= nv) || e.halfedges.iter().any(|&h| h >= nh) {
            indices_ok = false;
            d.push(DefectKind::DanglingReference, Location::Edge(i), "index out of range");
        }
    }
    for (i, l) in m.loops.iter().enumerate() {
        if l.face >= nf || l.halfedges.iter().any(|&h| h >= nh) {
            indices_ok = false;
            d.push(DefectKind::DanglingReference, Location::Loop(i), "index out of range");
        }
    }
    for (i, f) in m.faces.iter().enumerate() {
        if f.outer >= nl || f.inners.iter().any(|&l| l >= nl) {
            indices_ok = false;
            d.push(DefectKind::DanglingReference, Location::Face(i), "index out of range");
        }
    }
    for (i, p) in m.vertices.iter().enumerate() {
        if !p.is_finite() {
            d.push(DefectKind::InvalidGeometry, Location::Vertex(i), "non-finite coordinates");
        }
    }
    if !indices_ok {
        return ValidationReport {
            twin_consistent: false,
            loops_closed: false,
            manifold: false,
            geometry_consistent: false,
            watertight: false,
            shells: Vec::new(),
            defects: d.0,
        };
    }

    // Twins.
    let before = d.0.len();
    for (i, he) in m.halfedges.iter().enumerate() {
        let t = &m.halfedges[he.twin];
        let edge = &m.edges[he.edge];
        if he.twin == i {
            d.push(DefectKind::TwinInconsistent, Location::HalfEdge(i), "twin points to itself");
        } else if t.twin != i {
            d.push(DefectKind::TwinInconsistent, Location::HalfEdge(i), "twin(twin(h)) != h");
        } else if t.edge != he.edge || t.forward == he.forward {
            d.push(DefectKind::TwinInconsistent, Location::HalfEdge(i), "twin lies on another edge or same direction");
        } else {
            let expect = if he.forward { edge.vertices } else { [edge.vertices[1], edge.vertices[0]] };
            if he.origin != expect[0] || t.origin != expect[1] {
                d.push(DefectKind::TwinInconsistent, Location::HalfEdge(i), "origin(twin(h)) != destination(h)");
            }
        }
    }
    let twin_consistent = d.0.len() == before;

    // Edge manifoldness.
    let before = d.0.len();
    let mut uses = vec![0usize; ne];
    for he in &m.halfedges {
        uses[he.edge] += 1;
    }
    for (i, e) in m.edges.iter().enumerate() {
        let listed_ok = e.halfedges.iter().all(|&h| m.halfedges[h].edge == i) && e.halfedges[0] != e.halfedges[1];
        if uses[i] != 2 || !listed_ok {
            d.push(DefectKind::NonManifoldEdge, Location::Edge(i), format!("{} half-edges reference this edge", uses[i]));
        }
    }
    let mut membership = vec![0usize; nh];
    for (li, l) in m.loops.iter().enumerate() {
        for &h in &l.halfedges {
            membership[h] += 1;
            if m.halfedges[h].loop_id != li {
                d.push(DefectKind::LoopMembership, Location::HalfEdge(h), "loop id disagrees with loop listing");
            }
        }
    }
    for (h, &c) in membership.iter().enumerate() {
        if c != 1 {
            d.push(DefectKind::LoopMembership, Location::HalfEdge(h), format!("listed in {c} loops"));
        }
    }
    for l in &m.loops {
        let n = l.halfedges.len();
        for k in 0..n {
            let (a, b) = (l.halfedges[k], l.halfedges[(k + 1) % n]);
            if m.halfedges[a].twin == b {
                d.push(DefectKind::Spur, Location::HalfEdge(a), format!("followed by its twin {b}"));
            }
        }
    }
    let mut used = vec![false; nv];
    for he in &m.halfedges {
        used[he.origin] = true;
    }
    for (v, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
        d.push(DefectKind::IsolatedVertex, Location::Vertex(v), "no incident half-edge");
    }
    let mut loop_faces = vec![0usize; nl];
    for (fi, f) in m.faces.iter().enumerate() {
        if m.loops[f.outer].kind != LoopKind::Outer {
            d.push(DefectKind::FaceLoops, Location::Face(fi), "outer loop is not marked outer");
        }
        for &l in std::iter::once(&f.outer).chain(&f.inners) {
            loop_faces[l] += 1;
            if m.loops[l].face != fi {
                d.push(DefectKind::FaceLoops, Location::Loop(l), "loop face disagrees with face listing");
            }
        }
        for &l in &f.inners {
            if m.loops[l].kind != LoopKind::Inner {
                d.push(DefectKind::FaceLoops, Location::Loop(l), "inner loop is not marked inner");
            }
        }
    }
    for (l, &c) in loop_faces.iter().enumerate() {
        if c != 1 {
            d.push(DefectKind::FaceLoops, Location::Loop(l), format!("listed by {c} faces"));
        }
    }
    let manifold = d.0.len() == before;

    // Loop closure.
    let before = d.0.len();
    for (li, l) in m.loops.iter().enumerate() {
        if l.halfedges.is_empty() {
            d.push(DefectKind::LoopNotClosed, Location::Loop(li), "empty loop");
            continue;
        }
        let n = l.halfedges.len();
        for k in 0..n {
            let (a, b) = (l.halfedges[k], l.halfedges[(k + 1) % n]);
            if m.destination(a) != m.halfedges[b].origin {
                d.push(DefectKind::LoopNotClosed, Location::HalfEdge(a), format!("destination differs from origin of {b}"));
            }
        }
    }
    let loops_closed = d.0.len() == before;

    // Geometry.
    let before = d.0.len();
    for (i, e) in m.edges.iter().enumerate() {
        if let Err(err) = e.curve.check() {
            d.push(DefectKind::InvalidGeometry, Location::Edge(i), err.to_string());
            continue;
        }
        let [a, b] = e.vertices;
        if e.curve.start().dist(m.vertices[a]) > STRUCTURAL_TOL || e.curve.end().dist(m.vertices[b]) > STRUCTURAL_TOL {
            d.push(DefectKind::CurveEndpoint, Location::Edge(i), "curve endpoints do not meet the edge vertices");
        }
    }
    for (i, f) in m.faces.iter().enumerate() {
        if !f.surface.is_finite() {
            d.push(DefectKind::InvalidGeometry, Location::Face(i), "malformed surface");
        }
    }
    let geometry_consistent = d.0.len() == before;

    // Shells and Euler.
    let computed = topo::face_shells(m);
    let stored: BTreeSet<Vec<usize>> = m
        .shells
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect();
    let computed_set: BTreeSet<Vec<usize>> = computed.iter().cloned().collect();
    if stored != computed_set {
        d.push(DefectKind::ShellPartition, Location::Shell(0), "stored shells differ from face connectivity");
    }
    let shells: Vec<ShellEuler> = computed.iter().map(|faces| shell_euler(m, faces)).collect();
    let mut euler_ok = true;
    for (si, s) in shells.iter().enumerate() {
        if !s.is_consistent() {
            euler_ok = false;
            d.push(
                DefectKind::EulerResidual,
                Location::Shell(si),
                format!("V-E+F-H = {} gives genus {}", s.chi(), s.genus),
            );
        }
    }

    let watertight = twin_consistent
        && manifold
        && loops_closed
        && geometry_consistent
        && euler_ok
        && !m.faces.is_empty()
        && !d.0.iter().any(|x| x.kind == DefectKind::ShellPartition);
    ValidationReport { twin_consistent, loops_closed, manifold, geometry_consistent, watertight, shells, defects: d.0 }
}
