//! Records back to a solid: twin averaging, per-vertex successor assignment,
//! loop tracing, face fitting and inner-loop attachment.

mod assign;
mod drafts;
mod faces;

pub use assign::{hungarian, solve_assignment, Assignment, AssignmentProblem};
pub use drafts::{global_vertices, materialize_half_edges, HalfEdgeDraft};
pub use faces::{attach_inner_loops, fit_face, mean_distance, newell_normal, FaceFit, FitKind, BOUNDARY_WEIGHT, PLANE_TOL};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brep::{face_shells, validate, BrepModel, Edge, Face, HalfEdge, Loop, LoopKind, ValidationReport};
use crate::codec::VertexRecordSet;
use crate::geom::{CurveGeom, Point3};

/// Mean per-sample distance above which a chosen successor is flagged.
pub const ELEVATED_COST: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopDraft {
    pub halfedges: Vec<usize>,
    pub outer_votes: usize,
    pub inner_votes: usize,
    pub kind: LoopKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub total_cost: f64,
    pub infeasible_vertices: Vec<usize>,
    pub elevated_cost_vertices: Vec<usize>,
    pub loop_count: usize,
    pub faces_built: usize,
    pub inner_loops_attached: usize,
    /// Faces whose bicubic fit was under-determined.
    pub fallback_faces: Vec<usize>,
    pub validation: Option<ValidationReport>,
    /// True iff the result is watertight.
    pub success: bool,
    pub errors: Vec<String>,
}

impl ReconstructionReport {
    fn empty() -> Self {
        ReconstructionReport {
            total_cost: 0.0,
            infeasible_vertices: Vec::new(),
            elevated_cost_vertices: Vec::new(),
            loop_count: 0,
            faces_built: 0,
            inner_loops_attached: 0,
            fallback_faces: Vec::new(),
            validation: None,
            success: false,
            errors: Vec::new(),
        }
    }
}

/// Sum of distances between `next` and the first samples of `curve`, aligned by rank.
pub fn successor_cost(next: &[Point3], curve: &[Point3]) -> f64 {
    next.iter().zip(curve).map(|(a, b)| a.dist(*b)).sum()
}

/// One assignment problem per vertex that has incident drafts, ordered by vertex.
pub fn assignment_problems(drafts: &[HalfEdgeDraft], vertex_count: usize) -> Vec<AssignmentProblem> {
    let mut incoming = vec![Vec::new(); vertex_count];
    let mut outgoing = vec![Vec::new(); vertex_count];
    for d in drafts {
        incoming[d.destination].push(d.id);
        outgoing[d.origin].push(d.id);
    }
    (0..vertex_count)
        .filter(|&v| !incoming[v].is_empty())
        .map(|v| {
            let (ins, outs) = (&incoming[v], &outgoing[v]);
            let cost = ins
                .iter()
                .map(|&i| outs.iter().map(|&j| successor_cost(&drafts[i].next, &drafts[j].curve)).collect())
                .collect();
            let mut forbidden = Vec::new();
            for (a, &i) in ins.iter().enumerate() {
                for (b, &j) in outs.iter().enumerate() {
                    if j == drafts[i].twin() {
                        forbidden.push((a, b));
                    }
                }
            }
            AssignmentProblem { vertex: v, incoming: ins.clone(), outgoing: outs.clone(), cost, forbidden }
        })
        .collect()
}

/// Successor of every draft, plus the solved problems.
pub fn assign_next(drafts: &[HalfEdgeDraft], vertex_count: usize) -> (Vec<usize>, Vec<(AssignmentProblem, Assignment)>) {
    let solved: Vec<(AssignmentProblem, Assignment)> = assignment_problems(drafts, vertex_count)
        .into_par_iter()
        .map(|p| {
            let a = solve_assignment(&p);
            (p, a)
        })
        .collect();
    let mut next = vec![usize::MAX; drafts.len()];
    for (p, a) in &solved {
        for (i, &j) in a.perm.iter().enumerate() {
            next[p.incoming[i]] = p.outgoing[j];
        }
    }
    (next, solved)
}

/// Orbits of a bijective successor map, each starting at its smallest member.
pub fn trace_loops(next: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; next.len()];
    let mut loops = Vec::new();
    for start in 0..next.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut h = start;
        while !seen[h] {
            seen[h] = true;
            cycle.push(h);
            h = next[h];
        }
        loops.push(cycle);
    }
    loops
}

/// Majority vote of member labels; ties go to outer.
pub fn classify_loop(labels: &[LoopKind]) -> LoopKind {
    let inner = labels.iter().filter(|&&k| k == LoopKind::Inner).count();
    if 2 * inner > labels.len() {
        LoopKind::Inner
    } else {
        LoopKind::Outer
    }
}

pub fn classify_loops(loops: Vec<Vec<usize>>, drafts: &[HalfEdgeDraft]) -> Vec<LoopDraft> {
    loops
        .into_iter()
        .map(|halfedges| {
            let labels: Vec<LoopKind> = halfedges.iter().map(|&h| drafts[h].label).collect();
            let inner_votes = labels.iter().filter(|&&k| k == LoopKind::Inner).count();
            LoopDraft { outer_votes: labels.len() - inner_votes, inner_votes, kind: classify_loop(&labels), halfedges }
        })
        .collect()
}

fn loop_boundary(lp: &LoopDraft, drafts: &[HalfEdgeDraft]) -> Vec<Point3> {
    lp.halfedges.iter().flat_map(|&h| std::iter::once(drafts[h].endpoints[0]).chain(drafts[h].curve.iter().copied())).collect()
}

/// Never fails: problems end up in the report and the model may be partial.
pub fn reconstruct(records: &VertexRecordSet) -> (BrepModel, ReconstructionReport) {
    let mut report = ReconstructionReport::empty();
    let vertices = global_vertices(records);
    let drafts = match materialize_half_edges(records) {
        Ok(d) => d,
        Err(e) => {
            report.errors.push(format!("materialize: {e}"));
            let m = BrepModel { vertices, ..BrepModel::default() };
            report.validation = Some(validate(&m));
            return (m, report);
        }
    };

    let (next, solved) = assign_next(&drafts, vertices.len());
    let n_next = records.sampling.n_next.max(1) as f64;
    for (p, a) in &solved {
        report.total_cost += a.cost;
        if a.infeasible {
            report.infeasible_vertices.push(p.vertex);
            report.errors.push(format!("vertex {}: no successor assignment avoids a twin; twin used", p.vertex));
        }
        let worst = a.perm.iter().enumerate().map(|(i, &j)| p.cost[i][j] / n_next).fold(0.0, f64::max);
        if worst > ELEVATED_COST {
            report.elevated_cost_vertices.push(p.vertex);
        }
    }
    let mut used = vec![false; vertices.len()];
    for d in &drafts {
        used[d.origin] = true;
    }
    if let Some(v) = used.iter().position(|&u| !u) {
        report.errors.push(format!("vertex {v} has no incident edges"));
    }

    let mut loops = classify_loops(trace_loops(&next), &drafts);
    report.loop_count = loops.len();

    let fits: Vec<Option<FaceFit>> = loops
        .par_iter()
        .map(|lp| {
            if lp.kind != LoopKind::Outer {
                return None;
            }
            let boundary = loop_boundary(lp, &drafts);
            let interior: Vec<Point3> = lp.halfedges.iter().flat_map(|&h| drafts[h].surface_points()).collect();
            fit_face(&boundary, &interior, newell_normal(&boundary)).ok()
        })
        .collect();
    let mut outer_loops: Vec<usize> = Vec::new();
    let mut faces: Vec<Face> = Vec::new();
    for (li, fit) in fits.into_iter().enumerate() {
        if loops[li].kind != LoopKind::Outer {
            continue;
        }
        let fit = fit.unwrap_or_else(|| {
            report.errors.push(format!("loop {li}: face fit failed, degenerate plane used"));
            let b = loop_boundary(&loops[li], &drafts);
            fit_face(&[b[0], b[0] + Point3::new(1e-9, 0.0, 0.0), b[0] + Point3::new(0.0, 1e-9, 0.0)], &[], newell_normal(&b))
                .expect("three points always fit")
        });
        if fit.fallback {
            report.fallback_faces.push(faces.len());
        }
        outer_loops.push(li);
        faces.push(Face { surface: fit.surface, same_sense: true, outer: li, inners: Vec::new() });
    }
    let mut face_of_loop = vec![usize::MAX; loops.len()];
    for (fi, &li) in outer_loops.iter().enumerate() {
        face_of_loop[li] = fi;
    }

    let inner_ids: Vec<usize> = (0..loops.len()).filter(|&l| loops[l].kind == LoopKind::Inner).collect();
    let inner_pts: Vec<Vec<Point3>> =
        inner_ids.iter().map(|&l| loops[l].halfedges.iter().flat_map(|&h| drafts[h].curve.iter().copied()).collect()).collect();
    let surfaces: Vec<_> = faces.iter().map(|f| f.surface.clone()).collect();
    match attach_inner_loops(&inner_pts, &surfaces) {
        Ok(target) => {
            for (&l, &f) in inner_ids.iter().zip(&target) {
                faces[f].inners.push(l);
                face_of_loop[l] = f;
            }
            report.inner_loops_attached = inner_ids.len();
        }
        Err(e) => {
            report.errors.push(format!("{e}; inner loops filled as outer faces"));
            for &l in &inner_ids {
                loops[l].kind = LoopKind::Outer;
                let b = loop_boundary(&loops[l], &drafts);
                let interior: Vec<Point3> = loops[l].halfedges.iter().flat_map(|&h| drafts[h].surface_points()).collect();
                let fit = fit_face(&b, &interior, newell_normal(&b)).expect("loop has points");
                face_of_loop[l] = faces.len();
                faces.push(Face { surface: fit.surface, same_sense: true, outer: l, inners: Vec::new() });
            }
        }
    }
    report.faces_built = faces.len();

    let mut loop_of = vec![0; drafts.len()];
    for (li, lp) in loops.iter().enumerate() {
        for &h in &lp.halfedges {
            loop_of[h] = li;
        }
    }
    let edges = drafts
        .chunks(2)
        .enumerate()
        .map(|(e, pair)| Edge {
            curve: CurveGeom::Polyline { points: pair[0].polyline() },
            vertices: [pair[0].origin, pair[0].destination],
            halfedges: [2 * e, 2 * e + 1],
        })
        .collect();
    let halfedges = drafts
        .iter()
        .map(|d| HalfEdge { origin: d.origin, twin: d.twin(), loop_id: loop_of[d.id], edge: d.edge, forward: d.id % 2 == 0 })
        .collect();
    let model_loops = loops
        .iter()
        .enumerate()
        .map(|(li, lp)| Loop { halfedges: lp.halfedges.clone(), kind: lp.kind, face: face_of_loop[li] })
        .collect();
    let mut m = BrepModel { vertices, edges, halfedges, loops: model_loops, faces, shells: Vec::new() };
    m.shells = face_shells(&m);

    let v = validate(&m);
    report.success = v.watertight;
    report.validation = Some(v);
    (m, report)
}
