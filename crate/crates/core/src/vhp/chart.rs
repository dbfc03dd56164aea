//! Parameter-space view of one face: boundary pcurves, a unit-aspect metric,
//! trimming tests and nearest-pcurve queries.

use crate::brep::BrepModel;
use crate::error::{Error, Result};
use crate::geom::{CurveGeom, SurfaceGeom, SurfaceKind};

/// Image of a half-edge in its face's parameter rectangle, ordered along the half-edge.
#[derive(Debug, Clone, PartialEq)]
pub struct UvPolyline {
    pub halfedge: usize,
    pub points: Vec<[f64; 2]>,
}

/// Relative slack (of the domain size) allowed for pcurves on the domain border.
const DOMAIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FaceChart {
    pub face: usize,
    pub surface: SurfaceGeom,
    pub same_sense: bool,
    /// Metric scale per parameter: arclength per unit parameter through the domain center.
    pub scale: [f64; 2],
    /// Sorted by half-edge id.
    pub pcurves: Vec<UvPolyline>,
    /// Same pcurves in metric coordinates.
    metric: Vec<Vec<[f64; 2]>>,
}

fn iso_scales(s: &SurfaceGeom) -> [f64; 2] {
    let d = s.domain;
    let c = d.center();
    let scales = match &s.kind {
        SurfaceKind::Plane { u_vec, v_vec, .. } => [u_vec.norm(), v_vec.norm()],
        SurfaceKind::Cylinder { axis, radius, .. } => [*radius, axis.norm()],
        SurfaceKind::Sphere { radius, .. } => [radius * c[1].cos(), *radius],
        SurfaceKind::Bicubic { .. } => {
            // Chord sums with one Richardson step.
            let along = |n: usize, f: &dyn Fn(f64) -> [f64; 2]| -> f64 {
                (0..n)
                    .map(|k| {
                        let (a, b) = (f(k as f64 / n as f64), f((k + 1) as f64 / n as f64));
                        s.eval(a[0], a[1]).dist(s.eval(b[0], b[1]))
                    })
                    .sum()
            };
            let arc = |f: &dyn Fn(f64) -> [f64; 2]| (4.0 * along(128, f) - along(64, f)) / 3.0;
            let lu = arc(&|t| [d.u0 + t * (d.u1 - d.u0), c[1]]);
            let lv = arc(&|t| [c[0], d.v0 + t * (d.v1 - d.v0)]);
            [lu / (d.u1 - d.u0), lv / (d.v1 - d.v0)]
        }
    };
    scales.map(|l| if l.is_finite() && l > 1e-12 { l } else { 1.0 })
}

fn point_segment_dist_sq(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (ex, ey) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
    ex * ex + ey * ey
}

impl FaceChart {
    pub fn new(m: &BrepModel, face: usize, samples_per_halfedge: usize) -> Result<Self> {
        let f = m.faces.get(face).ok_or_else(|| Error::Topology(format!("no face {face}")))?;
        let surface = f.surface.clone();
        let scale = iso_scales(&surface);
        let mut chart = FaceChart { face, surface, same_sense: f.same_sense, scale, pcurves: Vec::new(), metric: Vec::new() };
        let mut hs: Vec<usize> =
            std::iter::once(f.outer).chain(f.inners.iter().copied()).flat_map(|l| m.loops[l].halfedges.iter().copied()).collect();
        hs.sort_unstable();
        for h in hs {
            let pl = chart.compute_pcurve(m, h, samples_per_halfedge)?;
            chart.metric.push(pl.points.iter().map(|&uv| chart.to_metric(uv)).collect());
            chart.pcurves.push(pl);
        }
        Ok(chart)
    }

    pub fn to_metric(&self, uv: [f64; 2]) -> [f64; 2] {
        [uv[0] * self.scale[0], uv[1] * self.scale[1]]
    }

    pub fn from_metric(&self, q: [f64; 2]) -> [f64; 2] {
        [q[0] / self.scale[0], q[1] / self.scale[1]]
    }

    /// +1 when the face interior lies to the left of a pcurve's direction.
    pub fn interior_side(&self) -> f64 {
        if self.same_sense {
            1.0
        } else {
            -1.0
        }
    }

    fn tol(&self) -> f64 {
        let d = self.surface.domain;
        DOMAIN_TOL * ((d.u1 - d.u0) + (d.v1 - d.v0))
    }

    fn compute_pcurve(&self, m: &BrepModel, h: usize, samples: usize) -> Result<UvPolyline> {
        let edge = &m.edges[m.halfedges[h].edge];
        let straight = matches!(edge.curve, CurveGeom::Line { .. }) && matches!(self.surface.kind, SurfaceKind::Plane { .. });
        let n = if straight { 2 } else { samples.max(2) };
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(n);
        for k in 0..n {
            let p = m.halfedge_point(h, k as f64 / (n - 1) as f64);
            let mut uv = self.surface.invert(p);
            if let (Some(period), Some(prev)) = (self.surface.u_period(), pts.last()) {
                uv[0] += ((prev[0] - uv[0]) / period).round() * period;
            }
            pts.push(uv);
        }
        let dom = self.surface.domain;
        let tol = self.tol();
        let fits = |pts: &[[f64; 2]]| pts.iter().all(|&uv| dom.contains(uv, tol));
        if let Some(period) = self.surface.u_period() {
            let candidates: Vec<Vec<[f64; 2]>> = (-2..=2)
                .map(|k| pts.iter().map(|uv| [uv[0] + k as f64 * period, uv[1]]).collect::<Vec<_>>())
                .filter(|c| fits(c))
                .collect();
            pts = match candidates.len() {
                0 => return Err(self.leaves_domain(h)),
                1 => candidates.into_iter().next().unwrap(),
                // A seam: take the copy whose interior side points into the domain.
                _ => candidates
                    .into_iter()
                    .max_by(|a, b| self.inward_margin(a).total_cmp(&self.inward_margin(b)))
                    .unwrap(),
            };
        } else if !fits(&pts) {
            return Err(self.leaves_domain(h));
        }
        Ok(UvPolyline { halfedge: h, points: pts })
    }

    fn leaves_domain(&self, h: usize) -> Error {
        Error::InvalidGeometry(format!("half-edge {h} leaves the parameter domain of face {}", self.face))
    }

    /// Signed distance from the domain border of a point nudged toward the interior side.
    fn inward_margin(&self, pts: &[[f64; 2]]) -> f64 {
        let mid = pts.len() / 2;
        let (a, b) = (pts[mid.saturating_sub(1)], pts[(mid + 1).min(pts.len() - 1)]);
        let (du, dv) = (b[0] - a[0], b[1] - a[1]);
        let s = self.interior_side();
        let len = (du * du + dv * dv).sqrt().max(1e-300);
        let step = 1e-3 * ((self.surface.domain.u1 - self.surface.domain.u0) + (self.surface.domain.v1 - self.surface.domain.v0));
        let base = pts[mid];
        let p = [base[0] - s * dv / len * step, base[1] + s * du / len * step];
        let d = self.surface.domain;
        (p[0] - d.u0).min(d.u1 - p[0]).min(p[1] - d.v0).min(d.v1 - p[1])
    }

    /// Even-odd containment in the trimmed region (domain rectangle included).
    pub fn inside(&self, uv: [f64; 2]) -> bool {
        if !self.surface.domain.contains(uv, 0.0) {
            return false;
        }
        let mut crossings = 0usize;
        for pl in &self.pcurves {
            for w in pl.points.windows(2) {
                let (a, b) = (w[0], w[1]);
                if (a[1] > uv[1]) != (b[1] > uv[1]) {
                    let x = a[0] + (uv[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                    if uv[0] < x {
                        crossings += 1;
                    }
                }
            }
        }
        crossings % 2 == 1
    }

    /// Nearest pcurve in the metric, `(half-edge, distance)`; ties go to the smaller id.
    pub fn nearest(&self, uv: [f64; 2]) -> (usize, f64) {
        let q = self.to_metric(uv);
        let mut best = (usize::MAX, f64::INFINITY);
        for (pl, metric) in self.pcurves.iter().zip(&self.metric) {
            let d = metric.windows(2).map(|w| point_segment_dist_sq(q, w[0], w[1])).fold(f64::INFINITY, f64::min);
            if d < best.1 {
                best = (pl.halfedge, d);
            }
        }
        (best.0, best.1.sqrt())
    }

    /// Metric distances from `uv` to every pcurve, in pcurve order.
    pub fn distances(&self, uv: [f64; 2]) -> Vec<(usize, f64)> {
        let q = self.to_metric(uv);
        self.pcurves
            .iter()
            .zip(&self.metric)
            .map(|(pl, metric)| {
                let d = metric.windows(2).map(|w| point_segment_dist_sq(q, w[0], w[1])).fold(f64::INFINITY, f64::min);
                (pl.halfedge, d.sqrt())
            })
            .collect()
    }

    pub fn pcurve(&self, h: usize) -> Option<&UvPolyline> {
        self.pcurves.iter().find(|p| p.halfedge == h)
    }
}
