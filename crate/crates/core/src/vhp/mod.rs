//! Voronoi half-patch extraction: curve samples, surface samples inside each
//! half-edge's parametric Voronoi cell, next-pointer samples and loop labels.

mod chart;

pub use chart::{FaceChart, UvPolyline};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brep::{validate, BrepModel, LoopKind};
use crate::error::{Error, Result};
use crate::geom::{Point3, UvRect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Interior curve samples per half-edge.
    pub n_curve: usize,
    /// Samples per row of a half-patch, the on-curve point included.
    pub n_surface: usize,
    /// Samples taken from the successor half-edge.
    pub n_next: usize,
    pub uv_grid: usize,
    /// Pcurve resolution for curved boundaries.
    pub pcurve_samples: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { n_curve: 6, n_surface: 4, n_next: 4, uv_grid: 64, pcurve_samples: 17 }
    }
}

impl SamplingConfig {
    pub fn check(&self) -> Result<()> {
        if self.n_curve == 0 || self.n_surface == 0 {
            return Err(Error::Precondition("n_curve and n_surface must be at least 1".into()));
        }
        if self.n_next == 0 || self.n_next > self.n_curve {
            return Err(Error::Precondition(format!("n_next must lie in 1..={}", self.n_curve)));
        }
        if self.uv_grid == 0 || self.pcurve_samples < 2 {
            return Err(Error::Precondition("uv_grid must be positive and pcurve_samples at least 2".into()));
        }
        Ok(())
    }

    /// Scalars per descriptor: half-patch, next samples, label.
    pub fn descriptor_len(&self) -> usize {
        (self.n_curve * self.n_surface + self.n_next) * 3 + 1
    }
}

/// `n_curve` rows of `n_surface` points; column 0 is on the curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfPatch {
    pub rows: Vec<Vec<Point3>>,
    /// Set when some row had a walk of zero length.
    pub collapsed: bool,
}

impl HalfPatch {
    pub fn curve_points(&self) -> Vec<Point3> {
        self.rows.iter().map(|r| r[0]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VhpRecord {
    pub halfedge: usize,
    pub half_patch: HalfPatch,
    pub next_samples: Vec<Point3>,
    pub label: LoopKind,
}

impl VhpRecord {
    pub fn label_value(&self) -> f64 {
        match self.label {
            LoopKind::Outer => 1.0,
            LoopKind::Inner => 0.0,
        }
    }

    /// Flat vector: half-patch rows, next samples, label.
    pub fn descriptor(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.half_patch.rows.iter().flatten().flat_map(|p| p.to_array()).collect();
        d.extend(self.next_samples.iter().flat_map(|p| p.to_array()));
        d.push(self.label_value());
        d
    }

    /// Inverse of [`VhpRecord::descriptor`]; the label is thresholded at 0.5.
    pub fn from_descriptor(halfedge: usize, d: &[f64], cfg: &SamplingConfig) -> Result<Self> {
        let expected = cfg.descriptor_len();
        if d.len() != expected {
            return Err(Error::DescriptorLength { got: d.len(), expected });
        }
        let pt = |i: usize| Point3::new(d[3 * i], d[3 * i + 1], d[3 * i + 2]);
        let rows = (0..cfg.n_curve).map(|r| (0..cfg.n_surface).map(|s| pt(r * cfg.n_surface + s)).collect()).collect();
        let base = cfg.n_curve * cfg.n_surface;
        let next_samples = (0..cfg.n_next).map(|k| pt(base + k)).collect();
        let label = if d[expected - 1] >= 0.5 { LoopKind::Outer } else { LoopKind::Inner };
        Ok(VhpRecord { halfedge, half_patch: HalfPatch { rows, collapsed: false }, next_samples, label })
    }
}

/// Half-edge label per cell of a regular grid over a face's domain; `None` outside the trim.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCellMap {
    pub face: usize,
    pub resolution: usize,
    pub domain: UvRect,
    /// Row-major, `labels[j * resolution + i]` for the cell centered at `(i + ½, j + ½) / resolution`.
    pub labels: Vec<Option<usize>>,
}

impl VoronoiCellMap {
    pub fn cell_uv(&self, i: usize, j: usize) -> [f64; 2] {
        let r = self.resolution as f64;
        self.domain.lerp((i as f64 + 0.5) / r, (j as f64 + 0.5) / r)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        self.labels[j * self.resolution + i]
    }
}

pub fn boundary_pcurves(m: &BrepModel, face: usize, samples_per_halfedge: usize) -> Result<Vec<UvPolyline>> {
    Ok(FaceChart::new(m, face, samples_per_halfedge)?.pcurves)
}

pub fn voronoi_assign(m: &BrepModel, face: usize, cfg: &SamplingConfig) -> Result<VoronoiCellMap> {
    cfg.check()?;
    let chart = FaceChart::new(m, face, cfg.pcurve_samples)?;
    Ok(cell_map(&chart, cfg.uv_grid))
}

pub(crate) fn cell_map(chart: &FaceChart, res: usize) -> VoronoiCellMap {
    let mut map = VoronoiCellMap { face: chart.face, resolution: res, domain: chart.surface.domain, labels: vec![None; res * res] };
    map.labels = (0..res * res)
        .into_par_iter()
        .map(|k| {
            let uv = map.cell_uv(k % res, k / res);
            chart.inside(uv).then(|| chart.nearest(uv).0)
        })
        .collect();
    map
}

/// Coarse steps of the outward march before bisection.
const MARCH_STEPS: usize = 48;
const BISECT_STEPS: usize = 48;
const ZERO_WALK: f64 = 1e-6;

/// Parameters of a half-edge's point at `t`, on the same seam branch as its pcurve.
fn uv_on_branch(chart: &FaceChart, pl: &UvPolyline, p: Point3, t: f64) -> [f64; 2] {
    let mut uv = chart.surface.invert(p);
    if let Some(period) = chart.surface.u_period() {
        let n = pl.points.len() - 1;
        let x = t * n as f64;
        let k = (x.floor() as usize).min(n - 1);
        let f = x - k as f64;
        let u_ref = pl.points[k][0] * (1.0 - f) + pl.points[k + 1][0] * f;
        uv[0] += ((u_ref - uv[0]) / period).round() * period;
    }
    chart.surface.domain.clamp(uv)
}

fn sample_with_chart(m: &BrepModel, chart: &FaceChart, h: usize, cfg: &SamplingConfig) -> Result<HalfPatch> {
    let pl = chart.pcurve(h).ok_or_else(|| Error::Topology(format!("half-edge {h} does not bound face {}", chart.face)))?;
    let curve_pts = m.sample_halfedge(h, cfg.n_curve)?;
    let nc = cfg.n_curve;
    let d = chart.surface.domain;
    let reach = chart.to_metric([d.u1 - d.u0, d.v1 - d.v0]);
    let max_walk = (reach[0] * reach[0] + reach[1] * reach[1]).sqrt();
    let mut collapsed = false;
    let mut rows = Vec::with_capacity(nc);
    for (k, &p) in curve_pts.iter().enumerate() {
        let t = (k + 1) as f64 / (nc + 1) as f64;
        let uv0 = uv_on_branch(chart, pl, p, t);
        let (su, sv) = chart.surface.partials(uv0[0], uv0[1]);
        let tan = m.halfedge_tangent(h, t);
        // Least-squares UV direction of the 3D tangent.
        let (a, b, c) = (su.dot(su), su.dot(sv), sv.dot(sv));
        let (r1, r2) = (tan.dot(su), tan.dot(sv));
        let det = a * c - b * b;
        let (du, dv) = ((r1 * c - r2 * b) / det, (a * r2 - b * r1) / det);
        let dm = chart.to_metric([du, dv]);
        let len = (dm[0] * dm[0] + dm[1] * dm[1]).sqrt();
        let side = chart.interior_side();
        let q0 = chart.to_metric(uv0);
        let mut walk = 0.0;
        if len.is_finite() && len > 0.0 {
            let n = [-side * dm[1] / len, side * dm[0] / len];
            let at = |s: f64| chart.from_metric([q0[0] + n[0] * s, q0[1] + n[1] * s]);
            let valid = |s: f64| {
                let uv = at(s);
                chart.inside(uv) && chart.nearest(uv).0 == h
            };
            let step = max_walk / MARCH_STEPS as f64;
            let (mut lo, mut hi) = (0.0, None);
            for i in 1..=MARCH_STEPS {
                let s = step * i as f64;
                if valid(s) {
                    lo = s;
                } else {
                    hi = Some(s);
                    break;
                }
            }
            walk = match hi {
                None => lo,
                Some(mut hi) => {
                    for _ in 0..BISECT_STEPS {
                        let mid = 0.5 * (lo + hi);
                        if valid(mid) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    lo
                }
            };
            let mut row = vec![p];
            for s in 1..cfg.n_surface {
                let uv = d.clamp(at(walk * s as f64 / (cfg.n_surface - 1) as f64));
                row.push(if walk < ZERO_WALK { p } else { chart.surface.eval(uv[0], uv[1]) });
            }
            rows.push(row);
        } else {
            rows.push(vec![p; cfg.n_surface]);
        }
        if walk < ZERO_WALK && cfg.n_surface > 1 {
            collapsed = true;
        }
    }
    if collapsed {
        log::warn!("half-edge {h}: zero-depth Voronoi cell, samples collapsed onto the curve");
    }
    Ok(HalfPatch { rows, collapsed })
}

pub fn sample_half_patch(m: &BrepModel, h: usize, cfg: &SamplingConfig) -> Result<HalfPatch> {
    cfg.check()?;
    check_halfedge(m, h)?;
    let chart = FaceChart::new(m, m.face_of(h), cfg.pcurve_samples)?;
    sample_with_chart(m, &chart, h, cfg)
}

/// First `n_next` interior samples of the successor, ordered away from the shared vertex.
pub fn sample_next_pointers(m: &BrepModel, h: usize, cfg: &SamplingConfig) -> Result<Vec<Point3>> {
    cfg.check()?;
    check_halfedge(m, h)?;
    let mut s = m.sample_halfedge(m.next(h), cfg.n_curve)?;
    s.truncate(cfg.n_next);
    Ok(s)
}

fn check_halfedge(m: &BrepModel, h: usize) -> Result<()> {
    if h >= m.halfedges.len() {
        return Err(Error::Topology(format!("no half-edge {h}")));
    }
    Ok(())
}

/// One record per half-edge, indexed by half-edge id.
pub fn extract_vhp(m: &BrepModel, cfg: &SamplingConfig) -> Result<Vec<VhpRecord>> {
    cfg.check()?;
    let report = validate(m);
    if !(report.twin_consistent && report.loops_closed && report.manifold) {
        return Err(Error::Topology(format!("model is not topologically consistent: {:?}", report.defects.first())));
    }
    let charts: Vec<FaceChart> =
        (0..m.faces.len()).into_par_iter().map(|f| FaceChart::new(m, f, cfg.pcurve_samples)).collect::<Result<_>>()?;
    let next = m.next_map();
    (0..m.halfedges.len())
        .into_par_iter()
        .map(|h| {
            let wrap = |e: Error| Error::Sampling { halfedge: h, source: Box::new(e) };
            let half_patch = sample_with_chart(m, &charts[m.face_of(h)], h, cfg).map_err(wrap)?;
            let mut next_samples = m.sample_halfedge(next[h], cfg.n_curve).map_err(wrap)?;
            next_samples.truncate(cfg.n_next);
            let label = m.loops[m.halfedges[h].loop_id].kind;
            Ok(VhpRecord { halfedge: h, half_patch, next_samples, label })
        })
        .collect()
}

#[cfg(test)]
mod tests;
