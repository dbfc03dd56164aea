use serde::{Deserialize, Serialize};

use crate::brep::BrepModel;
use crate::error::Result;
use crate::geom::{CurveGeom, Point3};

pub const CURVE_SAMPLES: usize = 100;
/// Segments of the chordal mesh reported alongside.
pub const CHORDAL_SEGMENTS: usize = 32;
pub const PROBES: usize = 1000;

/// Deviation of a discretized curve from its analytic geometry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    /// Mean over curves of the mean probe deviation.
    pub mean: f64,
    /// Largest probe deviation over all curves.
    pub max: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveErrorReport {
    pub samples_per_curve: usize,
    pub curves: usize,
    pub sampled: Deviation,
    /// Same curves as a 32-segment chordal mesh.
    pub chordal: Deviation,
}

/// Distance from `p` to the curve restricted to `[lo, hi]` (golden-section search).
fn distance_near(c: &CurveGeom, p: Point3, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let f = |u: f64| c.eval(u).dist_sq(p);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    [f(lo), f(hi), f1, f2].into_iter().fold(f64::INFINITY, f64::min).sqrt()
}

/// Probe deviations of the chord interpolant through `n` uniform parameter samples
/// (endpoints included). Lines and polylines are discretized at their own
/// vertices, where the interpolant is the curve itself.
pub fn chord_deviation(c: &CurveGeom, n: usize) -> Deviation {
    if matches!(c, CurveGeom::Line { .. } | CurveGeom::Polyline { .. }) {
        return Deviation::default();
    }
    let params: Vec<f64> = (0..n.max(2)).map(|k| k as f64 / (n.max(2) - 1) as f64).collect();
    let pts: Vec<Point3> = params.iter().map(|&u| c.eval(u)).collect();
    let segs = params.len() - 1;
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for k in 0..PROBES {
        let s = (k as f64 + 0.5) / PROBES as f64 * segs as f64;
        let i = (s.floor() as usize).min(segs - 1);
        let q = pts[i].lerp(pts[i + 1], s - i as f64);
        let d = distance_near(c, q, params[i], params[i + 1]);
        sum += d;
        max = max.max(d);
    }
    Deviation { mean: sum / PROBES as f64, max }
}

fn summarize(devs: &[Deviation]) -> Deviation {
    if devs.is_empty() {
        return Deviation::default();
    }
    Deviation {
        mean: devs.iter().map(|d| d.mean).sum::<f64>() / devs.len() as f64,
        max: devs.iter().map(|d| d.max).fold(0.0, f64::max),
    }
}

pub fn curve_error(m: &BrepModel, samples_per_curve: usize) -> Result<CurveErrorReport> {
    for e in &m.edges {
        e.curve.check()?;
    }
    let sampled: Vec<Deviation> = m.edges.iter().map(|e| chord_deviation(&e.curve, samples_per_curve)).collect();
    let chordal: Vec<Deviation> = m.edges.iter().map(|e| chord_deviation(&e.curve, CHORDAL_SEGMENTS + 1)).collect();
    Ok(CurveErrorReport {
        samples_per_curve,
        curves: m.edges.len(),
        sampled: summarize(&sampled),
        chordal: summarize(&chordal),
    })
}
