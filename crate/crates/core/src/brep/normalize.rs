use crate::error::{Error, Result};
use crate::geom::{Aabb, Point3, Similarity};

use super::BrepModel;

/// Gap kept below 1 on the longest axis: half a 7-bit quantization bin.
pub const NORMALIZE_MARGIN: f64 = 1.0 / 256.0;

/// Bounding box of vertices and densely sampled curves.
pub fn bounding_box(m: &BrepModel) -> Option<Aabb> {
    let curve_pts = m.edges.iter().flat_map(|e| (0..=256).map(move |k| e.curve.eval(k as f64 / 256.0)));
    Aabb::from_points(m.vertices.iter().copied().chain(curve_pts))
}

pub fn transform_model(m: &BrepModel, t: &Similarity) -> BrepModel {
    let mut out = m.clone();
    for v in &mut out.vertices {
        *v = t.apply(*v);
    }
    for e in &mut out.edges {
        e.curve = e.curve.transformed(t);
    }
    for f in &mut out.faces {
        f.surface = f.surface.transformed(t);
    }
    out
}

/// Uniformly scale and translate so the longest side spans `[0, 1 - ε]` and the
/// other axes are centered on `0.5`.
pub fn normalize(m: &BrepModel) -> Result<(BrepModel, Similarity)> {
    let bb = bounding_box(m).ok_or_else(|| Error::InvalidGeometry("empty model".into()))?;
    let ext = bb.extent();
    let (axis, longest) = (0..3).map(|i| (i, ext.axis(i))).fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    if !(longest > 0.0) || !longest.is_finite() {
        return Err(Error::InvalidGeometry("zero-extent bounding box".into()));
    }
    let scale = (1.0 - NORMALIZE_MARGIN) / longest;
    let c = bb.center();
    let off = |i: usize| if i == axis { -bb.min.axis(i) * scale } else { 0.5 - c.axis(i) * scale };
    let t = Similarity { offset: Point3::new(off(0), off(1), off(2)), scale };
    Ok((transform_model(m, &t), t))
}
