use std::cmp::Ordering;

use crate::brep::{connected_components, BrepModel};
use crate::error::{Error, Result};
use crate::geom::Point3;

use super::vocab::COORD_BINS;

pub fn quantize_coord(x: f64) -> Result<u32> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Range { value: x, range: "[0, 1)" });
    }
    Ok(((x * COORD_BINS as f64).floor() as u32).min(COORD_BINS - 1))
}

/// Center of bin `k`.
pub fn dequantize_coord(k: u32) -> f64 {
    (k as f64 + 0.5) / COORD_BINS as f64
}

pub fn quantize_point(p: Point3) -> Result<[u32; 3]> {
    Ok([quantize_coord(p.x)?, quantize_coord(p.y)?, quantize_coord(p.z)?])
}

pub fn dequantize_point(q: [u32; 3]) -> Point3 {
    Point3::new(dequantize_coord(q[0]), dequantize_coord(q[1]), dequantize_coord(q[2]))
}

/// Vertex ordering used by the sequence layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalOrder {
    /// Vertex ids per component, each sorted, components sorted by their first vertex.
    pub components: Vec<Vec<usize>>,
    /// `(component, index within component)` per vertex id.
    pub position: Vec<(usize, usize)>,
}

fn compare(a: (usize, Point3, [u32; 3]), b: (usize, Point3, [u32; 3])) -> Ordering {
    let zyx = |q: [u32; 3]| [q[2], q[1], q[0]];
    zyx(a.2)
        .cmp(&zyx(b.2))
        .then(a.1.z.total_cmp(&b.1.z))
        .then(a.1.y.total_cmp(&b.1.y))
        .then(a.1.x.total_cmp(&b.1.x))
        .then(a.0.cmp(&b.0))
}

/// Sort by quantized `(z, y, x)`, then full precision `(z, y, x)`, then id.
pub fn canonical_order(m: &BrepModel) -> Result<CanonicalOrder> {
    let keys: Vec<(usize, Point3, [u32; 3])> =
        m.vertices.iter().enumerate().map(|(i, &p)| Ok((i, p, quantize_point(p)?))).collect::<Result<_>>()?;
    let mut all: Vec<usize> = (0..m.vertices.len()).collect();
    all.sort_by(|&a, &b| compare(keys[a], keys[b]));
    for w in all.windows(2) {
        if m.vertices[w[0]] == m.vertices[w[1]] {
            return Err(Error::DuplicateVertex(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    let mut components = connected_components(m);
    for c in &mut components {
        c.sort_by(|&a, &b| compare(keys[a], keys[b]));
    }
    components.sort_by(|a, b| compare(keys[a[0]], keys[b[0]]));
    let mut position = vec![(0, 0); m.vertices.len()];
    for (ci, c) in components.iter().enumerate() {
        for (k, &v) in c.iter().enumerate() {
            position[v] = (ci, k);
        }
    }
    Ok(CanonicalOrder { components, position })
}
