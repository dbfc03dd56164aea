use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brep::BrepModel;
use crate::error::{Error, Result};
use crate::geom::{Point3, Vec3};
use crate::vhp::FaceChart;

/// Points per cloud for distribution metrics.
pub const CLOUD_SIZE: usize = 2000;
/// UV cells per side used to estimate face areas.
pub const AREA_GRID: usize = 64;
const TRIM_TRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub normals: Option<Vec<Vec3>>,
    pub source: Option<String>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        PointCloud { points, normals: None, source: None }
    }
}

/// Trimmed UV grid of one face with per-cell areas.
struct FaceGrid {
    face: usize,
    chart: Option<FaceChart>,
    /// `(i, j, area)` of cells whose center lies inside the face.
    cells: Vec<(usize, usize, f64)>,
    area: f64,
}

fn face_grid(m: &BrepModel, face: usize) -> FaceGrid {
    let chart = match FaceChart::new(m, face, 32) {
        Ok(c) => Some(c),
        Err(e) => {
            log::warn!("face {face}: sampling the untrimmed domain ({e})");
            None
        }
    };
    let s = &m.faces[face].surface;
    let d = s.domain;
    let (du, dv) = ((d.u1 - d.u0) / AREA_GRID as f64, (d.v1 - d.v0) / AREA_GRID as f64);
    let mut cells = Vec::new();
    for i in 0..AREA_GRID {
        for j in 0..AREA_GRID {
            let uv = [d.u0 + (i as f64 + 0.5) * du, d.v0 + (j as f64 + 0.5) * dv];
            if chart.as_ref().is_some_and(|c| !c.inside(uv)) {
                continue;
            }
            let (su, sv) = s.partials(uv[0], uv[1]);
            let a = su.cross(sv).norm() * du * dv;
            if a.is_finite() && a > 0.0 {
                cells.push((i, j, a));
            }
        }
    }
    let area = cells.iter().map(|c| c.2).sum();
    FaceGrid { face, chart, cells, area }
}

/// Index of the first cumulative weight exceeding `x`.
fn pick(cumulative: &[f64], x: f64) -> usize {
    cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1)
}

/// Area-weighted uniform samples over the trimmed faces, with outward normals.
pub fn surface_sample(m: &BrepModel, n: usize, seed: u64) -> Result<PointCloud> {
    if m.faces.is_empty() {
        return Err(Error::Precondition("model has no faces".into()));
    }
    let grids: Vec<FaceGrid> = (0..m.faces.len()).map(|f| face_grid(m, f)).collect();
    let mut face_cum = Vec::with_capacity(grids.len());
    let mut acc = 0.0;
    for g in &grids {
        acc += g.area;
        face_cum.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::InvalidGeometry("model has zero surface area".into()));
    }
    let cell_cum: Vec<Vec<f64>> = grids
        .iter()
        .map(|g| {
            g.cells
                .iter()
                .scan(0.0, |s, c| {
                    *s += c.2;
                    Some(*s)
                })
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for _ in 0..n {
        let gi = pick(&face_cum, rng.gen::<f64>() * acc);
        let g = &grids[gi];
        let (i, j, _) = g.cells[pick(&cell_cum[gi], rng.gen::<f64>() * g.area)];
        let f = &m.faces[g.face];
        let d = f.surface.domain;
        let (du, dv) = ((d.u1 - d.u0) / AREA_GRID as f64, (d.v1 - d.v0) / AREA_GRID as f64);
        let mut uv = [d.u0 + (i as f64 + 0.5) * du, d.v0 + (j as f64 + 0.5) * dv];
        for _ in 0..TRIM_TRIES {
            let cand = [d.u0 + (i as f64 + rng.gen::<f64>()) * du, d.v0 + (j as f64 + rng.gen::<f64>()) * dv];
            if g.chart.as_ref().is_none_or(|c| c.inside(cand)) {
                uv = cand;
                break;
            }
        }
        points.push(f.surface.eval(uv[0], uv[1]));
        normals.push(f.surface.normal(uv[0], uv[1], f.same_sense).unwrap_or_default());
    }
    Ok(PointCloud { points, normals: Some(normals), source: None })
}

/// Face areas from the same grid the sampler uses.
pub fn face_areas(m: &BrepModel) -> Vec<f64> {
    (0..m.faces.len()).map(|f| face_grid(m, f).area).collect()
}
