use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point3, SurfaceGeom, SurfaceKind, UvRect, Vec3};

/// Planes with an RMS residual at or below this are accepted.
pub const PLANE_TOL: f64 = 1e-5;
/// Least-squares weight of boundary points relative to interior surface samples.
pub const BOUNDARY_WEIGHT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Plane,
    Bicubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceFit {
    pub surface: SurfaceGeom,
    pub kind: FitKind,
    /// RMS distance of all fitted points to the surface.
    pub rms: f64,
    pub plane_rms: f64,
    /// The bicubic was under-determined and the plane was kept anyway.
    pub fallback: bool,
}

/// Outward normal of a closed polygon (Newell's method); zero for degenerate input.
pub fn newell_normal(poly: &[Point3]) -> Vec3 {
    let mut n = Vec3::new(0.0, 0.0, 0.0);
    for (k, &a) in poly.iter().enumerate() {
        let b = poly[(k + 1) % poly.len()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    n
}

struct Frame {
    origin: Point3,
    u: Vec3,
    v: Vec3,
    n: Vec3,
    /// Extents along `u` and `v`.
    size: [f64; 2],
}

impl Frame {
    fn local(&self, p: Point3) -> [f64; 3] {
        let d = p - self.origin;
        [d.dot(self.u) / self.size[0], d.dot(self.v) / self.size[1], d.dot(self.n)]
    }
}

fn plane_frame(points: &[Point3], orient: Vec3) -> Frame {
    let c = points.iter().fold(Vec3::new(0.0, 0.0, 0.0), |a, &p| a + p) * (1.0 / points.len() as f64);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = *p - c;
        let d = nalgebra::Vector3::new(d.x, d.y, d.z);
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let col = |i: usize| Vec3::new(eig.eigenvectors[(0, i)], eig.eigenvectors[(1, i)], eig.eigenvectors[(2, i)]);
    let mut n = col(idx[2]);
    if n.dot(orient) < 0.0 {
        n = -n;
    }
    let u = col(idx[0]);
    let v = n.cross(u);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        let d = *p - c;
        for (k, axis) in [u, v].into_iter().enumerate() {
            lo[k] = lo[k].min(d.dot(axis));
            hi[k] = hi[k].max(d.dot(axis));
        }
    }
    let size = [(hi[0] - lo[0]).max(1e-9), (hi[1] - lo[1]).max(1e-9)];
    Frame { origin: c + u * lo[0] + v * lo[1], u, v, n, size }
}

fn bernstein(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t]
}

fn rms(surface: &SurfaceGeom, points: &[Point3]) -> f64 {
    let sq: f64 = points.iter().map(|&p| surface.closest_point(p).2.powi(2)).sum();
    (sq / points.len() as f64).sqrt()
}

/// Plane if the points are flat enough, else a bicubic height field over the
/// best-fit plane. `boundary` points get [`BOUNDARY_WEIGHT`]; `orient` picks the
/// outward side.
pub fn fit_face(boundary: &[Point3], interior: &[Point3], orient: Vec3) -> Result<FaceFit> {
    if boundary.len() + interior.len() < 3 {
        return Err(Error::Precondition("face fit needs at least three points".into()));
    }
    let all: Vec<Point3> = boundary.iter().chain(interior).copied().collect();
    let f = plane_frame(&all, orient);
    let plane = SurfaceGeom::new(
        SurfaceKind::Plane { origin: f.origin, u_vec: f.u * f.size[0], v_vec: f.v * f.size[1] },
        UvRect::UNIT,
    );
    let plane_rms = all.iter().map(|&p| f.local(p)[2].powi(2)).sum::<f64>() / all.len() as f64;
    let plane_rms = plane_rms.sqrt();
    let plane_fit = |fallback| FaceFit { surface: plane.clone(), kind: FitKind::Plane, rms: plane_rms, plane_rms, fallback };
    if plane_rms <= PLANE_TOL {
        return Ok(plane_fit(false));
    }

    let rows = all.len();
    let mut a = DMatrix::zeros(rows, 16);
    let mut b = DVector::zeros(rows);
    for (r, &p) in all.iter().enumerate() {
        let w = if r < boundary.len() { BOUNDARY_WEIGHT.sqrt() } else { 1.0 };
        let [s, t, h] = f.local(p);
        let (bs, bt) = (bernstein(s), bernstein(t));
        for i in 0..4 {
            for j in 0..4 {
                a[(r, 4 * i + j)] = w * bs[i] * bt[j];
            }
        }
        b[r] = w * h;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if rows < 16 || svd.singular_values.min() <= smax * 1e-10 {
        return Ok(plane_fit(true));
    }
    let Ok(c) = svd.solve(&b, smax * 1e-12) else {
        return Ok(plane_fit(true));
    };
    let mut ctrl = [[Point3::new(0.0, 0.0, 0.0); 4]; 4];
    for (i, row) in ctrl.iter_mut().enumerate() {
        for (j, cp) in row.iter_mut().enumerate() {
            let (s, t) = (i as f64 / 3.0, j as f64 / 3.0);
            *cp = f.origin + f.u * (s * f.size[0]) + f.v * (t * f.size[1]) + f.n * c[4 * i + j];
        }
    }
    let surface = SurfaceGeom::new(SurfaceKind::Bicubic { ctrl }, UvRect::UNIT);
    let bicubic_rms = rms(&surface, &all);
    Ok(FaceFit { surface, kind: FitKind::Bicubic, rms: bicubic_rms, plane_rms, fallback: false })
}

/// Mean distance from `points` to a surface.
pub fn mean_distance(surface: &SurfaceGeom, points: &[Point3]) -> f64 {
    points.iter().map(|&p| surface.closest_point(p).2).sum::<f64>() / points.len().max(1) as f64
}

/// For each inner loop (given by its on-curve samples), the face whose surface
/// has the smallest mean distance; ties go to the lower face index.
pub fn attach_inner_loops(inners: &[Vec<Point3>], faces: &[SurfaceGeom]) -> Result<Vec<usize>> {
    if faces.is_empty() && !inners.is_empty() {
        return Err(Error::Topology(format!("{} inner loops but no faces to attach them to", inners.len())));
    }
    Ok(inners
        .iter()
        .map(|pts| {
            let mut best = (f64::INFINITY, 0);
            for (fi, s) in faces.iter().enumerate() {
                let d = mean_distance(s, pts);
                if d < best.0 {
                    best = (d, fi);
                }
            }
            best.1
        })
        .collect())
}
