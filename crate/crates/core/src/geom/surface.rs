use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::{Point3, Similarity, Vec3};
use crate::error::{Error, Result};

/// Closed parameter rectangle `[u0, u1] × [v0, v1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvRect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl UvRect {
    pub const UNIT: UvRect = UvRect { u0: 0.0, u1: 1.0, v0: 0.0, v1: 1.0 };

    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        Self { u0, u1, v0, v1 }
    }

    pub fn contains(&self, uv: [f64; 2], tol: f64) -> bool {
        uv[0] >= self.u0 - tol && uv[0] <= self.u1 + tol && uv[1] >= self.v0 - tol && uv[1] <= self.v1 + tol
    }

    pub fn clamp(&self, uv: [f64; 2]) -> [f64; 2] {
        [uv[0].clamp(self.u0, self.u1), uv[1].clamp(self.v0, self.v1)]
    }

    pub fn center(&self) -> [f64; 2] {
        [(self.u0 + self.u1) * 0.5, (self.v0 + self.v1) * 0.5]
    }

    pub fn lerp(&self, s: f64, t: f64) -> [f64; 2] {
        [self.u0 + s * (self.u1 - self.u0), self.v0 + t * (self.v1 - self.v0)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceKind {
    /// `origin + u * u_vec + v * v_vec`.
    Plane { origin: Point3, u_vec: Vec3, v_vec: Vec3 },
    /// `origin + radius (cos u x_dir + sin u y_dir) + v * axis`.
    Cylinder { origin: Point3, axis: Vec3, x_dir: Vec3, y_dir: Vec3, radius: f64 },
    /// `center + radius (cos v cos u x_dir + cos v sin u y_dir + sin v z_dir)`; `v` is latitude.
    Sphere { center: Point3, radius: f64, x_dir: Vec3, y_dir: Vec3, z_dir: Vec3 },
    /// Tensor-product Bézier patch, `ctrl[i][j]` weighted by `B_i(u) B_j(v)`.
    Bicubic { ctrl: [[Point3; 4]; 4] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGeom {
    #[serde(flatten)]
    pub kind: SurfaceKind,
    pub domain: UvRect,
}

const POLE_TOL: f64 = 1e-9;

fn bernstein(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t]
}

fn bernstein_d(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [-3.0 * s * s, 3.0 * s * s - 6.0 * s * t, 6.0 * s * t - 3.0 * t * t, 3.0 * t * t]
}

impl SurfaceGeom {
    pub fn new(kind: SurfaceKind, domain: UvRect) -> Self {
        Self { kind, domain }
    }

    pub fn eval(&self, u: f64, v: f64) -> Point3 {
        match &self.kind {
            SurfaceKind::Plane { origin, u_vec, v_vec } => *origin + *u_vec * u + *v_vec * v,
            SurfaceKind::Cylinder { origin, axis, x_dir, y_dir, radius } => {
                *origin + (*x_dir * u.cos() + *y_dir * u.sin()) * *radius + *axis * v
            }
            SurfaceKind::Sphere { center, radius, x_dir, y_dir, z_dir } => {
                *center + (*x_dir * (v.cos() * u.cos()) + *y_dir * (v.cos() * u.sin()) + *z_dir * v.sin()) * *radius
            }
            SurfaceKind::Bicubic { ctrl } => {
                let bu = bernstein(u);
                let bv = bernstein(v);
                let mut p = Point3::ZERO;
                for i in 0..4 {
                    for j in 0..4 {
                        p += ctrl[i][j] * (bu[i] * bv[j]);
                    }
                }
                p
            }
        }
    }

    /// `(∂S/∂u, ∂S/∂v)`.
    pub fn partials(&self, u: f64, v: f64) -> (Vec3, Vec3) {
        match &self.kind {
            SurfaceKind::Plane { u_vec, v_vec, .. } => (*u_vec, *v_vec),
            SurfaceKind::Cylinder { axis, x_dir, y_dir, radius, .. } => {
                ((*y_dir * u.cos() - *x_dir * u.sin()) * *radius, *axis)
            }
            SurfaceKind::Sphere { radius, x_dir, y_dir, z_dir, .. } => {
                let su = (*y_dir * u.cos() - *x_dir * u.sin()) * (v.cos() * *radius);
                let sv = (*z_dir * v.cos() - (*x_dir * u.cos() + *y_dir * u.sin()) * v.sin()) * *radius;
                (su, sv)
            }
            SurfaceKind::Bicubic { ctrl } => {
                let (bu, dbu) = (bernstein(u), bernstein_d(u));
                let (bv, dbv) = (bernstein(v), bernstein_d(v));
                let mut su = Vec3::ZERO;
                let mut sv = Vec3::ZERO;
                for i in 0..4 {
                    for j in 0..4 {
                        su += ctrl[i][j] * (dbu[i] * bv[j]);
                        sv += ctrl[i][j] * (bu[i] * dbv[j]);
                    }
                }
                (su, sv)
            }
        }
    }

    /// Unit normal `±(S_u × S_v)`; `same_sense = false` flips it.
    pub fn normal(&self, u: f64, v: f64, same_sense: bool) -> Result<Vec3> {
        if let SurfaceKind::Sphere { .. } = self.kind {
            if (v.abs() - FRAC_PI_2).abs() < POLE_TOL {
                return Err(Error::InvalidGeometry("normal requested at a sphere pole".into()));
            }
        }
        let (su, sv) = self.partials(u, v);
        let n = su
            .cross(sv)
            .normalized()
            .ok_or_else(|| Error::InvalidGeometry(format!("degenerate surface normal at ({u}, {v})")))?;
        Ok(if same_sense { n } else { -n })
    }

    /// Period of the `u` parameter for surfaces that wrap around.
    pub fn u_period(&self) -> Option<f64> {
        match self.kind {
            SurfaceKind::Cylinder { .. } | SurfaceKind::Sphere { .. } => Some(TAU),
            _ => None,
        }
    }

    /// Parameters of the point on the (untrimmed, unbounded in `u` for periodic
    /// surfaces) surface closest to `p`. Closed form for analytic kinds.
    pub fn invert(&self, p: Point3) -> [f64; 2] {
        match &self.kind {
            SurfaceKind::Plane { origin, u_vec, v_vec } => {
                // 2x2 normal equations; exact for any non-degenerate frame.
                let d = p - *origin;
                let (a, b, c) = (u_vec.dot(*u_vec), u_vec.dot(*v_vec), v_vec.dot(*v_vec));
                let (r1, r2) = (d.dot(*u_vec), d.dot(*v_vec));
                let det = a * c - b * b;
                [(r1 * c - r2 * b) / det, (a * r2 - b * r1) / det]
            }
            SurfaceKind::Cylinder { origin, axis, x_dir, y_dir, .. } => {
                let d = p - *origin;
                let v = d.dot(*axis) / axis.norm_sq();
                let u = d.dot(*y_dir).atan2(d.dot(*x_dir));
                [u, v]
            }
            SurfaceKind::Sphere { center, x_dir, y_dir, z_dir, .. } => {
                let d = p - *center;
                let (x, y, z) = (d.dot(*x_dir), d.dot(*y_dir), d.dot(*z_dir));
                [y.atan2(x), z.atan2((x * x + y * y).sqrt())]
            }
            SurfaceKind::Bicubic { .. } => self.closest_point(p).0,
        }
    }

    /// Closest point within the parameter domain: `(uv, point, distance)`.
    pub fn closest_point(&self, p: Point3) -> ([f64; 2], Point3, f64) {
        let dom = self.domain;
        let uv = match &self.kind {
            SurfaceKind::Bicubic { .. } => {
                let n = 12;
                let mut best = (f64::INFINITY, dom.center());
                for i in 0..=n {
                    for j in 0..=n {
                        let uv = dom.lerp(i as f64 / n as f64, j as f64 / n as f64);
                        let d = self.eval(uv[0], uv[1]).dist_sq(p);
                        if d < best.0 {
                            best = (d, uv);
                        }
                    }
                }
                self.refine(p, best.1)
            }
            _ => {
                let mut uv = self.invert(p);
                if let Some(period) = self.u_period() {
                    uv[0] = wrap_into(uv[0], dom.u0, dom.u1, period);
                }
                self.refine(p, dom.clamp(uv))
            }
        };
        let q = self.eval(uv[0], uv[1]);
        (uv, q, q.dist(p))
    }

    /// Projected Gauss-Newton on the squared distance, clamped to the domain.
    fn refine(&self, p: Point3, mut uv: [f64; 2]) -> [f64; 2] {
        let dom = self.domain;
        for _ in 0..25 {
            let q = self.eval(uv[0], uv[1]);
            let r = p - q;
            let (su, sv) = self.partials(uv[0], uv[1]);
            let (a, b, c) = (su.dot(su), su.dot(sv), sv.dot(sv));
            let det = a * c - b * b;
            if det.abs() < 1e-300 {
                break;
            }
            let (g1, g2) = (r.dot(su), r.dot(sv));
            let du = (g1 * c - g2 * b) / det;
            let dv = (a * g2 - b * g1) / det;
            let next = dom.clamp([uv[0] + du, uv[1] + dv]);
            let moved = (next[0] - uv[0]).abs() + (next[1] - uv[1]).abs();
            if self.eval(next[0], next[1]).dist_sq(p) > q.dist_sq(p) {
                break;
            }
            uv = next;
            if moved < 1e-15 {
                break;
            }
        }
        uv
    }

    pub fn transformed(&self, t: &Similarity) -> SurfaceGeom {
        let kind = match &self.kind {
            SurfaceKind::Plane { origin, u_vec, v_vec } => SurfaceKind::Plane {
                origin: t.apply(*origin),
                u_vec: t.apply_vector(*u_vec),
                v_vec: t.apply_vector(*v_vec),
            },
            SurfaceKind::Cylinder { origin, axis, x_dir, y_dir, radius } => SurfaceKind::Cylinder {
                origin: t.apply(*origin),
                axis: t.apply_vector(*axis),
                x_dir: *x_dir,
                y_dir: *y_dir,
                radius: radius * t.scale,
            },
            SurfaceKind::Sphere { center, radius, x_dir, y_dir, z_dir } => SurfaceKind::Sphere {
                center: t.apply(*center),
                radius: radius * t.scale,
                x_dir: *x_dir,
                y_dir: *y_dir,
                z_dir: *z_dir,
            },
            SurfaceKind::Bicubic { ctrl } => SurfaceKind::Bicubic { ctrl: ctrl.map(|row| row.map(|p| t.apply(p))) },
        };
        SurfaceGeom { kind, domain: self.domain }
    }

    pub fn is_finite(&self) -> bool {
        let pts: Vec<f64> = match &self.kind {
            SurfaceKind::Plane { origin, u_vec, v_vec } => [origin, u_vec, v_vec].iter().flat_map(|p| p.to_array()).collect(),
            SurfaceKind::Cylinder { origin, axis, x_dir, y_dir, radius } => {
                let mut v: Vec<f64> = [origin, axis, x_dir, y_dir].iter().flat_map(|p| p.to_array()).collect();
                v.push(*radius);
                v
            }
            SurfaceKind::Sphere { center, radius, x_dir, y_dir, z_dir } => {
                let mut v: Vec<f64> = [center, x_dir, y_dir, z_dir].iter().flat_map(|p| p.to_array()).collect();
                v.push(*radius);
                v
            }
            SurfaceKind::Bicubic { ctrl } => ctrl.iter().flatten().flat_map(|p| p.to_array()).collect(),
        };
        let d = self.domain;
        pts.iter().chain([d.u0, d.u1, d.v0, d.v1].iter()).all(|x| x.is_finite()) && d.u1 > d.u0 && d.v1 > d.v0
    }
}

/// Shift `u` by whole periods so it lands in `[lo, hi]` when possible, otherwise
/// as close to the interval as a shift allows.
pub fn wrap_into(u: f64, lo: f64, hi: f64, period: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let k = ((mid - u) / period).round();
    let mut best = u + k * period;
    for dk in [-1.0, 1.0] {
        let cand = u + (k + dk) * period;
        let gap = |x: f64| (lo - x).max(x - hi).max(0.0);
        if gap(cand) < gap(best) {
            best = cand;
        }
    }
    best
}
