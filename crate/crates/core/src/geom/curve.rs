use serde::{Deserialize, Serialize};

use super::{Point3, Similarity, Vec3};
use crate::error::{Error, Result};

/// Edge geometry, always parameterized over `u ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveGeom {
    Line {
        start: Point3,
        end: Point3,
    },
    /// `center + radius * (cos θ x_dir + sin θ y_dir)` with `θ = start_angle + u * sweep`.
    Arc {
        center: Point3,
        radius: f64,
        x_dir: Vec3,
        y_dir: Vec3,
        start_angle: f64,
        sweep: f64,
    },
    CubicBezier {
        ctrl: [Point3; 4],
    },
    /// Piecewise linear, each segment spanning an equal share of `[0, 1]`.
    Polyline {
        points: Vec<Point3>,
    },
}

impl CurveGeom {
    pub fn eval(&self, u: f64) -> Point3 {
        match self {
            CurveGeom::Line { start, end } => start.lerp(*end, u),
            CurveGeom::Arc { center, radius, x_dir, y_dir, start_angle, sweep } => {
                let t = start_angle + u * sweep;
                *center + (*x_dir * t.cos() + *y_dir * t.sin()) * *radius
            }
            CurveGeom::CubicBezier { ctrl } => {
                let s = 1.0 - u;
                ctrl[0] * (s * s * s)
                    + ctrl[1] * (3.0 * s * s * u)
                    + ctrl[2] * (3.0 * s * u * u)
                    + ctrl[3] * (u * u * u)
            }
            CurveGeom::Polyline { points } => {
                let (i, f) = polyline_segment(points.len(), u);
                points[i].lerp(points[i + 1], f)
            }
        }
    }

    /// First derivative with respect to `u`.
    pub fn derivative(&self, u: f64) -> Vec3 {
        match self {
            CurveGeom::Line { start, end } => *end - *start,
            CurveGeom::Arc { radius, x_dir, y_dir, start_angle, sweep, .. } => {
                let t = start_angle + u * sweep;
                (*y_dir * t.cos() - *x_dir * t.sin()) * (*radius * *sweep)
            }
            CurveGeom::CubicBezier { ctrl } => {
                let s = 1.0 - u;
                (ctrl[1] - ctrl[0]) * (3.0 * s * s)
                    + (ctrl[2] - ctrl[1]) * (6.0 * s * u)
                    + (ctrl[3] - ctrl[2]) * (3.0 * u * u)
            }
            CurveGeom::Polyline { points } => {
                let (i, _) = polyline_segment(points.len(), u);
                (points[i + 1] - points[i]) * (points.len() - 1) as f64
            }
        }
    }

    pub fn start(&self) -> Point3 {
        match self {
            CurveGeom::Line { start, .. } => *start,
            CurveGeom::CubicBezier { ctrl } => ctrl[0],
            CurveGeom::Polyline { points } => points[0],
            CurveGeom::Arc { .. } => self.eval(0.0),
        }
    }

    pub fn end(&self) -> Point3 {
        match self {
            CurveGeom::Line { end, .. } => *end,
            CurveGeom::CubicBezier { ctrl } => ctrl[3],
            CurveGeom::Polyline { points } => points[points.len() - 1],
            CurveGeom::Arc { .. } => self.eval(1.0),
        }
    }

    /// Arclength estimate from a 64-segment chord sum (exact for lines and polylines).
    pub fn length(&self) -> f64 {
        match self {
            CurveGeom::Line { start, end } => start.dist(*end),
            CurveGeom::Arc { radius, sweep, .. } => (radius * sweep).abs(),
            CurveGeom::Polyline { points } => points.windows(2).map(|w| w[0].dist(w[1])).sum(),
            CurveGeom::CubicBezier { .. } => {
                let n = 64;
                (0..n).map(|k| self.eval(k as f64 / n as f64).dist(self.eval((k + 1) as f64 / n as f64))).sum()
            }
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok_points = match self {
            CurveGeom::Line { start, end } => start.is_finite() && end.is_finite(),
            CurveGeom::Arc { center, radius, x_dir, y_dir, start_angle, sweep } => {
                center.is_finite()
                    && radius.is_finite()
                    && x_dir.is_finite()
                    && y_dir.is_finite()
                    && start_angle.is_finite()
                    && sweep.is_finite()
            }
            CurveGeom::CubicBezier { ctrl } => ctrl.iter().all(|p| p.is_finite()),
            CurveGeom::Polyline { points } => points.len() >= 2 && points.iter().all(|p| p.is_finite()),
        };
        if !ok_points {
            return Err(Error::InvalidGeometry("non-finite or malformed curve parameters".into()));
        }
        if self.length() <= 1e-12 {
            return Err(Error::InvalidGeometry("zero-length curve".into()));
        }
        Ok(())
    }

    pub fn transformed(&self, t: &Similarity) -> CurveGeom {
        match self {
            CurveGeom::Line { start, end } => CurveGeom::Line { start: t.apply(*start), end: t.apply(*end) },
            CurveGeom::Arc { center, radius, x_dir, y_dir, start_angle, sweep } => CurveGeom::Arc {
                center: t.apply(*center),
                radius: radius * t.scale,
                x_dir: *x_dir,
                y_dir: *y_dir,
                start_angle: *start_angle,
                sweep: *sweep,
            },
            CurveGeom::CubicBezier { ctrl } => CurveGeom::CubicBezier { ctrl: ctrl.map(|p| t.apply(p)) },
            CurveGeom::Polyline { points } => {
                CurveGeom::Polyline { points: points.iter().map(|p| t.apply(*p)).collect() }
            }
        }
    }

    /// Points at `u_k = k / (n + 1)` for `k = 1..=n` (interior) or `u_k = k / (n - 1)`
    /// for `k = 0..n` (with endpoints; a single point sits at `u = 0`).
    pub fn sample(&self, n: usize, include_endpoints: bool) -> Result<Vec<Point3>> {
        if n == 0 {
            return Err(Error::Precondition("sample count must be at least 1".into()));
        }
        self.check()?;
        Ok(sample_params(n, include_endpoints).into_iter().map(|u| self.eval(u)).collect())
    }
}

/// Parameter values used by [`CurveGeom::sample`].
pub fn sample_params(n: usize, include_endpoints: bool) -> Vec<f64> {
    if include_endpoints {
        if n == 1 {
            return vec![0.0];
        }
        (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
    } else {
        (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
    }
}

fn polyline_segment(len: usize, u: f64) -> (usize, f64) {
    let segs = len - 1;
    let s = u.clamp(0.0, 1.0) * segs as f64;
    let i = (s.floor() as usize).min(segs - 1);
    (i, s - i as f64)
}
