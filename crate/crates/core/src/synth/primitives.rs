//! Watertight solids for the synthetic corpus. Every builder appends one
//! closed shell to a [`BrepBuilder`], so several calls produce a
//! multi-component model.

use std::f64::consts::{PI, TAU};

use crate::brep::{BrepBuilder, BrepModel};
use crate::error::Result;
use crate::geom::{CurveGeom, Point3, SurfaceGeom, SurfaceKind, UvRect, Vec3};

const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

/// One segment of a planar profile, running from its loop point `k` to `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seg {
    Line,
    /// Circular arc about `center`; a negative sweep turns clockwise.
    Arc { center: [f64; 2], radius: f64, start_angle: f64, sweep: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileLoop {
    pub points: Vec<[f64; 2]>,
    pub segs: Vec<Seg>,
}

impl ProfileLoop {
    pub fn polygon(points: Vec<[f64; 2]>) -> Self {
        let segs = vec![Seg::Line; points.len()];
        Self { points, segs }
    }

    fn reversed(&self) -> Self {
        let n = self.points.len();
        let points = (0..n).map(|k| self.points[(n - k) % n]).collect();
        let segs = (0..n)
            .map(|k| match self.segs[n - 1 - k] {
                Seg::Line => Seg::Line,
                Seg::Arc { center, radius, start_angle, sweep } => {
                    Seg::Arc { center, radius, start_angle: start_angle + sweep, sweep: -sweep }
                }
            })
            .collect();
        Self { points, segs }
    }

    /// Rotate by `angle` about the origin, then translate.
    pub fn placed(&self, angle: f64, t: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        let map = |p: [f64; 2]| [c * p[0] - s * p[1] + t[0], s * p[0] + c * p[1] + t[1]];
        Self {
            points: self.points.iter().map(|&p| map(p)).collect(),
            segs: self
                .segs
                .iter()
                .map(|sg| match *sg {
                    Seg::Line => Seg::Line,
                    Seg::Arc { center, radius, start_angle, sweep } => {
                        Seg::Arc { center: map(center), radius, start_angle: start_angle + angle, sweep }
                    }
                })
                .collect(),
        }
    }

    fn signed_area(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|k| {
                let (a, b) = (self.points[k], self.points[(k + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            * 0.5
    }

    fn bounds(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        let mut grow = |p: [f64; 2]| {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].max(p[0]);
            b[2] = b[2].min(p[1]);
            b[3] = b[3].max(p[1]);
        };
        for (k, seg) in self.segs.iter().enumerate() {
            grow(self.points[k]);
            if let Seg::Arc { center, radius, start_angle, sweep } = *seg {
                for i in 0..=64 {
                    let a = start_angle + sweep * i as f64 / 64.0;
                    grow([center[0] + radius * a.cos(), center[1] + radius * a.sin()]);
                }
            }
        }
        b
    }
}

/// Outer loop plus holes. Orientation is normalized on extrusion: the outer
/// loop counter-clockwise, holes clockwise (seen from +z).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub outer: ProfileLoop,
    pub holes: Vec<ProfileLoop>,
}

fn seg_curve(seg: Seg, a: [f64; 2], b: [f64; 2], z: f64) -> CurveGeom {
    match seg {
        Seg::Line => CurveGeom::Line { start: Point3::new(a[0], a[1], z), end: Point3::new(b[0], b[1], z) },
        Seg::Arc { center, radius, start_angle, sweep } => CurveGeom::Arc {
            center: Point3::new(center[0], center[1], z),
            radius,
            x_dir: X,
            y_dir: Y,
            start_angle,
            sweep,
        },
    }
}

fn arc_vertex(center: [f64; 2], radius: f64, angle: f64, z: f64) -> Point3 {
    Point3::new(center[0] + radius * angle.cos(), center[1] + radius * angle.sin(), z)
}

/// Extrude `profile` from `z0` to `z0 + height` as a closed prism-like shell.
pub fn extrude(b: &mut BrepBuilder, profile: &Profile, z0: f64, height: f64) {
    let z1 = z0 + height;
    let fix = |l: &ProfileLoop, ccw: bool| if (l.signed_area() > 0.0) == ccw { l.clone() } else { l.reversed() };
    let outer = fix(&profile.outer, true);
    let holes: Vec<ProfileLoop> = profile.holes.iter().map(|h| fix(h, false)).collect();

    struct Ring {
        bottom: Vec<usize>,
        top: Vec<usize>,
        vertical: Vec<usize>,
    }
    let mut rings = Vec::new();
    for l in std::iter::once(&outer).chain(&holes) {
        let n = l.points.len();
        let bv: Vec<usize> = l.points.iter().map(|p| b.add_vertex(Point3::new(p[0], p[1], z0))).collect();
        let tv: Vec<usize> = l.points.iter().map(|p| b.add_vertex(Point3::new(p[0], p[1], z1))).collect();
        let mut bottom = Vec::with_capacity(n);
        let mut top = Vec::with_capacity(n);
        for k in 0..n {
            let (p, q) = (l.points[k], l.points[(k + 1) % n]);
            bottom.push(b.add_edge(bv[k], bv[(k + 1) % n], seg_curve(l.segs[k], p, q, z0)));
            top.push(b.add_edge(tv[k], tv[(k + 1) % n], seg_curve(l.segs[k], p, q, z1)));
        }
        let vertical = (0..n).map(|k| b.add_line(bv[k], tv[k])).collect();
        rings.push(Ring { bottom, top, vertical });
    }

    // Side faces.
    for (l, ring) in std::iter::once(&outer).chain(&holes).zip(&rings) {
        let n = l.points.len();
        for k in 0..n {
            let kn = (k + 1) % n;
            let uses = vec![(ring.bottom[k], true), (ring.vertical[kn], true), (ring.top[k], false), (ring.vertical[k], false)];
            let (surface, same_sense) = match l.segs[k] {
                Seg::Line => {
                    let (p, q) = (l.points[k], l.points[kn]);
                    let surface = SurfaceGeom::new(
                        SurfaceKind::Plane {
                            origin: Point3::new(p[0], p[1], z0),
                            u_vec: Vec3::new(q[0] - p[0], q[1] - p[1], 0.0),
                            v_vec: Z * height,
                        },
                        UvRect::UNIT,
                    );
                    (surface, true)
                }
                Seg::Arc { center, radius, start_angle, sweep } => {
                    let (lo, hi) = if sweep > 0.0 { (start_angle, start_angle + sweep) } else { (start_angle + sweep, start_angle) };
                    let surface = SurfaceGeom::new(
                        SurfaceKind::Cylinder {
                            origin: Point3::new(center[0], center[1], z0),
                            axis: Z * height,
                            x_dir: X,
                            y_dir: Y,
                            radius,
                        },
                        UvRect::new(lo, hi, 0.0, 1.0),
                    );
                    (surface, sweep > 0.0)
                }
            };
            b.add_face(surface, same_sense, uses, vec![]);
        }
    }

    // Caps.
    let bb = outer.bounds();
    let cap = |z: f64| {
        SurfaceGeom::new(
            SurfaceKind::Plane { origin: Point3::new(0.0, 0.0, z), u_vec: X, v_vec: Y },
            UvRect::new(bb[0], bb[1], bb[2], bb[3]),
        )
    };
    let rev = |edges: &[usize]| edges.iter().rev().map(|&e| (e, false)).collect::<Vec<_>>();
    let fwd = |edges: &[usize]| edges.iter().map(|&e| (e, true)).collect::<Vec<_>>();
    b.add_face(cap(z0), false, rev(&rings[0].bottom), rings[1..].iter().map(|r| rev(&r.bottom)).collect());
    b.add_face(cap(z1), true, fwd(&rings[0].top), rings[1..].iter().map(|r| fwd(&r.top)).collect());
}

pub fn rect(x0: f64, y0: f64, w: f64, h: f64) -> ProfileLoop {
    ProfileLoop::polygon(vec![[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]])
}

/// Axis-aligned box with corner `min` and side lengths `size`.
pub fn add_box(b: &mut BrepBuilder, min: Point3, size: Vec3) {
    let p = Profile { outer: rect(min.x, min.y, size.x, size.y), holes: vec![] };
    extrude(b, &p, min.z, size.z);
}

/// Right prism over a regular `n`-gon of circumradius `radius`.
pub fn add_prism(b: &mut BrepBuilder, center: [f64; 2], radius: f64, n: usize, rotation: f64, z0: f64, height: f64) {
    let pts = (0..n)
        .map(|k| {
            let a = rotation + TAU * k as f64 / n as f64;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect();
    extrude(b, &Profile { outer: ProfileLoop::polygon(pts), holes: vec![] }, z0, height);
}

/// Box with a rectangular hole through its full height.
pub fn add_through_hole_box(b: &mut BrepBuilder, outer: ProfileLoop, hole: ProfileLoop, z0: f64, height: f64) {
    extrude(b, &Profile { outer, holes: vec![hole] }, z0, height);
}

/// L-shaped plate: a `w × h` rectangle with the `(w - t1) × (h - t2)` top-right corner removed.
pub fn l_profile(w: f64, h: f64, t1: f64, t2: f64) -> ProfileLoop {
    ProfileLoop::polygon(vec![[0.0, 0.0], [w, 0.0], [w, t2], [t1, t2], [t1, h], [0.0, h]])
}

/// Full cylinder whose lateral face is a single seam-cut patch.
///
/// With `split_circles` each circle is two half arcs (vertices at angles 0
/// and π); otherwise each circle is one closed self-loop edge.
pub fn add_cylinder(b: &mut BrepBuilder, center: [f64; 2], radius: f64, z0: f64, height: f64, split_circles: bool) {
    let z1 = z0 + height;
    let angles: &[f64] = if split_circles { &[0.0, PI] } else { &[0.0] };
    let n = angles.len();
    let sweep = TAU / n as f64;
    let bv: Vec<usize> = angles.iter().map(|&a| b.add_vertex(arc_vertex(center, radius, a, z0))).collect();
    let tv: Vec<usize> = angles.iter().map(|&a| b.add_vertex(arc_vertex(center, radius, a, z1))).collect();
    let circle = |a: f64, z: f64| CurveGeom::Arc {
        center: Point3::new(center[0], center[1], z),
        radius,
        x_dir: X,
        y_dir: Y,
        start_angle: a,
        sweep,
    };
    let bottom: Vec<usize> = (0..n).map(|k| b.add_edge(bv[k], bv[(k + 1) % n], circle(angles[k], z0))).collect();
    let top: Vec<usize> = (0..n).map(|k| b.add_edge(tv[k], tv[(k + 1) % n], circle(angles[k], z1))).collect();
    let seam = b.add_line(bv[0], tv[0]);

    let mut lateral: Vec<(usize, bool)> = bottom.iter().map(|&e| (e, true)).collect();
    lateral.push((seam, true));
    lateral.extend(top.iter().rev().map(|&e| (e, false)));
    lateral.push((seam, false));
    b.add_face(
        SurfaceGeom::new(
            SurfaceKind::Cylinder { origin: Point3::new(center[0], center[1], z0), axis: Z * height, x_dir: X, y_dir: Y, radius },
            UvRect::new(0.0, TAU, 0.0, 1.0),
        ),
        true,
        lateral,
        vec![],
    );
    let cap = |z: f64| {
        SurfaceGeom::new(
            SurfaceKind::Plane { origin: Point3::new(0.0, 0.0, z), u_vec: X, v_vec: Y },
            UvRect::new(center[0] - radius, center[0] + radius, center[1] - radius, center[1] + radius),
        )
    };
    b.add_face(cap(z0), false, bottom.iter().rev().map(|&e| (e, false)).collect(), vec![]);
    b.add_face(cap(z1), true, top.iter().map(|&e| (e, true)).collect(), vec![]);
}

/// The closed unit-ish box `[0, s]^3`.
pub fn cube(s: f64) -> BrepModel {
    let mut b = BrepBuilder::new();
    add_box(&mut b, Point3::ZERO, Vec3::new(s, s, s));
    b.build().expect("cube builds")
}

pub fn single(f: impl FnOnce(&mut BrepBuilder)) -> Result<BrepModel> {
    let mut b = BrepBuilder::new();
    f(&mut b);
    b.build()
}

/// Triangular prism of unit height.
pub fn triangular_prism() -> BrepModel {
    single(|b| add_prism(b, [0.5, 0.5], 0.5, 3, 0.0, 0.0, 1.0)).expect("prism builds")
}

/// `[0,1]² × [0,1]` box with a centered `0.5 × 0.5` through-hole.
pub fn through_hole_box() -> BrepModel {
    single(|b| add_through_hole_box(b, rect(0.0, 0.0, 1.0, 1.0), rect(0.25, 0.25, 0.5, 0.5), 0.0, 1.0)).expect("builds")
}

pub fn seam_cut_cylinder(radius: f64, height: f64, split_circles: bool) -> BrepModel {
    single(|b| add_cylinder(b, [0.0, 0.0], radius, 0.0, height, split_circles)).expect("cylinder builds")
}

pub fn l_bracket() -> BrepModel {
    single(|b| extrude(b, &Profile { outer: l_profile(1.0, 0.8, 0.3, 0.25), holes: vec![] }, 0.0, 0.4)).expect("builds")
}
