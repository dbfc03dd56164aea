//! Points, parametric curves and parametric surfaces.

mod curve;
mod point;
mod surface;

pub use curve::{sample_params, CurveGeom};
pub use point::{Aabb, Point3, Similarity, Vec3};
pub use surface::{wrap_into, SurfaceGeom, SurfaceKind, UvRect};
