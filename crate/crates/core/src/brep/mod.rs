//! Half-edge solid model, validation, normalization and component analysis.

mod model;
mod normalize;
mod topo;
mod validate;

pub use model::{BrepBuilder, BrepModel, Edge, Face, HalfEdge, Loop, LoopKind};
pub use normalize::{bounding_box, normalize, transform_model, NORMALIZE_MARGIN};
pub use topo::{connected_components, pair_counts};
pub(crate) use topo::face_shells;
pub use validate::{euler_report, validate, Defect, DefectKind, Location, ShellEuler, ValidationReport, STRUCTURAL_TOL};
