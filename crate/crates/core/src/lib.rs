//! Bidirectional codec between half-edge B-rep solids and vertex-based token
//! sequences built on Voronoi half-patches.
//!
//! The pipeline runs
//! [`vhp::extract_vhp`] → [`codec::tokenize`] → [`codec::parse`] →
//! [`recon::reconstruct`], with [`lm`] supplying a small masked sequence
//! model and [`metrics`] the distribution and CAD metrics.

pub mod brep;
pub mod codec;
pub mod error;
pub mod geom;
pub mod io;
pub mod lm;
pub mod metrics;
pub mod pipeline;
pub mod recon;
pub mod synth;
pub mod vhp;

pub use brep::{BrepModel, ValidationReport};
pub use codec::{Codebook, TokenSequence, VocabLayout};
pub use error::{Error, Result};
pub use geom::{CurveGeom, Point3, SurfaceGeom, Vec3};
pub use recon::ReconstructionReport;
pub use vhp::{SamplingConfig, VhpRecord};
