use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_header, from_json, read_text, to_json, write_atomic, FORMAT_VERSION};
use crate::brep::{validate, BrepModel, DefectKind};
use crate::error::{Error, Result};
use crate::geom::{CurveGeom, Similarity};

const KIND: &str = "vhp-model";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub units: String,
    /// Maps the stored coordinates back to a source frame, when they were normalized.
    pub transform: Option<Similarity>,
    pub model: BrepModel,
}

impl ModelFile {
    pub fn new(model: BrepModel, transform: Option<Similarity>) -> Self {
        ModelFile { format: KIND.into(), version: FORMAT_VERSION, units: "model".into(), transform, model }
    }
}

pub fn model_to_string(f: &ModelFile) -> Result<String> {
    to_json(f)
}

/// Parses and checks that every index is in range, so downstream code can
/// inspect the model without panicking. Topological defects are allowed.
pub fn model_from_str(text: &str) -> Result<ModelFile> {
    let f: ModelFile = from_json(text)?;
    check_header(&f.format, KIND, f.version)?;
    let m = &f.model;
    let report = validate(m);
    if let Some(d) = report.defects.iter().find(|d| d.kind == DefectKind::DanglingReference) {
        return Err(Error::Format(format!("{:?}: {}", d.location, d.detail)));
    }
    if m.shells.iter().flatten().any(|&s| s >= m.faces.len()) {
        return Err(Error::Format("shell lists a face out of range".into()));
    }
    for (i, e) in m.edges.iter().enumerate() {
        if let CurveGeom::Polyline { points } = &e.curve {
            if points.len() < 2 {
                return Err(Error::Format(format!("edge {i}: polyline needs at least two points")));
            }
        }
    }
    Ok(f)
}

pub fn save_model(path: &Path, f: &ModelFile) -> Result<()> {
    write_atomic(path, model_to_string(f)?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    model_from_str(&read_text(path)?)
}
