use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{save_json, write_atomic, FORMAT_VERSION};
use crate::brep::BrepModel;
use crate::error::Result;
use crate::geom::UvRect;
use crate::vhp::{extract_vhp, voronoi_assign, FaceChart, SamplingConfig, VhpRecord};

/// UV cells per side when tessellating a face.
pub const OBJ_GRID: usize = 32;

/// Triangulated faces on a fixed UV grid, keeping cells whose center lies inside the trim.
pub fn obj_string(m: &BrepModel) -> String {
    let mut out = String::from("# vhp tessellation\n");
    let mut base = 1usize;
    for (fi, f) in m.faces.iter().enumerate() {
        let chart = FaceChart::new(m, fi, 32).ok();
        let d = f.surface.domain;
        let n = OBJ_GRID;
        let _ = writeln!(out, "o face_{fi}");
        for j in 0..=n {
            for i in 0..=n {
                let uv = d.lerp(i as f64 / n as f64, j as f64 / n as f64);
                let p = f.surface.eval(uv[0], uv[1]);
                let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
            }
        }
        let id = |i: usize, j: usize| base + j * (n + 1) + i;
        for j in 0..n {
            for i in 0..n {
                let c = d.lerp((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                if chart.as_ref().is_some_and(|ch| !ch.inside(c)) {
                    continue;
                }
                let (a, b, cc, dd) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if f.same_sense {
                    let _ = writeln!(out, "f {a} {b} {cc}\nf {a} {cc} {dd}");
                } else {
                    let _ = writeln!(out, "f {a} {cc} {b}\nf {a} {dd} {cc}");
                }
            }
        }
        base += (n + 1) * (n + 1);
    }
    out
}

pub fn save_obj(path: &Path, m: &BrepModel) -> Result<()> {
    write_atomic(path, obj_string(m).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceCells {
    pub face: usize,
    pub resolution: usize,
    pub domain: UvRect,
    /// Row-major half-edge per cell, `null` outside the trim.
    pub labels: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VhpDebug {
    pub version: u32,
    pub sampling: SamplingConfig,
    pub faces: Vec<FaceCells>,
    pub records: Vec<VhpRecord>,
    /// Display color per half-edge, shared by its cells and samples.
    pub colors: Vec<[u8; 3]>,
}

/// Golden-ratio hue walk at full saturation.
fn color(k: usize) -> [u8; 3] {
    let h = (k as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as usize {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r, g, b].map(|c: f64| (c * 255.0).round() as u8)
}

/// Voronoi cells and half-patch samples of every face, for inspection.
pub fn vhp_debug(m: &BrepModel, cfg: &SamplingConfig) -> Result<VhpDebug> {
    let faces = (0..m.faces.len())
        .map(|f| {
            let map = voronoi_assign(m, f, cfg)?;
            Ok(FaceCells { face: f, resolution: map.resolution, domain: map.domain, labels: map.labels })
        })
        .collect::<Result<Vec<_>>>()?;
    let records = extract_vhp(m, cfg)?;
    Ok(VhpDebug { version: FORMAT_VERSION, sampling: *cfg, faces, records, colors: (0..m.halfedges.len()).map(color).collect() })
}

pub fn save_vhp_debug(path: &Path, m: &BrepModel, cfg: &SamplingConfig) -> Result<()> {
    save_json(path, &vhp_debug(m, cfg)?)
}
