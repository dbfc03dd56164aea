use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::primitives::{add_cylinder, add_prism, add_through_hole_box, extrude, l_profile, rect, Profile};
use crate::brep::{validate, BrepBuilder, BrepModel};
use crate::error::{Error, Result};
use crate::geom::{Aabb, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Box,
    Prism,
    Cylinder,
    ThroughHole,
    LBracket,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Box, Family::Prism, Family::Cylinder, Family::ThroughHole, Family::LBracket];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyCounts {
    #[serde(rename = "box")]
    pub box_: usize,
    pub prism: usize,
    pub cylinder: usize,
    pub through_hole: usize,
    pub l_bracket: usize,
}

impl FamilyCounts {
    pub fn get(&self, f: Family) -> usize {
        match f {
            Family::Box => self.box_,
            Family::Prism => self.prism,
            Family::Cylinder => self.cylinder,
            Family::ThroughHole => self.through_hole,
            Family::LBracket => self.l_bracket,
        }
    }

    pub fn total(&self) -> usize {
        Family::ALL.iter().map(|&f| self.get(f)).sum()
    }
}

/// Recipe for a synthetic corpus. Each model gets one component of its counted
/// family plus extra components drawn from the families with nonzero counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub counts: FamilyCounts,
    /// Inclusive range of components per model.
    pub components: [usize; 2],
    /// Inclusive range of component extents along each axis.
    pub size: [f64; 2],
    /// Inclusive range of prism side counts.
    pub prism_sides: [usize; 2],
    /// Minimum gap between component bounding boxes.
    pub gap: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            counts: FamilyCounts { box_: 100, prism: 100, cylinder: 100, through_hole: 100, l_bracket: 100 },
            components: [1, 5],
            size: [0.12, 0.4],
            prism_sides: [3, 8],
            gap: 0.04,
            seed: 0,
        }
    }
}

const PLACEMENT_RETRIES: usize = 500;
const PLACEMENT_RESTARTS: usize = 100;

impl CorpusSpec {
    pub fn check(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::Precondition(format!("corpus spec: {s}")));
        if self.counts.total() == 0 {
            return bad("no models requested");
        }
        if self.components[0] == 0 || self.components[0] > self.components[1] {
            return bad("component range must satisfy 1 <= lo <= hi");
        }
        if !(self.size[0] > 0.0 && self.size[0] <= self.size[1] && self.size[1] < 1.0) {
            return bad("size range must satisfy 0 < lo <= hi < 1");
        }
        if self.prism_sides[0] < 3 || self.prism_sides[0] > self.prism_sides[1] {
            return bad("prism sides must satisfy 3 <= lo <= hi");
        }
        if !(self.gap > 0.0) {
            return bad("gap must be positive");
        }
        Ok(())
    }
}

/// Family of each model in generation order.
pub fn corpus_families(spec: &CorpusSpec) -> Vec<Family> {
    Family::ALL.iter().flat_map(|&f| std::iter::repeat_n(f, spec.counts.get(f))).collect()
}

fn add_component(b: &mut BrepBuilder, family: Family, min: Point3, ext: [f64; 3], spec: &CorpusSpec, rng: &mut ChaCha8Rng) {
    let [w, d, h] = ext;
    match family {
        Family::Box => {
            extrude(b, &Profile { outer: rect(min.x, min.y, w, d), holes: vec![] }, min.z, h);
        }
        Family::Prism => {
            let n = rng.gen_range(spec.prism_sides[0]..=spec.prism_sides[1]);
            let r = w.min(d) / 2.0;
            let rot = rng.gen_range(0.0..std::f64::consts::TAU);
            add_prism(b, [min.x + w / 2.0, min.y + d / 2.0], r, n, rot, min.z, h);
        }
        Family::Cylinder => {
            let r = w.min(d) / 2.0;
            add_cylinder(b, [min.x + w / 2.0, min.y + d / 2.0], r, min.z, h, rng.gen_bool(0.5));
        }
        Family::ThroughHole => {
            let (hw, hd) = (w * rng.gen_range(0.3..0.5), d * rng.gen_range(0.3..0.5));
            let (hx, hy) = (min.x + rng.gen_range(0.2 * w..0.8 * w - hw), min.y + rng.gen_range(0.2 * d..0.8 * d - hd));
            add_through_hole_box(b, rect(min.x, min.y, w, d), rect(hx, hy, hw, hd), min.z, h);
        }
        Family::LBracket => {
            let p = l_profile(w, d, w * rng.gen_range(0.3..0.6), d * rng.gen_range(0.3..0.6)).placed(0.0, [min.x, min.y]);
            extrude(b, &Profile { outer: p, holes: vec![] }, min.z, h);
        }
    }
}

/// Random disjoint boxes in the unit cube, one per extent.
fn place(exts: &[[f64; 3]], gap: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Point3>> {
    'restart: for _ in 0..PLACEMENT_RESTARTS {
        let mut boxes: Vec<Aabb> = Vec::new();
        for e in exts {
            let fits = (0..PLACEMENT_RETRIES).find_map(|_| {
                let min = Point3::new(rng.gen_range(0.0..=1.0 - e[0]), rng.gen_range(0.0..=1.0 - e[1]), rng.gen_range(0.0..=1.0 - e[2]));
                let bb = Aabb { min, max: min + Point3::new(e[0], e[1], e[2]) };
                boxes.iter().all(|o| !o.overlaps(&bb, gap)).then_some(bb)
            });
            match fits {
                Some(bb) => boxes.push(bb),
                None => continue 'restart,
            }
        }
        return Ok(boxes.into_iter().map(|b| b.min).collect());
    }
    Err(Error::Precondition(format!("could not place {} disjoint components", exts.len())))
}

fn model_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Model `index` of the corpus; independent of the other models.
pub fn synth_model(spec: &CorpusSpec, index: usize) -> Result<BrepModel> {
    spec.check()?;
    let families = corpus_families(spec);
    let first = *families.get(index).ok_or_else(|| Error::Precondition(format!("corpus has {} models", families.len())))?;
    let pool: Vec<Family> = Family::ALL.iter().copied().filter(|&f| spec.counts.get(f) > 0).collect();
    let mut rng = model_rng(spec.seed, index);
    let k = rng.gen_range(spec.components[0]..=spec.components[1]);
    let mut fams = vec![first];
    fams.extend((1..k).map(|_| *pool.choose(&mut rng).expect("nonempty pool")));
    let exts: Vec<[f64; 3]> = fams.iter().map(|_| [0, 1, 2].map(|_| rng.gen_range(spec.size[0]..=spec.size[1]))).collect();
    let mins = place(&exts, spec.gap, &mut rng)?;
    let mut b = BrepBuilder::new();
    for ((&f, &min), &ext) in fams.iter().zip(&mins).zip(&exts) {
        add_component(&mut b, f, min, ext, spec, &mut rng);
    }
    let m = b.build()?;
    let report = validate(&m);
    if !report.watertight {
        return Err(Error::Topology(format!("generated model {index} is not watertight: {:?}", report.defects.first())));
    }
    Ok(m)
}

pub fn synth_corpus(spec: &CorpusSpec) -> Result<Vec<BrepModel>> {
    use rayon::prelude::*;
    spec.check()?;
    (0..spec.counts.total()).into_par_iter().map(|i| synth_model(spec, i)).collect()
}

/// Multi-component prism models with exactly `vertices` vertices split over
/// `components` (inclusive range) disjoint prisms.
pub fn synth_vertex_budget(vertices: usize, components: [usize; 2], count: usize, seed: u64) -> Result<Vec<BrepModel>> {
    if !vertices.is_multiple_of(2) || components[0] == 0 || components[0] > components[1] || vertices < 6 * components[1] {
        return Err(Error::Precondition("vertex budget must be even and allow 3 sides per prism".into()));
    }
    (0..count)
        .map(|i| {
            let mut rng = model_rng(seed, i);
            let k = rng.gen_range(components[0]..=components[1]);
            // Sides per prism: 3 each, remainder spread at random.
            let mut sides = vec![3usize; k];
            for _ in 0..(vertices / 2 - 3 * k) {
                sides[rng.gen_range(0..k)] += 1;
            }
            let exts: Vec<[f64; 3]> = (0..k).map(|_| {
                let s = rng.gen_range(0.15..0.3);
                [s, s, rng.gen_range(0.1..0.3)]
            }).collect();
            let mins = place(&exts, 0.02, &mut rng)?;
            let mut b = BrepBuilder::new();
            for ((&n, min), e) in sides.iter().zip(&mins).zip(&exts) {
                add_prism(&mut b, [min.x + e[0] / 2.0, min.y + e[1] / 2.0], e[0] / 2.0, n, rng.gen_range(0.0..1.0), min.z, e[2]);
            }
            b.build()
        })
        .collect()
}
