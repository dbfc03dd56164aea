//! Point-cloud distribution metrics (Chamfer, COV, MMD, JSD), novelty/uniqueness/validity
//! and curve discretization error.

mod cloud;
mod curve;
mod dist;

pub use cloud::{face_areas, surface_sample, PointCloud, AREA_GRID, CLOUD_SIZE};
pub use curve::{chord_deviation, curve_error, CurveErrorReport, Deviation, CHORDAL_SEGMENTS, CURVE_SAMPLES, PROBES};
pub use dist::{chamfer, chamfer_table, cov_mmd, cov_mmd_from_table, jsd, jsd_distributions, occupancy, JSD_RESOLUTION};

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brep::{normalize, validate, BrepModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NovelUniqueValid {
    /// Share of generated sequences absent from the training set.
    pub novel: f64,
    /// Share of generated sequences occurring exactly once among the generated.
    pub unique: f64,
    /// Share of generated models that are watertight.
    pub valid: f64,
}

/// Duplicates are identical canonical token sequences.
pub fn novel_unique_valid(gen_tokens: &[Vec<u32>], gen_valid: &[bool], train: &[Vec<u32>]) -> Result<NovelUniqueValid> {
    if gen_tokens.is_empty() || gen_tokens.len() != gen_valid.len() {
        return Err(Error::Precondition("need one validity flag per generated sequence".into()));
    }
    let n = gen_tokens.len() as f64;
    let train: HashSet<&[u32]> = train.iter().map(|s| s.as_slice()).collect();
    let mut freq: HashMap<&[u32], usize> = HashMap::new();
    for s in gen_tokens {
        *freq.entry(s.as_slice()).or_default() += 1;
    }
    Ok(NovelUniqueValid {
        novel: gen_tokens.iter().filter(|s| !train.contains(s.as_slice())).count() as f64 / n,
        unique: gen_tokens.iter().filter(|s| freq[s.as_slice()] == 1).count() as f64 / n,
        valid: gen_valid.iter().filter(|&&v| v).count() as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub points: usize,
    pub resolution: usize,
    pub seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { points: CLOUD_SIZE, resolution: JSD_RESOLUTION, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub cov: f64,
    pub mmd: f64,
    pub jsd: f64,
    /// Present when canonical token sequences were available.
    pub novel: Option<f64>,
    pub unique: Option<f64>,
    pub valid: f64,
    pub generated: usize,
    /// Generated models left out of the distribution metrics for lack of a samplable surface.
    pub skipped: usize,
    pub reference: usize,
    pub points: usize,
    pub resolution: usize,
    pub seed: u64,
}

/// Metric report plus the Chamfer table behind COV and MMD.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricReport,
    /// `table[k][r]` for the `k`-th entry of `sampled`.
    pub table: Vec<Vec<f64>>,
    /// Indices of the generated models that entered the table.
    pub sampled: Vec<usize>,
}

/// Normalized clouds of each model; cloud `i` is seeded with `seed + i`.
pub fn clouds(models: &[BrepModel], points: usize, seed: u64) -> Vec<Result<PointCloud>> {
    models
        .par_iter()
        .enumerate()
        .map(|(i, m)| surface_sample(&normalize(m)?.0, points, seed.wrapping_add(i as u64)))
        .collect()
}

/// Distribution metrics of `gen` against `reference`. `tokens` carries canonical
/// sequences of the generated and training models when novelty is wanted.
/// Validity counts every generated model; the point-cloud metrics use those
/// whose surface can be sampled.
pub fn evaluate(
    gen: &[BrepModel],
    reference: &[BrepModel],
    tokens: Option<(&[Vec<u32>], &[Vec<u32>])>,
    cfg: &MetricConfig,
) -> Result<Evaluation> {
    if gen.is_empty() || reference.is_empty() {
        return Err(Error::Precondition("evaluation needs generated and reference models".into()));
    }
    let mut sampled = Vec::new();
    let mut gc = Vec::new();
    for (i, c) in clouds(gen, cfg.points, cfg.seed).into_iter().enumerate() {
        match c {
            Ok(c) => {
                sampled.push(i);
                gc.push(c);
            }
            Err(e) => log::warn!("generated model {i} skipped: {e}"),
        }
    }
    if gc.is_empty() {
        return Err(Error::Precondition("no generated model has a samplable surface".into()));
    }
    let rc = clouds(reference, cfg.points, cfg.seed.wrapping_add(gen.len() as u64)).into_iter().collect::<Result<Vec<_>>>()?;
    let table = chamfer_table(&gc, &rc)?;
    let (cov, mmd) = cov_mmd_from_table(&table)?;
    let jsd = jsd(&gc, &rc, cfg.resolution)?;
    let valid: Vec<bool> = gen.iter().map(|m| validate(m).watertight).collect();
    let (novel, unique, valid) = match tokens {
        Some((g, t)) => {
            let nuv = novel_unique_valid(g, &valid, t)?;
            (Some(nuv.novel), Some(nuv.unique), nuv.valid)
        }
        None => (None, None, valid.iter().filter(|&&v| v).count() as f64 / valid.len() as f64),
    };
    let report = MetricReport {
        cov,
        mmd,
        jsd,
        novel,
        unique,
        valid,
        generated: gen.len(),
        skipped: gen.len() - sampled.len(),
        reference: reference.len(),
        points: cfg.points,
        resolution: cfg.resolution,
        seed: cfg.seed,
    };
    Ok(Evaluation { report, table, sampled })
}
