use rayon::prelude::*;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::geom::Point3;

/// Voxels per side for occupancy distributions.
pub const JSD_RESOLUTION: usize = 28;

fn mean_nn_sq(a: &[Point3], b: &[Point3]) -> f64 {
    a.iter().map(|p| b.iter().map(|q| p.dist_sq(*q)).fold(f64::INFINITY, f64::min)).sum::<f64>() / a.len() as f64
}

/// Symmetric Chamfer distance: the average of the mean squared nearest-neighbor
/// distances from `a` to `b` and from `b` to `a`.
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::Precondition("chamfer needs non-empty clouds".into()));
    }
    Ok(0.5 * (mean_nn_sq(&a.points, &b.points) + mean_nn_sq(&b.points, &a.points)))
}

/// `table[g][r]` = chamfer(gen[g], ref[r]).
pub fn chamfer_table(gen: &[PointCloud], reference: &[PointCloud]) -> Result<Vec<Vec<f64>>> {
    if gen.iter().chain(reference).any(|c| c.points.is_empty()) {
        return Err(Error::Precondition("chamfer needs non-empty clouds".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..gen.len()).flat_map(|g| (0..reference.len()).map(move |r| (g, r))).collect();
    let flat: Vec<f64> = pairs.par_iter().map(|&(g, r)| chamfer(&gen[g], &reference[r]).expect("checked non-empty")).collect();
    Ok(flat.chunks(reference.len().max(1)).map(|c| c.to_vec()).take(gen.len()).collect())
}

/// Coverage and minimum matching distance from a chamfer table (`table[g][r]`).
/// Each generated shape covers its nearest reference (ties to the smaller index).
pub fn cov_mmd_from_table(table: &[Vec<f64>]) -> Result<(f64, f64)> {
    let n_ref = table.first().map_or(0, |r| r.len());
    if table.is_empty() || n_ref == 0 || table.iter().any(|r| r.len() != n_ref) {
        return Err(Error::Precondition("cov/mmd needs non-empty generated and reference sets".into()));
    }
    let mut hit = vec![false; n_ref];
    for row in table {
        let best = (0..n_ref).fold(0, |b, r| if row[r] < row[b] { r } else { b });
        hit[best] = true;
    }
    let cov = hit.iter().filter(|&&h| h).count() as f64 / n_ref as f64;
    let mmd = (0..n_ref).map(|r| table.iter().map(|row| row[r]).fold(f64::INFINITY, f64::min)).sum::<f64>() / n_ref as f64;
    Ok((cov, mmd))
}

pub fn cov_mmd(gen: &[PointCloud], reference: &[PointCloud]) -> Result<(f64, f64)> {
    cov_mmd_from_table(&chamfer_table(gen, reference)?)
}

fn voxel(x: f64, res: usize) -> usize {
    ((x * res as f64).floor().max(0.0) as usize).min(res - 1)
}

/// Per-voxel count of clouds that occupy it, normalized to a distribution.
/// Coordinates are expected in the unit box; outliers clamp to the border voxels.
pub fn occupancy(set: &[PointCloud], res: usize) -> Vec<f64> {
    let mut counts = vec![0.0; res * res * res];
    let mut seen = vec![usize::MAX; res * res * res];
    for (ci, c) in set.iter().enumerate() {
        for p in &c.points {
            let k = (voxel(p.x, res) * res + voxel(p.y, res)) * res + voxel(p.z, res);
            if seen[k] != ci {
                seen[k] = ci;
                counts[k] += 1.0;
            }
        }
    }
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.iter_mut().for_each(|c| *c /= total);
    }
    counts
}

/// Jensen-Shannon divergence in bits between two distributions.
pub fn jsd_distributions(p: &[f64], q: &[f64]) -> f64 {
    let kl_to_mid = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).filter(|(x, _)| **x > 0.0).map(|(x, y)| x * (2.0 * x / (x + y)).log2()).sum()
    };
    (0.5 * kl_to_mid(p, q) + 0.5 * kl_to_mid(q, p)).clamp(0.0, 1.0)
}

pub fn jsd(gen: &[PointCloud], reference: &[PointCloud], res: usize) -> Result<f64> {
    if res == 0 {
        return Err(Error::Precondition("voxel resolution must be positive".into()));
    }
    if gen.iter().all(|c| c.points.is_empty()) || reference.iter().all(|c| c.points.is_empty()) {
        return Err(Error::Precondition("jsd needs non-empty point sets".into()));
    }
    Ok(jsd_distributions(&occupancy(gen, res), &occupancy(reference, res)))
}
