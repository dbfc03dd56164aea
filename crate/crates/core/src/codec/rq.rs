use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Lloyd iterations per level.
pub const KMEANS_ITERATIONS: usize = 20;
/// Training vectors per level are subsampled to at most this many.
pub const TRAINING_SAMPLE: usize = 16384;

/// Residual quantizer over standardized descriptors. Every level stores `K`
/// trained centroids followed by the zero vector at index `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub dim: usize,
    pub size: usize,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// `levels[d][c]`, standardized coordinates.
    pub levels: Vec<Vec<Vec<f64>>>,
    pub seed: u64,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist_sq(c, v);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Nearest entry of a level; the trailing zero centroid wins ties.
fn nearest_code(level: &[Vec<f64>], v: &[f64]) -> usize {
    let zero = level.len() - 1;
    let mut best = (zero, v.iter().map(|x| x * x).sum::<f64>());
    for (i, c) in level[..zero].iter().enumerate() {
        let d = dist_sq(c, v);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

fn kmeans_pp(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![data[rng.gen_range(0..data.len())].clone()];
    let mut d2: Vec<f64> = data.iter().map(|v| dist_sq(v, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut x = rng.gen::<f64>() * total;
            let mut idx = data.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if x < w {
                    idx = i;
                    break;
                }
                x -= w;
            }
            idx
        } else {
            rng.gen_range(0..data.len())
        };
        let c = data[pick].clone();
        d2.par_iter_mut().zip(data.par_iter()).for_each(|(d, v)| *d = d.min(dist_sq(v, &c)));
        centroids.push(c);
    }
    centroids
}

fn lloyd(data: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, iterations: usize) -> Vec<Vec<f64>> {
    let dim = data[0].len();
    let mut prev: Option<Vec<usize>> = None;
    for _ in 0..iterations {
        let assign: Vec<(usize, f64)> = data.par_iter().map(|v| nearest(&centroids, v)).collect();
        let labels: Vec<usize> = assign.iter().map(|a| a.0).collect();
        if prev.as_ref() == Some(&labels) {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (v, &l) in data.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(v) {
                *s += x;
            }
        }
        // Empty clusters take the worst-fit points, farthest first.
        let mut worst: Vec<usize> = (0..data.len()).collect();
        worst.sort_by(|&a, &b| assign[b].1.total_cmp(&assign[a].1).then(a.cmp(&b)));
        let mut spare = worst.into_iter();
        for (c, (s, &n)) in centroids.iter_mut().zip(sums.iter().zip(&counts)) {
            if n > 0 {
                *c = s.iter().map(|x| x / n as f64).collect();
            } else if let Some(i) = spare.next() {
                *c = data[i].clone();
            }
        }
        prev = Some(labels);
    }
    centroids
}

pub fn train_codebook(corpus: &[Vec<f64>], levels: usize, size: usize, seed: u64) -> Result<Codebook> {
    train_codebook_weighted(corpus, levels, size, seed, &[])
}

/// Like [`train_codebook`], with dimension `j` counted `weights[j]` times as much
/// in every distance (missing weights are 1).
pub fn train_codebook_weighted(corpus: &[Vec<f64>], levels: usize, size: usize, seed: u64, weights: &[f64]) -> Result<Codebook> {
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::Precondition("dimension weights must be positive".into()));
    }
    if levels == 0 || size == 0 {
        return Err(Error::Precondition("levels and codebook size must be positive".into()));
    }
    if corpus.len() < size {
        return Err(Error::CorpusTooSmall { needed: size, got: corpus.len() });
    }
    let dim = corpus[0].len();
    if let Some(bad) = corpus.iter().find(|d| d.len() != dim) {
        return Err(Error::DescriptorLength { got: bad.len(), expected: dim });
    }
    let n = corpus.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|j| corpus.iter().map(|d| d[j]).sum::<f64>() / n).collect();
    let scale: Vec<f64> = (0..dim)
        .map(|j| {
            let var = corpus.iter().map(|d| (d[j] - mean[j]).powi(2)).sum::<f64>() / n;
            let s = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
            s / weights.get(j).copied().unwrap_or(1.0)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residual: Vec<Vec<f64>> = corpus.iter().map(|d| standardize(d, &mean, &scale)).collect();
    let mut cb = Codebook { dim, size, mean, scale, levels: Vec::with_capacity(levels), seed };
    for level in 0..levels {
        let train: Vec<Vec<f64>> = if residual.len() > TRAINING_SAMPLE {
            let mut idx = sample(&mut rng, residual.len(), TRAINING_SAMPLE).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| residual[i].clone()).collect()
        } else {
            residual.clone()
        };
        let init = kmeans_pp(&train, size, &mut rng);
        let mut centroids = lloyd(&train, init, KMEANS_ITERATIONS);
        centroids.push(vec![0.0; dim]);
        residual.par_iter_mut().for_each(|r| {
            let c = nearest_code(&centroids, r);
            for (x, y) in r.iter_mut().zip(&centroids[c]) {
                *x -= y;
            }
        });
        log::debug!("codebook level {level}: mean residual {:.3e}", residual.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / n);
        cb.levels.push(centroids);
    }
    Ok(cb)
}

fn standardize(d: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    d.iter().zip(mean).zip(scale).map(|((x, m), s)| (x - m) / s).collect()
}

impl Codebook {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Index of the zero centroid on every level.
    pub fn zero_code(&self) -> usize {
        self.size
    }

    pub fn standardize(&self, d: &[f64]) -> Vec<f64> {
        standardize(d, &self.mean, &self.scale)
    }

    pub fn destandardize(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.mean).zip(&self.scale).map(|((x, m), s)| m + x * s).collect()
    }

    /// Raw-space position of a single centroid.
    pub fn centroid_raw(&self, level: usize, code: usize) -> Vec<f64> {
        self.destandardize(&self.levels[level][code])
    }

    /// Content hash used as the codebook id.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        for n in [self.dim, self.size, self.levels.len()] {
            h.update((n as u64).to_le_bytes());
        }
        h.update(self.seed.to_le_bytes());
        let all = self.mean.iter().chain(&self.scale).chain(self.levels.iter().flatten().flatten());
        for x in all {
            h.update(x.to_bits().to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    fn check_len(&self, d: &[f64]) -> Result<()> {
        if d.len() != self.dim {
            return Err(Error::DescriptorLength { got: d.len(), expected: self.dim });
        }
        Ok(())
    }

    /// Greedy codes for the first `levels` levels.
    pub fn encode_levels(&self, d: &[f64], levels: usize) -> Result<Vec<usize>> {
        self.check_len(d)?;
        let mut r = self.standardize(d);
        let mut codes = Vec::with_capacity(levels);
        for centroids in self.levels.iter().take(levels) {
            let c = nearest_code(centroids, &r);
            for (x, y) in r.iter_mut().zip(&centroids[c]) {
                *x -= y;
            }
            codes.push(c);
        }
        Ok(codes)
    }

    pub fn encode(&self, d: &[f64]) -> Result<Vec<usize>> {
        self.encode_levels(d, self.levels.len())
    }

    /// Sum of the selected centroids mapped back to descriptor space. Fewer codes than levels decode a prefix.
    pub fn decode(&self, codes: &[usize]) -> Result<Vec<f64>> {
        if codes.len() > self.levels.len() {
            return Err(Error::Precondition(format!("{} codes for {} levels", codes.len(), self.levels.len())));
        }
        let mut z = vec![0.0; self.dim];
        for (level, &c) in codes.iter().enumerate() {
            let centroid = self.levels[level].get(c).ok_or(Error::Vocab { token: c as u32, level })?;
            for (x, y) in z.iter_mut().zip(centroid) {
                *x += y;
            }
        }
        Ok(self.destandardize(&z))
    }

    /// Squared reconstruction error in standardized space using the first `levels` levels.
    pub fn error(&self, d: &[f64], levels: usize) -> Result<f64> {
        let codes = self.encode_levels(d, levels)?;
        let rec = self.decode(&codes)?;
        Ok(self.standardize(d).iter().zip(self.standardize(&rec)).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    /// Mean squared error per vector over a corpus.
    pub fn mean_error(&self, corpus: &[Vec<f64>], levels: usize) -> Result<f64> {
        let errs: Vec<f64> = corpus.par_iter().map(|d| self.error(d, levels)).collect::<Result<_>>()?;
        Ok(errs.iter().sum::<f64>() / errs.len().max(1) as f64)
    }
}
