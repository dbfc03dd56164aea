use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ngram::NGramModel;
use crate::codec::{step, validity_mask, GrammarState, Phase, TokenMask, VocabLayout, DEFAULT_MAX_LEN};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub temperature: f64,
    /// Always take the most likely allowed token (ties to the smallest id).
    pub greedy: bool,
    pub max_len: usize,
    /// Vertices per component; capped by the layout's pointer range.
    pub max_vertices: u32,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { seed: 0, temperature: 1.0, greedy: false, max_len: DEFAULT_MAX_LEN, max_vertices: u32::MAX }
    }
}

impl SamplerConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Precondition("temperature must be positive".into()));
        }
        if self.max_len < 2 {
            return Err(Error::Precondition("max_len must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tokens: Vec<u32>,
    pub seed: u64,
    /// Stopped by the length limit rather than by the model.
    pub truncated: bool,
    /// Ends in `<end>` with a complete grammar replay.
    pub complete: bool,
}

/// Grammar mask with the vertex cap applied.
fn sampler_mask(state: &GrammarState, layout: &VocabLayout, cfg: &SamplerConfig) -> TokenMask {
    let mut m = validity_mask(state, layout);
    if state.phase == Phase::Open && state.component_vertices >= cfg.max_vertices {
        m.0.retain(|r| *r != layout.coord_range());
    }
    m
}

fn pick_uniform(mask: &TokenMask, mut k: usize) -> u32 {
    for r in &mask.0 {
        if k < r.len() {
            return r.start + k as u32;
        }
        k -= r.len();
    }
    unreachable!("index within mask length")
}

fn draw(model: &NGramModel, history: &[u32], mask: &TokenMask, cfg: &SamplerConfig, rng: &mut ChaCha8Rng) -> u32 {
    assert!(!mask.is_empty(), "grammar masks are never empty before <end>");
    let counts = model.counts(history);
    let seen = || counts.next.iter().filter(|(t, _)| mask.contains(**t));
    if cfg.greedy {
        return seen().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&t, _)| t).unwrap_or_else(|| pick_uniform(mask, 0));
    }
    let alpha = model.smoothing;
    if cfg.temperature == 1.0 {
        // (c_t + α) splits into the seen counts plus a uniform α per allowed token.
        let seen_mass: u64 = seen().map(|(_, &c)| c).sum();
        let total = seen_mass as f64 + alpha * mask.len() as f64;
        let x = rng.gen::<f64>() * total;
        if x < seen_mass as f64 {
            let mut left = x;
            for (&t, &c) in seen() {
                if left < c as f64 {
                    return t;
                }
                left -= c as f64;
            }
        }
        return pick_uniform(mask, rng.gen_range(0..mask.len()));
    }
    let inv = 1.0 / cfg.temperature;
    let weights: Vec<(u32, f64)> = mask
        .iter()
        .map(|t| (t, (counts.next.get(&t).copied().unwrap_or(0) as f64 + alpha).powf(inv)))
        .collect();
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let mut x = rng.gen::<f64>() * total;
    for &(t, w) in &weights {
        if x < w {
            return t;
        }
        x -= w;
    }
    weights.last().expect("nonempty mask").0
}

/// Continue `tokens` (already accepted, ending in `state`) until `<end>` or the length limit.
fn extend(model: &NGramModel, layout: &VocabLayout, cfg: &SamplerConfig, mut tokens: Vec<u32>, mut state: GrammarState) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_len = cfg.max_len.max(tokens.len());
    while state.phase != Phase::Done && tokens.len() < max_len {
        let mask = sampler_mask(&state, layout, cfg);
        let t = if tokens.len() + 1 == max_len && mask.contains(layout.end()) {
            layout.end()
        } else {
            draw(model, &tokens, &mask, cfg, &mut rng)
        };
        state = step(&state, t, layout).expect("sampled tokens lie in the mask");
        tokens.push(t);
        if tokens.len() == max_len && t == layout.end() && state.phase == Phase::Done {
            return Sample { tokens, seed: cfg.seed, truncated: true, complete: true };
        }
    }
    let complete = state.phase == Phase::Done;
    Sample { tokens, seed: cfg.seed, truncated: !complete, complete }
}

fn check_layout(model: &NGramModel, layout: &VocabLayout) -> Result<()> {
    model.check()?;
    if model.layout_hash != layout.hash() || model.vocab_size != layout.size() {
        return Err(Error::Precondition("n-gram model was fitted on a different vocabulary layout".into()));
    }
    Ok(())
}

pub fn sample_sequence(model: &NGramModel, layout: &VocabLayout, cfg: &SamplerConfig) -> Result<Sample> {
    cfg.check()?;
    check_layout(model, layout)?;
    Ok(extend(model, layout, cfg, Vec::new(), GrammarState::default()))
}

/// `count` samples, sample `i` seeded with `seed + i`.
pub fn sample_many(model: &NGramModel, layout: &VocabLayout, cfg: &SamplerConfig, count: usize) -> Result<Vec<Sample>> {
    cfg.check()?;
    check_layout(model, layout)?;
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let c = SamplerConfig { seed: cfg.seed.wrapping_add(i), ..*cfg };
            extend(model, layout, &c, Vec::new(), GrammarState::default())
        })
        .collect())
}

/// Sample a continuation of a prefix made of `<start>` and zero or more whole
/// components, each closed by `<sep>`.
pub fn autocomplete(prefix: &[u32], model: &NGramModel, layout: &VocabLayout, cfg: &SamplerConfig) -> Result<Sample> {
    cfg.check()?;
    check_layout(model, layout)?;
    let state = prefix.iter().try_fold(GrammarState::default(), |s, &t| step(&s, t, layout))?;
    let at_boundary = state.phase == Phase::Coord(0) && prefix.last().is_some_and(|&t| t == layout.start() || t == layout.sep());
    if !at_boundary {
        return Err(Error::Precondition("prefix must end with <start> or a component-closing <sep>".into()));
    }
    Ok(extend(model, layout, cfg, prefix.to_vec(), state))
}
