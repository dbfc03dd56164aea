//! Shared fixtures for the benchmarks.

use vhp_core::brep::{normalize, BrepModel};
use vhp_core::codec::{Codebook, CodecConfig};
use vhp_core::pipeline::codebook_for_models;
use vhp_core::synth::{synth_corpus, CorpusSpec, FamilyCounts};

/// A small mixed corpus, normalized.
pub fn corpus(per_family: usize, seed: u64) -> Vec<BrepModel> {
    let counts = FamilyCounts {
        box_: per_family,
        prism: per_family,
        cylinder: per_family,
        through_hole: per_family,
        l_bracket: per_family,
    };
    synth_corpus(&CorpusSpec { counts, seed, ..CorpusSpec::default() })
        .expect("corpus builds")
        .iter()
        .map(|m| normalize(m).expect("normalizes").0)
        .collect()
}

pub fn codebook(models: &[BrepModel], levels: usize, size: usize) -> (Codebook, CodecConfig) {
    let cfg = CodecConfig::default();
    (codebook_for_models(models, &cfg, levels, size, 0).expect("codebook trains"), cfg)
}
