pub mod corpus;
pub mod primitives;

pub use corpus::{corpus_families, synth_corpus, synth_model, synth_vertex_budget, CorpusSpec, Family, FamilyCounts};
