//! Corpus-fitted n-gram sequence model sampled under the grammar's validity masks.

mod ngram;
mod sample;

pub use ngram::{fit_ngram, Counts, NGramModel, DEFAULT_ORDER, DEFAULT_SMOOTHING};
pub use sample::{autocomplete, sample_many, sample_sequence, Sample, SamplerConfig};

#[cfg(test)]
mod tests;
