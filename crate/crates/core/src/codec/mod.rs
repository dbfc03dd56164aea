//! Quantization, canonical ordering, residual codebooks and the token grammar.

mod grammar;
mod order;
mod rq;
mod sequence;
mod vocab;

pub use grammar::{finish, step, validity_mask, GrammarState, Phase, TokenMask};
pub use order::{canonical_order, dequantize_coord, dequantize_point, quantize_coord, quantize_point, CanonicalOrder};
pub use rq::{train_codebook, train_codebook_weighted, Codebook, KMEANS_ITERATIONS, TRAINING_SAMPLE};
pub use sequence::{
    expected_length, parse, records_from_model, tokenize, CodecConfig, ComponentRecords, EdgeRecord, HalfEdgeSlot,
    TokenSequence, VertexRecordSet,
};
pub use vocab::{TokenKind, VocabLayout, COORD_BINS, DEFAULT_MAX_LEN, DEFAULT_POINTER_MAX};
