//! Factorized embedding transplantation.
//!
//! Given a source model's subword embedding matrix, a source and an extended
//! target vocabulary, and a set of multilingual static word vectors, this crate
//! computes an initialization for every target subword:
//!
//! 1. the source embeddings are factorized into orthonormal primitive
//!    embeddings and per-subword coordinates ([`factorizer`]);
//! 2. words are segmented with the source and target vocabularies and each
//!    subword receives the mean vector of the words it occurs in
//!    ([`segmenter`], [`subword_space`]);
//! 3. target coordinates are copied for shared subwords, combined from the
//!    nearest source subwords by a cosine softmax, or drawn from a Gaussian
//!    fitted to the source coordinates ([`transplanter`]);
//! 4. the result is kept factorized or projected back to the model dimension
//!    ([`assembler`]).
//!
//! The crate is `no_std` and only needs `alloc`. The `std` feature enables
//! `std::error::Error` impls, `parallel` turns on rayon-backed data
//! parallelism. Outputs never depend on the number of worker threads.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod assembler;
mod error;
pub mod factorizer;
pub mod linalg;
pub mod matrix;
mod par;
pub mod rng;
pub mod segmenter;
pub mod subword_space;
pub mod transplanter;
pub mod vocab;

pub use assembler::{assemble, AssembledEmbedding, AssembledMatrices, AssemblyMode};
pub use error::{Error, Result};
pub use factorizer::{
    count_params, explained_variance, factorize, reconstruct, FactorizedEmbedding, ParamCount,
    SpectrumReport,
};
pub use matrix::DenseMatrix;
pub use rng::CounterRng;
pub use segmenter::{Segmenter, DEFAULT_BOUNDARY_MARKER};
pub use subword_space::{
    build_occurrence_index, build_subword_vectors, SubwordOccurrenceIndex, SubwordVectors,
};
pub use transplanter::{
    compute_source_stats, neighbor_weights, partition_vocab, transplant, InitMode, Neighbor,
    Provenance, SourceStats, TransplantConfig, TransplantReport, VocabPartition,
};
pub use vocab::{Vocabulary, WordVectors};
