//! Corpus-to-phylogeny toolkit.
//!
//! `lingtree` takes pre-tagged monolingual text (for example, translations of
//! parliamentary proceedings into a single target language), extracts
//! structural features from it, and uses those features to
//!
//! * classify texts as originals vs. translations and identify the source
//!   language of a translation ([`classify`]),
//! * reconstruct a phylogenetic tree of the source languages by variance
//!   minimizing agglomerative clustering ([`phylo`]),
//! * score reconstructed trees against a gold tree with a leaf-pair
//!   squared-distance metric ([`treedist`]),
//! * measure interference phenomena such as article overuse or
//!   verb-particle constructions ([`analysis`]).
//!
//! The crate is a library first: each major capability has a runnable example
//! under `examples/`, and the [`experiments`] module orchestrates full,
//! seed-reproducible experiment runs including a synthetic corpus generator
//! for end-to-end verification without licensed corpus data.
//!
//! Tokenization and part-of-speech tagging happen *outside* this crate; all
//! ingestion goes through the two-column tagged-text format described in
//! [`corpus`].

pub mod analysis;
pub mod classify;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod features;
pub mod phylo;
pub mod render;
pub mod seed;
pub mod treedist;

pub use error::{Error, Result};

/// Library version, recorded in run manifests by the CLI.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
