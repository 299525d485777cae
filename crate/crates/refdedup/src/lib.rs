//! Batch record deduplication for ASR entity references.
//!
//! A stream of voice requests yields noisy reference strings: the same movie
//! title shows up as `"archive eighty one"`, `"arcade eighty one"`, and
//! friends. This crate reconstructs the latent entity distribution behind
//! such a log and uses it to pick a budget-constrained contextual-biasing
//! list:
//!
//! 1. [`corpus`] — synthesize or ingest request logs, mine weak labels
//!    (repeat pairs, click resolutions).
//! 2. [`similarity`] — n-best cooccurrence and item-item cosine features,
//!    plus a character-edit baseline.
//! 3. [`comparison`], [`clustering`], [`distribution`], [`evaluation`] —
//!    pairwise models, coreference clusters, per-entity probability mass,
//!    biasing-list selection, and replay-based scoring.
//! 4. [`manifest`], [`pipeline`], [`report`] — file-based stage
//!    orchestration behind the command-line driver.
//!
//! Everything is deterministic under a single integer seed, and every stage
//! is a pure function over immutable inputs.

pub mod clustering;
pub mod comparison;
pub mod corpus;
pub mod distribution;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod manifest;
pub mod pipeline;
pub mod presets;
pub mod report;
pub mod similarity;

pub use error::{Error, Result};
