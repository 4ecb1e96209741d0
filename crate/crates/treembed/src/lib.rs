//! Combinatorics for embedding groups into products of bounded-valence trees.
//!
//! The library is organised around three layers:
//!
//! * [`words`] — finite words and sentences together with the metrics of their
//!   ambient rooted trees (the word-tree and the sentence-tree);
//! * [`stats`], [`criteria`], [`diary`] — statistics over sentences, divergence
//!   criteria with machine-checkable witnesses, and the diary maps (height- and
//!   order-preserving maps between sentence-trees) built from them, including
//!   the bounded-memory "Alice" recorder with full provenance;
//! * [`coxeter`], [`embed`], [`projection`] — the hexagonal right-angled
//!   Coxeter group with its word problem, the end-to-end quasiisometric
//!   embedding of that group into a product of two bounded-valence trees, and
//!   projection complexes (quasi-trees of metric spaces) with empirical
//!   verification of their metric estimates.
//!
//! All arithmetic is exact: distances are naturals, thresholds and average
//! word lengths are rationals. Nothing here needs floating point.

pub mod coxeter;
pub mod criteria;
pub mod diary;
pub mod embed;
pub mod projection;
pub mod stats;
pub mod words;

/// Nonnegative exact rational, used for average word lengths, the criterion
/// thresholds δ/ε/N, and distortion ratios.
pub type Rat = num_rational::Ratio<u64>;

pub use words::{Alphabet, Sentence, Tok, Word};
