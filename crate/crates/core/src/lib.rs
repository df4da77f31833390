//! Correlation coefficients as similarity measures for word and sentence
//! embeddings.
//!
//! Each embedding is treated as a sample of `D` scalar observations. Under
//! that view cosine similarity is (almost) Pearson's `r`, and when the
//! samples are clearly non-normal the rank coefficients (Spearman, Kendall)
//! tend to capture association better. The crate provides:
//!
//! - [`embeddings`]: text (GloVe/fastText) and word2vec binary loaders,
//!   tokenization and averaged sentence vectors.
//! - [`measures`]: cosine, Pearson, Spearman, Kendall tau-b, APSynP,
//!   ranking and winsorization.
//! - [`normality`]: Shapiro-Wilk, normality and mean censuses, Q-Q and
//!   histogram data.
//! - [`bootstrap`]: BCa confidence intervals on paired score differences.
//! - [`eval`]: word-similarity and STS benchmark scoring and sweeps.

pub mod bootstrap;
pub mod embeddings;
mod error;
pub mod eval;
pub mod manifest;
pub mod measures;
pub mod normal;
pub mod normality;

pub use error::{Error, Result};
pub use measures::{MeasureKind, VectorSample};

/// Crate version, echoed into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
