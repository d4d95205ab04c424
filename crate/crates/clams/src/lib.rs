//! Cluster ambiguity estimation for 2-D scatterplots.
//!
//! A scatterplot is decomposed into Gaussian components by EM (component
//! count selected by BIC plus the Kneedle elbow), every component pair is
//! scored for human-judged separability by a trained tree-ensemble
//! regressor, the separability is converted to binary-entropy local
//! ambiguity, and the per-pair ambiguities are averaged into the plot's
//! ambiguity score.
//!
//! The crate also ships the surrounding machinery: synthetic stimulus
//! generators and a surrogate label oracle, external clustering validation
//! measures for ground-truth disagreement, a clustering-benchmark
//! rank-stability harness, and an accuracy-constrained ambiguity reducer
//! for embeddings.

pub mod ambiguity;
pub mod bench;
pub mod datagen;
pub mod error;
pub mod evm;
pub mod features;
pub mod gmm;
pub mod reducer;
pub mod separability;
pub mod svg;
pub mod types;
pub mod util;

pub use error::{ClamsError, Result};
