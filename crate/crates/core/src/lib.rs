//! Color-fidelity toolkit for multi-object text-to-image prompts.
//!
//! - [`color`]: sRGB / CIELAB conversion, ΔE_ab and ΔE_CMC, the HTML named-color table.
//! - [`benchmark`]: deterministic construction of the paired-color prompt benchmark.
//! - [`eval`]: mask ingestion, k-means color quantization, matching, metrics, aggregation.
//! - [`edit`]: attention/color loss kernel and the inference-time editing schedule.
//! - [`report`]: table rendering and improvement deltas.
//! - [`cli`]: the `compcolor` command-line front end.

pub mod benchmark;
pub mod cli;
pub mod color;
pub mod edit;
pub mod error;
pub mod eval;
pub mod kmeans;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
