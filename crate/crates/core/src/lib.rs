//! Topological summaries of embedding point clouds.
//!
//! A corpus of texts is embedded into a high-dimensional point cloud, scored
//! against a concept-derived lens direction, and summarized as a small
//! simplicial complex: cover the lens image with overlapping intervals,
//! cluster each interval's preimage in the original space, and take the
//! nerve of the resulting cluster cover. Coloring nodes by mean lens value
//! makes label structure (for example fair vs unfair sentences) visible as
//! component structure.
//!
//! The whole pipeline is deterministic: identical inputs produce
//! byte-identical serialized outputs at any worker thread count.

pub mod clustering;
pub mod cover;
pub mod error;
pub mod fairness;
pub mod ingest;
pub mod nerve;
pub mod pipeline;
pub mod render;
pub mod synthetic;
#[cfg(feature = "test-support")]
pub mod testsupport;
mod unionfind;
pub mod vector;

pub use error::{Error, Result};
