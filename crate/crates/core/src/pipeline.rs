//! End-to-end orchestration: lens -> cover -> per-preimage clustering -> nerve.
//!
//! Worker parallelism is bounded by `threads`; results are canonically
//! ordered, so any thread count produces byte-identical downstream output.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::{cluster_preimage, ClusterParams};
use crate::cover::{assign_preimages, build_uniform_cover, CoverParams};
use crate::error::{Error, Result};
use crate::nerve::{build_nerve, SimplicialComplex};
use crate::vector::{LensValues, PointCloud};

/// Everything configurable about one mapper run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub cover: CoverParams,
    pub cluster: ClusterParams,
    /// Highest simplex dimension to record (1..=3).
    pub max_dim: usize,
    /// Scale points to unit norm before clustering; with the euclidean
    /// metric this makes cluster geometry match the cosine lens.
    pub normalize_points: bool,
    /// Worker threads for clustering and nerve candidate checks; 0 = all cores.
    pub threads: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            cover: CoverParams::default(),
            cluster: ClusterParams::default(),
            max_dim: 1,
            normalize_points: true,
            threads: 0,
        }
    }
}

/// How the lens values were produced; recorded in output metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LensSpec {
    /// e.g. "cosine" for projection onto a direction file.
    pub kind: String,
    /// SHA-256 of the direction file, when one was used.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source_sha256: Option<String>,
}

/// The complete parameter set of a run. Re-running with the same inputs and
/// metadata reproduces byte-identical outputs; execution details like thread
/// count are deliberately excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub lens: LensSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub embeddings_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<String>,
    pub point_count: usize,
    pub dim: usize,
    pub cover: CoverParams,
    pub cluster: ClusterParams,
    pub max_dim: usize,
    pub normalize_points: bool,
    pub colormap: String,
    pub color_scale: String,
}

impl RunMetadata {
    pub fn tool_string() -> String {
        format!("fairmap {}", env!("CARGO_PKG_VERSION"))
    }
}

/// Hex SHA-256 of a file's bytes, for input provenance in metadata.
pub fn sha256_hex_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

/// Runs the mapper construction over precomputed lens values.
pub fn run_mapper(
    cloud: &PointCloud,
    lens: &LensValues,
    params: &PipelineParams,
) -> Result<SimplicialComplex> {
    params.cover.validate()?;
    params.cluster.validate()?;
    if lens.is_empty() {
        return Err(Error::EmptyInput("no lens values to cover".into()));
    }

    let cluster_cloud = if params.normalize_points {
        cloud.l2_normalized()?
    } else {
        cloud.clone()
    };

    let cover = build_uniform_cover(lens, &params.cover)?;
    let assignment = assign_preimages(lens, &cover);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads)
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    pool.install(|| {
        let clusters_by_interval = assignment
            .per_interval()
            .par_iter()
            .map(|members| cluster_preimage(&cluster_cloud, members, &params.cluster))
            .collect::<Result<Vec<_>>>()?;
        build_nerve(&clusters_by_interval, lens, params.max_dim)
    })
}
