//! Corpus loading, embedding retrieval and the on-disk embedding cache.
//!
//! The cache holds one immutable JSON file per (model, text) pair, named by
//! the hex SHA-256 of `model \0 text`. Writes go through a temp file and a
//! rename, so concurrent runs against the same directory are safe and an
//! interrupted fetch keeps every batch that completed.

mod endpoint;
mod formats;

pub use formats::{
    corpus_labels, load_corpus, load_embeddings, load_precomputed, save_corpus, save_embeddings,
    CorpusRecord, EmbeddingFormat,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::vector::{PointCloud, Vector};
use endpoint::EmbeddingsClient;

/// Retry schedule for endpoint requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: usize,
    pub base_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_backoff: Duration::from_millis(250),
        }
    }
}

/// Connection settings for the embeddings endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token; the token
    /// itself is never stored or logged.
    pub auth_token_env_var: String,
    pub max_concurrent_requests: usize,
    pub retry: RetryPolicy,
    pub batch_size: usize,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model: model.into(),
            auth_token_env_var: "EMBEDDINGS_API_KEY".into(),
            max_concurrent_requests: 4,
            retry: RetryPolicy::default(),
            batch_size: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_concurrent_requests < 1 {
            return Err(Error::InvalidParam(
                "max_concurrent_requests must be >= 1".into(),
            ));
        }
        if self.retry.max_attempts < 1 {
            return Err(Error::InvalidParam(
                "retry.max_attempts must be >= 1".into(),
            ));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidParam("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// One cached embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCacheEntry {
    pub model: String,
    pub text: String,
    pub dim: usize,
    pub vector: Vector,
}

/// Deterministic cache key: hex SHA-256 over `model \0 text`.
pub fn cache_key(model: &str, text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(model.as_bytes());
    hasher.update([0u8]);
    hasher.update(text.as_bytes());
    hex::encode(hasher.finalize())
}

fn entry_path(cache_dir: &Path, key: &str) -> PathBuf {
    cache_dir.join(key)
}

/// Reads a cache entry; `Ok(None)` when absent.
pub fn read_cache_entry(cache_dir: &Path, key: &str) -> Result<Option<EmbeddingCacheEntry>> {
    let path = entry_path(cache_dir, key);
    let raw = match std::fs::read(&path) {
        Ok(raw) => raw,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(&path, e)),
    };
    let entry: EmbeddingCacheEntry = serde_json::from_slice(&raw)
        .map_err(|e| Error::parse(&path, 0, format!("corrupt cache entry: {e}")))?;
    Ok(Some(entry))
}

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Writes a cache entry atomically (temp file + rename).
pub fn write_cache_entry(cache_dir: &Path, entry: &EmbeddingCacheEntry) -> Result<()> {
    let key = cache_key(&entry.model, &entry.text);
    let tmp = cache_dir.join(format!(
        ".tmp.{key}.{}.{}",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::SeqCst)
    ));
    let body = serde_json::to_vec(entry)
        .map_err(|e| Error::InvalidParam(format!("unserializable cache entry: {e}")))?;
    std::fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    let final_path = entry_path(cache_dir, &key);
    std::fs::rename(&tmp, &final_path).map_err(|e| Error::io(&final_path, e))
}

/// Outcome counters for one fetch run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FetchStats {
    pub total: usize,
    pub cache_hits: usize,
    /// HTTP requests actually issued (including retries).
    pub requests_made: usize,
}

impl FetchStats {
    pub fn hit_ratio(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.cache_hits as f64 / self.total as f64
        }
    }
}

/// Embeds every corpus record, consulting the cache first.
///
/// Misses are fetched in batches with at most `max_concurrent_requests`
/// in-flight requests; each completed batch is written to the cache before
/// the fetch finishes, so endpoint failures preserve partial progress. All
/// vectors must agree on dimension.
pub fn fetch_embeddings(
    records: &[CorpusRecord],
    config: &EndpointConfig,
    cache_dir: &Path,
) -> Result<(PointCloud, FetchStats)> {
    config.validate()?;
    std::fs::create_dir_all(cache_dir).map_err(|e| Error::io(cache_dir, e))?;

    let mut cloud = PointCloud::new();
    let mut stats = FetchStats {
        total: records.len(),
        ..FetchStats::default()
    };
    // text -> ids that share it; fetched at most once per distinct text.
    let mut missing: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in records {
        let key = cache_key(&config.model, &r.text);
        match read_cache_entry(cache_dir, &key)? {
            Some(entry) => {
                stats.cache_hits += 1;
                cloud.insert(&r.id, entry.vector)?;
            }
            None => missing
                .entry(r.text.clone())
                .or_default()
                .push(r.id.clone()),
        }
    }
    if missing.is_empty() {
        return Ok((cloud, stats));
    }

    let texts: Vec<String> = missing.keys().cloned().collect();
    let batches: Vec<&[String]> = texts.chunks(config.batch_size).collect();
    let client = EmbeddingsClient::new(config);
    let fetched: Mutex<BTreeMap<String, Vector>> = Mutex::new(BTreeMap::new());
    let first_error: Mutex<Option<Error>> = Mutex::new(None);
    let failed = AtomicBool::new(false);
    let next_batch = AtomicUsize::new(0);

    let workers = config.max_concurrent_requests.min(batches.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failed.load(Ordering::SeqCst) {
                    return;
                }
                let i = next_batch.fetch_add(1, Ordering::SeqCst);
                if i >= batches.len() {
                    return;
                }
                let batch = batches[i];
                match client.embed_batch(batch) {
                    Ok(vectors) => {
                        for (text, vector) in batch.iter().zip(vectors) {
                            let entry = EmbeddingCacheEntry {
                                model: config.model.clone(),
                                text: text.clone(),
                                dim: vector.dim(),
                                vector,
                            };
                            if let Err(e) = write_cache_entry(cache_dir, &entry) {
                                failed.store(true, Ordering::SeqCst);
                                first_error.lock().unwrap().get_or_insert(e);
                                return;
                            }
                            fetched.lock().unwrap().insert(text.clone(), entry.vector);
                        }
                    }
                    Err(e) => {
                        failed.store(true, Ordering::SeqCst);
                        first_error.lock().unwrap().get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });

    stats.requests_made = client.requests_made();
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let fetched = fetched.into_inner().unwrap();
    for (text, ids) in &missing {
        let vector = fetched
            .get(text)
            .ok_or_else(|| Error::Endpoint(format!("no embedding returned for `{text}`")))?;
        for id in ids {
            cloud.insert(id, vector.clone())?;
        }
    }
    Ok((cloud, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_key_is_stable_and_sensitive() {
        let k = cache_key("model-a", "hello");
        assert_eq!(k, cache_key("model-a", "hello"));
        assert_ne!(k, cache_key("model-b", "hello"));
        assert_ne!(k, cache_key("model-a", "hello "));
        assert_ne!(k, cache_key("model-a", "hellp"));
        assert_eq!(k.len(), 64);
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let entry = EmbeddingCacheEntry {
            model: "m".into(),
            text: "t".into(),
            dim: 3,
            vector: Vector::new(vec![0.1, 0.2, 0.3]).unwrap(),
        };
        write_cache_entry(dir.path(), &entry).unwrap();
        let key = cache_key("m", "t");
        let loaded = read_cache_entry(dir.path(), &key).unwrap().unwrap();
        assert_eq!(loaded, entry);
        assert!(read_cache_entry(dir.path(), &cache_key("m", "other"))
            .unwrap()
            .is_none());
    }

    #[test]
    fn empty_record_list_yields_empty_cloud() {
        let dir = tempfile::tempdir().unwrap();
        let config = EndpointConfig::new("http://127.0.0.1:1", "m");
        let (cloud, stats) = fetch_embeddings(&[], &config, dir.path()).unwrap();
        assert!(cloud.is_empty());
        assert_eq!(stats.requests_made, 0);
        assert_eq!(stats.hit_ratio(), 1.0);
    }

    #[test]
    fn warm_cache_never_touches_the_network() {
        let dir = tempfile::tempdir().unwrap();
        let record = CorpusRecord {
            id: "r1".into(),
            text: "warm".into(),
            label: None,
        };
        write_cache_entry(
            dir.path(),
            &EmbeddingCacheEntry {
                model: "m".into(),
                text: "warm".into(),
                dim: 2,
                vector: Vector::new(vec![1.0, 2.0]).unwrap(),
            },
        )
        .unwrap();
        // Port 1 would fail instantly if contacted.
        let config = EndpointConfig::new("http://127.0.0.1:1", "m");
        let (cloud, stats) =
            fetch_embeddings(std::slice::from_ref(&record), &config, dir.path()).unwrap();
        assert_eq!(cloud.len(), 1);
        assert_eq!(stats.cache_hits, 1);
        assert_eq!(stats.requests_made, 0);
    }
}
