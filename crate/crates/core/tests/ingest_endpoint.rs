//! Endpoint client behavior against an in-process mock server: cache-first
//! fetching, retry with backoff, partial-progress preservation and offline
//! determinism.

use std::time::Duration;

use fairmap_core::error::Error;
use fairmap_core::ingest::{
    cache_key, fetch_embeddings, read_cache_entry, CorpusRecord, EndpointConfig, RetryPolicy,
};
use fairmap_core::testsupport::{mock_vector, MockEmbeddingServer};
use fairmap_core::vector::Vector;

fn records(n: usize) -> Vec<CorpusRecord> {
    (0..n)
        .map(|i| CorpusRecord {
            id: format!("r{i:03}"),
            text: format!("sentence number {i}"),
            label: None,
        })
        .collect()
}

fn config(server: &MockEmbeddingServer) -> EndpointConfig {
    EndpointConfig {
        retry: RetryPolicy {
            max_attempts: 3,
            base_backoff: Duration::from_millis(5),
        },
        batch_size: 4,
        ..EndpointConfig::new(server.url(), "mock-model")
    }
}

#[test]
fn fetch_matches_the_mock_vector_table_exactly() {
    let server = MockEmbeddingServer::start(6);
    let dir = tempfile::tempdir().unwrap();
    let recs = records(10);
    let (cloud, stats) = fetch_embeddings(&recs, &config(&server), dir.path()).unwrap();
    assert_eq!(cloud.len(), 10);
    assert_eq!(cloud.dim(), 6);
    assert_eq!(stats.cache_hits, 0);
    // 10 texts in batches of 4 -> 3 requests.
    assert_eq!(server.request_count(), 3);
    for r in &recs {
        let expected = Vector::new(mock_vector("mock-model", &r.text, 6)).unwrap();
        assert_eq!(cloud.get(&r.id), Some(&expected));
    }
}

#[test]
fn warm_cache_makes_zero_requests_and_identical_clouds() {
    let server = MockEmbeddingServer::start(5);
    let dir = tempfile::tempdir().unwrap();
    let recs = records(7);
    let cfg = config(&server);
    let (first, stats1) = fetch_embeddings(&recs, &cfg, dir.path()).unwrap();
    assert!(stats1.requests_made > 0);
    let baseline = server.request_count();

    let (second, stats2) = fetch_embeddings(&recs, &cfg, dir.path()).unwrap();
    assert_eq!(
        server.request_count(),
        baseline,
        "warm cache must not hit the endpoint"
    );
    assert_eq!(stats2.cache_hits, 7);
    assert_eq!(stats2.requests_made, 0);
    assert_eq!(stats2.hit_ratio(), 1.0);
    assert_eq!(first, second, "offline replay must be bit-identical");
}

#[test]
fn transient_failures_are_retried() {
    // Two failures, then success; 3 attempts allowed.
    let server = MockEmbeddingServer::start_with_failures(4, 2);
    let dir = tempfile::tempdir().unwrap();
    let recs = records(3);
    let (cloud, stats) = fetch_embeddings(&recs, &config(&server), dir.path()).unwrap();
    assert_eq!(cloud.len(), 3);
    assert_eq!(
        stats.requests_made, 3,
        "two failed attempts plus one success"
    );
}

#[test]
fn exhausted_retries_surface_endpoint_error_and_keep_progress() {
    // One batch succeeds; from then on the server fails every request.
    let server = MockEmbeddingServer::start_with_failures(4, usize::MAX);
    let dir = tempfile::tempdir().unwrap();
    let recs = records(3);
    let err = fetch_embeddings(&recs, &config(&server), dir.path()).unwrap_err();
    assert!(matches!(err, Error::Endpoint(_)), "got {err:?}");

    // Now warm the cache for one text by hand and fail the rest: progress
    // for cached entries must survive the failed run.
    let entry = fairmap_core::ingest::EmbeddingCacheEntry {
        model: "mock-model".into(),
        text: recs[0].text.clone(),
        dim: 4,
        vector: Vector::new(mock_vector("mock-model", &recs[0].text, 4)).unwrap(),
    };
    fairmap_core::ingest::write_cache_entry(dir.path(), &entry).unwrap();
    let err = fetch_embeddings(&recs, &config(&server), dir.path()).unwrap_err();
    assert!(matches!(err, Error::Endpoint(_)));
    let key = cache_key("mock-model", &recs[0].text);
    assert!(read_cache_entry(dir.path(), &key).unwrap().is_some());
}

#[test]
fn duplicate_texts_are_fetched_once() {
    let server = MockEmbeddingServer::start(4);
    let dir = tempfile::tempdir().unwrap();
    let recs = vec![
        CorpusRecord {
            id: "a".into(),
            text: "same words".into(),
            label: None,
        },
        CorpusRecord {
            id: "b".into(),
            text: "same words".into(),
            label: None,
        },
    ];
    let (cloud, _) = fetch_embeddings(&recs, &config(&server), dir.path()).unwrap();
    assert_eq!(server.request_count(), 1);
    assert_eq!(cloud.get("a"), cloud.get("b"));
}

#[test]
fn dimension_disagreement_is_rejected() {
    let server = MockEmbeddingServer::start(4);
    let dir = tempfile::tempdir().unwrap();
    // Poison the cache with a wrong-dimension entry for one record.
    let recs = records(2);
    let entry = fairmap_core::ingest::EmbeddingCacheEntry {
        model: "mock-model".into(),
        text: recs[0].text.clone(),
        dim: 7,
        vector: Vector::new(vec![1.0; 7]).unwrap(),
    };
    fairmap_core::ingest::write_cache_entry(dir.path(), &entry).unwrap();
    let err = fetch_embeddings(&recs, &config(&server), dir.path()).unwrap_err();
    assert!(matches!(err, Error::Dimension { .. }), "got {err:?}");
}
