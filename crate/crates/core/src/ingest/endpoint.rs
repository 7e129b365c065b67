//! HTTP client for an embeddings endpoint speaking the common REST shape:
//! `POST {base_url}/embeddings` with `{"model": ..., "input": [...]}` and a
//! response carrying one vector per input, indexed.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ingest::EndpointConfig;
use crate::vector::Vector;

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    index: usize,
    embedding: Vec<f64>,
}

pub(crate) struct EmbeddingsClient {
    agent: ureq::Agent,
    url: String,
    model: String,
    /// Bearer token, read once from the configured environment variable.
    /// Never logged or echoed in errors.
    token: Option<String>,
    max_attempts: usize,
    base_backoff: Duration,
    requests: AtomicUsize,
}

impl EmbeddingsClient {
    pub(crate) fn new(config: &EndpointConfig) -> Self {
        let agent = ureq::Agent::new_with_config(
            ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(60)))
                .build(),
        );
        EmbeddingsClient {
            agent,
            url: format!("{}/embeddings", config.base_url.trim_end_matches('/')),
            model: config.model.clone(),
            token: std::env::var(&config.auth_token_env_var).ok(),
            max_attempts: config.retry.max_attempts.max(1),
            base_backoff: config.retry.base_backoff,
            requests: AtomicUsize::new(0),
        }
    }

    pub(crate) fn requests_made(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    fn send(&self, texts: &[String]) -> std::result::Result<Vec<Vec<f64>>, ureq::Error> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let payload = serde_json::json!({ "model": self.model, "input": texts });
        let mut req = self.agent.post(&self.url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut response = req.send_json(&payload)?;
        let parsed: EmbeddingsResponse = response.body_mut().read_json()?;
        let mut data = parsed.data;
        data.sort_by_key(|d| d.index);
        Ok(data.into_iter().map(|d| d.embedding).collect())
    }

    /// Embeds one batch, retrying transient failures with exponential backoff.
    pub(crate) fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vector>> {
        let mut attempt = 0;
        let raw = loop {
            attempt += 1;
            match self.send(texts) {
                Ok(vectors) => break vectors,
                Err(e) => {
                    if attempt >= self.max_attempts || !retryable(&e) {
                        return Err(Error::Endpoint(format!(
                            "request failed after {attempt} attempt(s): {e}"
                        )));
                    }
                    let backoff = self.base_backoff.saturating_mul(1 << (attempt - 1).min(16));
                    std::thread::sleep(backoff);
                }
            }
        };
        if raw.len() != texts.len() {
            return Err(Error::Endpoint(format!(
                "endpoint returned {} vectors for {} inputs",
                raw.len(),
                texts.len()
            )));
        }
        raw.into_iter()
            .map(|values| {
                Vector::new(values).map_err(|e| Error::Endpoint(format!("bad embedding: {e}")))
            })
            .collect()
    }
}

/// Transport failures, 429 and 5xx are worth retrying; other HTTP statuses
/// indicate a request problem that a retry cannot fix.
fn retryable(e: &ureq::Error) -> bool {
    match e {
        ureq::Error::StatusCode(code) => *code == 429 || *code >= 500,
        _ => true,
    }
}
