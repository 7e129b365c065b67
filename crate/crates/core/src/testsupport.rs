//! In-process mock embeddings endpoint for tests (feature `test-support`).
//!
//! Serves the same REST shape the real client speaks, counts every request,
//! and derives each vector deterministically from the (model, text) pair so
//! tests can recompute expected values independently.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::Deserialize;
use sha2::{Digest, Sha256};

/// Deterministic embedding for a (model, text) pair: bytes of
/// SHA-256(model \0 text) cycled over the dimension, mapped into
/// roughly [-1, 1] with a small index-dependent tilt so no two
/// coordinates collapse.
pub fn mock_vector(model: &str, text: &str, dim: usize) -> Vec<f64> {
    let mut hasher = Sha256::new();
    hasher.update(model.as_bytes());
    hasher.update([0u8]);
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    (0..dim)
        .map(|j| {
            let byte = digest[j % digest.len()] as f64;
            let tilt = (j / digest.len()) as f64 * 0.125;
            (byte - 127.5) / 128.0 + tilt + 0.001
        })
        .collect()
}

#[derive(Deserialize)]
struct MockRequest {
    model: String,
    input: Vec<String>,
}

/// A tiny blocking HTTP server answering `POST /embeddings`.
pub struct MockEmbeddingServer {
    addr: std::net::SocketAddr,
    requests: Arc<AtomicUsize>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockEmbeddingServer {
    /// Starts a server producing `dim`-dimensional vectors.
    pub fn start(dim: usize) -> Self {
        Self::start_with_failures(dim, 0)
    }

    /// Starts a server whose first `fail_first` requests answer HTTP 500.
    pub fn start_with_failures(dim: usize, fail_first: usize) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock server");
        let addr = listener.local_addr().expect("local addr");
        let requests = Arc::new(AtomicUsize::new(0));
        let shutdown = Arc::new(AtomicBool::new(false));
        let handle = {
            let requests = Arc::clone(&requests);
            let shutdown = Arc::clone(&shutdown);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if shutdown.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let n = requests.fetch_add(1, Ordering::SeqCst);
                    let fail = n < fail_first;
                    if let Err(e) = handle_connection(stream, dim, fail) {
                        eprintln!("mock server: {e}");
                    }
                }
            })
        };
        MockEmbeddingServer {
            addr,
            requests,
            shutdown,
            handle: Some(handle),
        }
    }

    /// Base URL to hand to an `EndpointConfig`.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Number of requests received so far.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockEmbeddingServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(stream: TcpStream, dim: usize, fail: bool) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some(v) = line
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(str::trim)
            .and_then(|v| v.parse::<usize>().ok())
        {
            content_length = v;
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let mut stream = reader.into_inner();

    if fail {
        return respond(&mut stream, 500, b"{\"error\":\"synthetic failure\"}");
    }
    if !request_line.starts_with("POST ") || !request_line.contains("/embeddings") {
        return respond(&mut stream, 404, b"{\"error\":\"not found\"}");
    }
    let parsed: MockRequest = match serde_json::from_slice(&body) {
        Ok(p) => p,
        Err(_) => return respond(&mut stream, 400, b"{\"error\":\"bad request\"}"),
    };
    let data: Vec<serde_json::Value> = parsed
        .input
        .iter()
        .enumerate()
        .map(|(index, text)| {
            serde_json::json!({
                "object": "embedding",
                "index": index,
                "embedding": mock_vector(&parsed.model, text, dim),
            })
        })
        .collect();
    let payload = serde_json::json!({
        "object": "list",
        "model": parsed.model,
        "data": data,
    });
    respond(&mut stream, 200, payload.to_string().as_bytes())
}

/// Brute-force reference implementations used by oracle-equivalence tests.
/// Deliberately written with different algorithms and data structures than
/// the library paths they check.
#[allow(clippy::needless_range_loop)] // indexed loops are the point of the reference style
pub mod oracles {
    use std::collections::{BTreeMap, BTreeSet};

    /// Minimum-spanning-tree edge weights by Kruskal with explicit component
    /// relabeling (no shared union-find), sorted ascending.
    pub fn kruskal_mst_weights(dist: &[Vec<f64>]) -> Vec<f64> {
        let n = dist.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((dist[i][j], i, j));
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut label: Vec<usize> = (0..n).collect();
        let mut taken = Vec::new();
        for (w, i, j) in edges {
            if label[i] != label[j] {
                let (from, to) = (label[j], label[i]);
                for l in label.iter_mut() {
                    if *l == from {
                        *l = to;
                    }
                }
                taken.push(w);
            }
        }
        taken.sort_by(f64::total_cmp);
        taken
    }

    /// Connected components of the graph with edges `dist <= threshold`,
    /// found by breadth-first search. Members ascending, components ordered
    /// by smallest member.
    pub fn threshold_components(dist: &[Vec<f64>], threshold: f64) -> Vec<Vec<usize>> {
        let n = dist.len();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut queue = std::collections::VecDeque::from([start]);
            seen[start] = true;
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for v in 0..n {
                    if v != u && !seen[v] && dist[u][v] <= threshold {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components.sort_by_key(|c| c[0]);
        components
    }

    /// DBSCAN by the density-reachability definition: cores have at least
    /// `min_pts` points (self included) within closed `eps`; clusters are
    /// BFS closures of cores; border points join their nearest core's
    /// cluster (tie: smallest core index); noise becomes singletons.
    pub fn dbscan_partition(dist: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<Vec<usize>> {
        let n = dist.len();
        let is_core: Vec<bool> = (0..n)
            .map(|i| (0..n).filter(|&j| dist[i][j] <= eps).count() >= min_pts)
            .collect();
        let mut cluster_of = vec![usize::MAX; n];
        let mut next_cluster = 0;
        for start in 0..n {
            if !is_core[start] || cluster_of[start] != usize::MAX {
                continue;
            }
            let mut queue = std::collections::VecDeque::from([start]);
            cluster_of[start] = next_cluster;
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if is_core[v] && cluster_of[v] == usize::MAX && dist[u][v] <= eps {
                        cluster_of[v] = next_cluster;
                        queue.push_back(v);
                    }
                }
            }
            next_cluster += 1;
        }
        for i in 0..n {
            if is_core[i] {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for j in 0..n {
                if is_core[j] && dist[i][j] <= eps {
                    match best {
                        Some((d, _)) if dist[i][j] >= d => {}
                        _ => best = Some((dist[i][j], j)),
                    }
                }
            }
            if let Some((_, core)) = best {
                cluster_of[i] = cluster_of[core];
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut singles = Vec::new();
        for i in 0..n {
            if cluster_of[i] == usize::MAX {
                singles.push(vec![i]);
            } else {
                groups.entry(cluster_of[i]).or_default().push(i);
            }
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.extend(singles);
        out.sort_by_key(|c| c[0]);
        out
    }

    /// Every node tuple (sizes 2..=max_size) with nonempty member
    /// intersection, found by direct enumeration over all subsets, with the
    /// intersection cardinality as weight.
    pub fn nerve_by_subset_enumeration(
        members: &[Vec<String>],
        max_size: usize,
    ) -> BTreeMap<Vec<usize>, usize> {
        let sets: Vec<BTreeSet<&str>> = members
            .iter()
            .map(|m| m.iter().map(String::as_str).collect())
            .collect();
        let n = sets.len();
        let mut out = BTreeMap::new();
        let mut pick: Vec<usize> = Vec::new();
        fn rec(
            start: usize,
            n: usize,
            max_size: usize,
            pick: &mut Vec<usize>,
            sets: &[BTreeSet<&str>],
            out: &mut BTreeMap<Vec<usize>, usize>,
        ) {
            if pick.len() >= 2 {
                let mut inter: BTreeSet<&str> = sets[pick[0]].clone();
                for &i in &pick[1..] {
                    inter = inter.intersection(&sets[i]).copied().collect();
                }
                if !inter.is_empty() {
                    out.insert(pick.clone(), inter.len());
                }
            }
            if pick.len() == max_size {
                return;
            }
            for i in start..n {
                pick.push(i);
                rec(i + 1, n, max_size, pick, sets, out);
                pick.pop();
            }
        }
        rec(0, n, max_size, &mut pick, &sets, &mut out);
        out
    }
}

fn respond(stream: &mut TcpStream, status: u16, body: &[u8]) -> std::io::Result<()> {
    let reason = match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        _ => "Internal Server Error",
    };
    stream.write_all(
        format!(
            "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
            body.len()
        )
        .as_bytes(),
    )?;
    stream.write_all(body)?;
    stream.flush()
}
