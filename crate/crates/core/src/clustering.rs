//! Clustering of cover-set preimages in the original embedding space.
//!
//! The default method is single-linkage agglomeration cut at the first empty
//! bin of the merge-distance histogram. DBSCAN is available as an alternative;
//! its noise points become singleton clusters so every record stays in the
//! output partition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unionfind::UnionFind;
use crate::vector::{cosine_similarity, PointCloud, Vector};

/// Distance function used for clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Euclidean,
    CosineDistance,
}

impl Metric {
    pub fn distance(&self, a: &Vector, b: &Vector) -> Result<f64> {
        match self {
            Metric::Euclidean => {
                if a.dim() != b.dim() {
                    return Err(Error::Dimension {
                        expected: a.dim(),
                        found: b.dim(),
                        context: "euclidean distance".into(),
                    });
                }
                let sq = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .fold(0.0, |acc, (x, y)| acc + (x - y) * (x - y));
                Ok(sq.sqrt())
            }
            Metric::CosineDistance => Ok(1.0 - cosine_similarity(a, b)?),
        }
    }
}

/// Clustering method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMethod {
    SingleLinkageGap,
    Dbscan,
}

/// Parameters for [`cluster_preimage`].
///
/// DBSCAN here is the canonical order-independent variant: a point is core
/// when its closed eps-ball holds at least `min_pts` points (itself included),
/// clusters are the components of core points at distance <= eps, and each
/// border point joins the cluster of its nearest core point (ties broken by
/// ascending record id). Noise points become singletons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub method: ClusterMethod,
    /// Histogram bins for the single-linkage gap heuristic.
    pub num_bins: usize,
    /// DBSCAN radius; required when `method` is DBSCAN.
    pub eps: Option<f64>,
    /// DBSCAN density threshold.
    pub min_pts: usize,
    pub metric: Metric,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            method: ClusterMethod::SingleLinkageGap,
            num_bins: 10,
            eps: None,
            min_pts: 3,
            metric: Metric::Euclidean,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        match self.method {
            ClusterMethod::SingleLinkageGap => {
                if self.num_bins < 1 {
                    return Err(Error::InvalidParam("num_bins must be >= 1".into()));
                }
            }
            ClusterMethod::Dbscan => {
                let eps = self
                    .eps
                    .ok_or_else(|| Error::InvalidParam("dbscan requires eps".into()))?;
                // NaN must fail this check, hence the negated form.
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                if !(eps > 0.0) || !eps.is_finite() {
                    return Err(Error::InvalidParam(format!(
                        "dbscan eps must be positive, got {eps}"
                    )));
                }
                if self.min_pts < 1 {
                    return Err(Error::InvalidParam("dbscan min_pts must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// A nonempty, ascending-sorted, duplicate-free set of record ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    members: Vec<String>,
}

impl Cluster {
    fn new(mut members: Vec<String>) -> Self {
        members.sort();
        debug_assert!(!members.is_empty());
        Cluster { members }
    }

    /// Builds a cluster from externally produced members (sorted, deduped).
    pub fn from_members(mut members: Vec<String>) -> Result<Self> {
        members.sort();
        members.dedup();
        if members.is_empty() {
            return Err(Error::EmptyInput(
                "cluster must have at least one member".into(),
            ));
        }
        Ok(Cluster { members })
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Looks up and canonicalizes the member vectors: ascending unique ids.
fn resolve_members<'a>(
    cloud: &'a PointCloud,
    member_ids: &[String],
) -> Result<(Vec<String>, Vec<&'a Vector>)> {
    let mut ids: Vec<String> = member_ids.to_vec();
    ids.sort();
    ids.dedup();
    let mut vectors = Vec::with_capacity(ids.len());
    for id in &ids {
        let v = cloud
            .get(id)
            .ok_or_else(|| Error::UnknownRecord(id.clone()))?;
        vectors.push(v);
    }
    Ok((ids, vectors))
}

#[allow(clippy::needless_range_loop)]
fn pairwise(metric: Metric, pts: &[&Vector]) -> Result<Vec<Vec<f64>>> {
    let n = pts.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = metric.distance(pts[i], pts[j])?;
            d[i][j] = dist;
            d[j][i] = dist;
        }
    }
    Ok(d)
}

/// The `n-1` single-linkage merge heights, ascending.
///
/// These are exactly the minimum-spanning-tree edge weights of the complete
/// pairwise-distance graph, computed with Prim's algorithm on the dense graph.
pub fn single_linkage_merge_distances(
    cloud: &PointCloud,
    member_ids: &[String],
    metric: Metric,
) -> Result<Vec<f64>> {
    let (_, pts) = resolve_members(cloud, member_ids)?;
    let n = pts.len();
    if n < 2 {
        return Err(Error::EmptyInput(
            "merge distances need at least two members".into(),
        ));
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    in_tree[0] = true;
    let mut last = 0usize;
    let mut merges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_dist = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = metric.distance(pts[last], pts[j])?;
            if d < best[j] {
                best[j] = d;
            }
            if best[j] < next_dist {
                next_dist = best[j];
                next = j;
            }
        }
        merges.push(next_dist);
        in_tree[next] = true;
        last = next;
    }
    merges.sort_by(f64::total_cmp);
    Ok(merges)
}

/// Gap heuristic: histogram the merge distances over `[0, max]` with
/// `num_bins` bins and return the left edge of the first empty bin after the
/// first occupied one. `None` means no gap, i.e. a single cluster.
///
/// Bins are `[k·w, (k+1)·w)` with `w = max / num_bins`; distances equal to
/// `max` fall in the last bin.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN max must yield None
pub fn gap_threshold(merge_distances: &[f64], num_bins: usize) -> Option<f64> {
    let &max = merge_distances.last()?;
    if !(max > 0.0) || num_bins < 1 {
        return None;
    }
    let width = max / num_bins as f64;
    let mut counts = vec![0usize; num_bins];
    for &d in merge_distances {
        let bin = ((d / width) as usize).min(num_bins - 1);
        counts[bin] += 1;
    }
    let first_occupied = counts.iter().position(|&c| c > 0)?;
    for (bin, &count) in counts.iter().enumerate().skip(first_occupied + 1) {
        if count == 0 {
            return Some(width * bin as f64);
        }
    }
    None
}

/// Cuts the single-linkage structure at `threshold`: clusters are the
/// connected components of the graph with edges `distance <= threshold`.
#[allow(clippy::needless_range_loop)]
fn cut_at_threshold(ids: &[String], dist: &[Vec<f64>], threshold: f64) -> Vec<Cluster> {
    let n = ids.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i][j] <= threshold {
                uf.union(i, j);
            }
        }
    }
    uf.into_groups()
        .into_iter()
        .map(|g| Cluster::new(g.into_iter().map(|i| ids[i].clone()).collect()))
        .collect()
}

fn single_linkage_gap(
    cloud: &PointCloud,
    ids: Vec<String>,
    pts: Vec<&Vector>,
    params: &ClusterParams,
) -> Result<Vec<Cluster>> {
    if ids.len() == 1 {
        return Ok(vec![Cluster::new(ids)]);
    }
    let merges = single_linkage_merge_distances(cloud, &ids, params.metric)?;
    match gap_threshold(&merges, params.num_bins) {
        None => Ok(vec![Cluster::new(ids)]),
        Some(threshold) => {
            let dist = pairwise(params.metric, &pts)?;
            Ok(cut_at_threshold(&ids, &dist, threshold))
        }
    }
}

fn dbscan(ids: Vec<String>, pts: Vec<&Vector>, params: &ClusterParams) -> Result<Vec<Cluster>> {
    let eps = params.eps.expect("validated");
    let n = ids.len();
    let dist = pairwise(params.metric, &pts)?;
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist[i][j] <= eps).collect())
        .collect();
    let is_core: Vec<bool> = neighbors
        .iter()
        .map(|nb| nb.len() >= params.min_pts)
        .collect();

    // Components of core points under distance <= eps.
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        if !is_core[i] {
            continue;
        }
        for &j in &neighbors[i] {
            if is_core[j] {
                uf.union(i, j);
            }
        }
    }
    // Border points join the cluster of their nearest core neighbor
    // (ties broken by ascending index, i.e. ascending record id).
    let mut attach: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if is_core[i] {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &j in &neighbors[i] {
            if !is_core[j] {
                continue;
            }
            match best {
                Some((d, _)) if dist[i][j] >= d => {}
                _ => best = Some((dist[i][j], j)),
            }
        }
        attach[i] = best.map(|(_, j)| j);
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    let mut noise = Vec::new();
    for i in 0..n {
        if is_core[i] {
            let root = uf.find(i);
            groups.entry(root).or_default().push(i);
        } else if let Some(core) = attach[i] {
            let root = uf.find(core);
            groups.entry(root).or_default().push(i);
        } else {
            noise.push(i);
        }
    }
    let mut clusters: Vec<Cluster> = groups
        .into_values()
        .map(|g| Cluster::new(g.into_iter().map(|i| ids[i].clone()).collect()))
        .collect();
    clusters.extend(
        noise
            .into_iter()
            .map(|i| Cluster::new(vec![ids[i].clone()])),
    );
    clusters.sort_by(|a, b| a.members()[0].cmp(&b.members()[0]));
    Ok(clusters)
}

/// Partitions `member_ids` into clusters in the original embedding space.
///
/// Every id lands in exactly one cluster; clusters are ordered by their
/// smallest member id. Shuffling `member_ids` cannot change the result.
pub fn cluster_preimage(
    cloud: &PointCloud,
    member_ids: &[String],
    params: &ClusterParams,
) -> Result<Vec<Cluster>> {
    params.validate()?;
    let (ids, pts) = resolve_members(cloud, member_ids)?;
    if ids.is_empty() {
        return Ok(Vec::new());
    }
    match params.method {
        ClusterMethod::SingleLinkageGap => single_linkage_gap(cloud, ids, pts, params),
        ClusterMethod::Dbscan => dbscan(ids, pts, params),
    }
}
