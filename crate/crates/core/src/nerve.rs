//! The nerve of the clustered cover, plus topology and separation reports.
//!
//! Vertices are the clusters produced per cover interval; a k-simplex is
//! recorded exactly when the (k+1)-way intersection of its clusters' member
//! sets is nonempty. Candidates are enumerated through the point-to-node
//! incidence map: a tuple of nodes can only intersect if some point lies in
//! all of them, so enumerating subsets of each point's node list is exact.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::Cluster;
use crate::error::{Error, Result};
use crate::unionfind::UnionFind;
use crate::vector::LensValues;

/// Label tallies over a node's members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    pub positive: usize,
    pub negative: usize,
    pub unlabeled: usize,
}

impl LabelStats {
    /// Majority label: `None` on a tie or when nothing is labeled.
    pub fn majority(&self) -> Option<i8> {
        match self.positive.cmp(&self.negative) {
            std::cmp::Ordering::Greater => Some(1),
            std::cmp::Ordering::Less => Some(-1),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn is_mixed(&self) -> bool {
        self.positive > 0 && self.negative > 0
    }
}

/// One vertex of the nerve: a cluster of records from one cover interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperNode {
    pub node_id: usize,
    pub interval_index: usize,
    pub cluster_index: usize,
    /// Ascending record ids.
    pub members: Vec<String>,
    pub size: usize,
    /// Mean lens value over the members.
    pub mean_lens: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label_stats: Option<LabelStats>,
}

/// A k-simplex (k >= 1) given by its ascending vertex ids; `weight` is the
/// cardinality of the members' common intersection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub weight: usize,
}

/// The nerve complex up to `max_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplicialComplex {
    pub nodes: Vec<MapperNode>,
    /// `simplices[d-1]` holds the dimension-d simplices, sorted
    /// lexicographically by vertex tuple.
    pub simplices: Vec<Vec<Simplex>>,
    pub max_dim: usize,
}

impl SimplicialComplex {
    pub fn vertex_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.simplices.first().map_or(0, Vec::len)
    }

    /// Dimension-1 simplices.
    pub fn edges(&self) -> &[Simplex] {
        self.simplices.first().map_or(&[], Vec::as_slice)
    }

    /// Fills `label_stats` on every node from a (possibly partial) label map.
    pub fn annotate_labels(&mut self, labels: &BTreeMap<String, i8>) {
        for node in &mut self.nodes {
            node.label_stats = Some(tally(&node.members, labels));
        }
    }
}

fn tally(members: &[String], labels: &BTreeMap<String, i8>) -> LabelStats {
    let mut stats = LabelStats {
        positive: 0,
        negative: 0,
        unlabeled: 0,
    };
    for m in members {
        match labels.get(m) {
            Some(1) => stats.positive += 1,
            Some(-1) => stats.negative += 1,
            _ => stats.unlabeled += 1,
        }
    }
    stats
}

/// All ascending `k`-subsets of `items`, emitted in lexicographic order.
fn for_each_subset(items: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        acc: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if acc.len() == k {
            f(acc);
            return;
        }
        let needed = k - acc.len();
        for i in start..=items.len().saturating_sub(needed) {
            acc.push(items[i]);
            rec(items, k, i + 1, acc, f);
            acc.pop();
        }
    }
    if k <= items.len() {
        rec(items, k, 0, &mut Vec::with_capacity(k), f);
    }
}

/// Builds the nerve of the per-interval clusters.
///
/// Node ids are dense `0..V`, assigned in (interval, cluster) order. Simplex
/// weights count the points shared by all vertices of the simplex. `max_dim`
/// must lie in `1..=3`.
pub fn build_nerve(
    clusters_by_interval: &[Vec<Cluster>],
    lens: &LensValues,
    max_dim: usize,
) -> Result<SimplicialComplex> {
    if !(1..=3).contains(&max_dim) {
        return Err(Error::InvalidParam(format!(
            "max_dim must lie in 1..=3, got {max_dim}"
        )));
    }

    let mut nodes = Vec::new();
    let mut incidence: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (interval_index, clusters) in clusters_by_interval.iter().enumerate() {
        for (cluster_index, cluster) in clusters.iter().enumerate() {
            let node_id = nodes.len();
            let mut sum = 0.0;
            for m in cluster.members() {
                let v = lens.get(m).ok_or_else(|| Error::UnknownRecord(m.clone()))?;
                sum += v;
                incidence.entry(m.as_str()).or_default().push(node_id);
            }
            nodes.push(MapperNode {
                node_id,
                interval_index,
                cluster_index,
                members: cluster.members().to_vec(),
                size: cluster.len(),
                mean_lens: sum / cluster.len() as f64,
                label_stats: None,
            });
        }
    }

    // Any node tuple sharing a point has a nonempty intersection, and vice
    // versa; merging per-point subset counts yields exact weights. The merge
    // is additive and keyed, so the parallel fold order cannot change it.
    let point_nodes: Vec<&Vec<usize>> = incidence.values().collect();
    let counts: BTreeMap<Vec<usize>, usize> = point_nodes
        .par_iter()
        .fold(
            BTreeMap::new,
            |mut acc: BTreeMap<Vec<usize>, usize>, node_list| {
                for k in 2..=(max_dim + 1).min(node_list.len()) {
                    for_each_subset(node_list, k, &mut |tuple| {
                        *acc.entry(tuple.to_vec()).or_insert(0) += 1;
                    });
                }
                acc
            },
        )
        .reduce(BTreeMap::new, |mut a, b| {
            for (tuple, count) in b {
                *a.entry(tuple).or_insert(0) += count;
            }
            a
        });

    let mut simplices: Vec<Vec<Simplex>> = vec![Vec::new(); max_dim];
    for (vertices, weight) in counts {
        let dim = vertices.len() - 1;
        simplices[dim - 1].push(Simplex { vertices, weight });
    }
    // BTreeMap iteration is lexicographic already; per-dim order follows.

    Ok(SimplicialComplex {
        nodes,
        simplices,
        max_dim,
    })
}

/// Connected components of the 1-skeleton: members ascending, components
/// ordered by smallest node id.
pub fn connected_components(complex: &SimplicialComplex) -> Vec<Vec<usize>> {
    let n = complex.vertex_count();
    let mut uf = UnionFind::new(n);
    for edge in complex.edges() {
        uf.union(edge.vertices[0], edge.vertices[1]);
    }
    uf.into_groups()
}

/// `(betti0, betti1)` of the 1-skeleton: component count and cycle rank.
pub fn betti_numbers_1skeleton(complex: &SimplicialComplex) -> (usize, usize) {
    let betti0 = connected_components(complex).len();
    let v = complex.vertex_count();
    let e = complex.edge_count();
    let betti1 = (e + betti0) - v;
    (betti0, betti1)
}

/// Separation statistics with respect to a (possibly partial) labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub component_count: usize,
    pub components: Vec<Vec<usize>>,
    /// Majority-label fraction of labeled memberships per component;
    /// `None` when a component has no labeled members.
    pub per_component_purity: Vec<Option<f64>>,
    /// Majority label per component; `None` on a tie or no labels.
    pub component_majority: Vec<Option<i8>>,
    /// Edges whose endpoints carry opposing majority labels.
    pub cross_edges: usize,
    /// Nodes whose members contain both labels.
    pub shared_nodes: Vec<usize>,
    pub betti0: usize,
    pub betti1: usize,
}

/// Computes components, per-component purity, cross-label edges and
/// mixed-label nodes.
///
/// Purity counts memberships (a record appearing in several nodes of the
/// component counts once per node). A node or component with equal positive
/// and negative counts gets no majority label rather than an arbitrary side.
pub fn separation_report(
    complex: &SimplicialComplex,
    labels: &BTreeMap<String, i8>,
) -> SeparationReport {
    let components = connected_components(complex);
    let (betti0, betti1) = betti_numbers_1skeleton(complex);

    let node_stats: Vec<LabelStats> = complex
        .nodes
        .iter()
        .map(|n| tally(&n.members, labels))
        .collect();

    let mut per_component_purity = Vec::with_capacity(components.len());
    let mut component_majority = Vec::with_capacity(components.len());
    for comp in &components {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for &node in comp {
            pos += node_stats[node].positive;
            neg += node_stats[node].negative;
        }
        let total = pos + neg;
        if total == 0 {
            per_component_purity.push(None);
            component_majority.push(None);
        } else {
            per_component_purity.push(Some(pos.max(neg) as f64 / total as f64));
            component_majority.push(match pos.cmp(&neg) {
                std::cmp::Ordering::Greater => Some(1),
                std::cmp::Ordering::Less => Some(-1),
                std::cmp::Ordering::Equal => None,
            });
        }
    }

    let cross_edges = complex
        .edges()
        .iter()
        .filter(|e| {
            match (
                node_stats[e.vertices[0]].majority(),
                node_stats[e.vertices[1]].majority(),
            ) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            }
        })
        .count();

    let shared_nodes = node_stats
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_mixed())
        .map(|(i, _)| i)
        .collect();

    SeparationReport {
        component_count: components.len(),
        components,
        per_component_purity,
        component_majority,
        cross_edges,
        shared_nodes,
        betti0,
        betti1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster_of(ids: &[&str]) -> Cluster {
        Cluster::from_members(ids.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn lens_for(ids: &[&str]) -> LensValues {
        let mut lens = LensValues::new();
        for (i, id) in ids.iter().enumerate() {
            lens.insert(*id, i as f64).unwrap();
        }
        lens
    }

    #[test]
    fn one_cluster_one_vertex_no_simplices() {
        let lens = lens_for(&["1", "2"]);
        let complex = build_nerve(&[vec![cluster_of(&["1", "2"])]], &lens, 1).unwrap();
        assert_eq!(complex.vertex_count(), 1);
        assert_eq!(complex.edge_count(), 0);
    }

    #[test]
    fn shared_point_makes_an_edge() {
        let lens = lens_for(&["1", "2", "3"]);
        let complex = build_nerve(
            &[vec![cluster_of(&["1", "2"])], vec![cluster_of(&["2", "3"])]],
            &lens,
            1,
        )
        .unwrap();
        assert_eq!(complex.vertex_count(), 2);
        assert_eq!(complex.edge_count(), 1);
        assert_eq!(complex.edges()[0].vertices, vec![0, 1]);
        assert_eq!(complex.edges()[0].weight, 1);
    }

    #[test]
    fn max_dim_bounds() {
        let lens = lens_for(&["1"]);
        assert!(build_nerve(&[vec![cluster_of(&["1"])]], &lens, 0).is_err());
        assert!(build_nerve(&[vec![cluster_of(&["1"])]], &lens, 4).is_err());
    }

    fn four_cycle() -> SimplicialComplex {
        // Intervals: {a,b}, {b,c}+{e,f}, {c,e} ... build a 4-cycle directly
        // from overlapping clusters: 0-1-2-3-0.
        let lens = lens_for(&["a", "b", "c", "d", "e"]);
        build_nerve(
            &[
                vec![cluster_of(&["a", "b"])],
                vec![cluster_of(&["b", "c"]), cluster_of(&["a", "e"])],
                vec![cluster_of(&["c", "d", "e"])],
            ],
            &lens,
            1,
        )
        .unwrap()
    }

    #[test]
    fn four_cycle_betti_numbers() {
        let complex = four_cycle();
        assert_eq!(complex.vertex_count(), 4);
        assert_eq!(complex.edge_count(), 4);
        let (b0, b1) = betti_numbers_1skeleton(&complex);
        assert_eq!((b0, b1), (1, 1));
        assert_eq!(connected_components(&complex).len(), 1);
    }

    #[test]
    fn tree_and_isolated_vertices_betti() {
        let lens = lens_for(&["a", "b", "c"]);
        // Path a-b-c over two intervals: tree with 2 edges.
        let tree = build_nerve(
            &[
                vec![cluster_of(&["a", "b"])],
                vec![cluster_of(&["b", "c"])],
                vec![cluster_of(&["c"])],
            ],
            &lens,
            1,
        )
        .unwrap();
        assert_eq!(betti_numbers_1skeleton(&tree), (1, 0));

        // Three isolated vertices.
        let isolated = build_nerve(
            &[vec![
                cluster_of(&["a"]),
                cluster_of(&["b"]),
                cluster_of(&["c"]),
            ]],
            &lens,
            1,
        )
        .unwrap();
        assert_eq!(betti_numbers_1skeleton(&isolated), (3, 0));
        assert_eq!(connected_components(&isolated).len(), 3);
    }

    #[test]
    fn triangle_closure_at_dim_two() {
        let lens = lens_for(&["x", "y", "z"]);
        // Three clusters all sharing point "x".
        let complex = build_nerve(
            &[
                vec![cluster_of(&["x", "y"])],
                vec![cluster_of(&["x", "z"])],
                vec![cluster_of(&["x", "y", "z"])],
            ],
            &lens,
            2,
        )
        .unwrap();
        assert_eq!(complex.vertex_count(), 3);
        // All pairs share x (or more); the triple shares x.
        assert_eq!(complex.edge_count(), 3);
        assert_eq!(complex.simplices[1].len(), 1);
        assert_eq!(complex.simplices[1][0].vertices, vec![0, 1, 2]);
        assert_eq!(complex.simplices[1][0].weight, 1);
        // Closure: every face of the triangle is a recorded edge.
        for pair in [[0, 1], [0, 2], [1, 2]] {
            assert!(complex.edges().iter().any(|e| e.vertices == pair));
        }
    }

    fn labels_of(pairs: &[(&str, i8)]) -> BTreeMap<String, i8> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn separation_two_pure_components() {
        let lens = lens_for(&["a", "b", "c", "d"]);
        let complex = build_nerve(
            &[vec![cluster_of(&["a", "b"])], vec![cluster_of(&["c", "d"])]],
            &lens,
            1,
        )
        .unwrap();
        let labels = labels_of(&[("a", 1), ("b", 1), ("c", -1), ("d", -1)]);
        let report = separation_report(&complex, &labels);
        assert_eq!(report.component_count, 2);
        assert_eq!(report.per_component_purity, vec![Some(1.0), Some(1.0)]);
        assert_eq!(report.component_majority, vec![Some(1), Some(-1)]);
        assert_eq!(report.cross_edges, 0);
        assert!(report.shared_nodes.is_empty());
        assert_eq!(report.betti0, 2);
        assert_eq!(report.betti1, 0);
    }

    #[test]
    fn separation_counts_cross_edges() {
        let lens = lens_for(&["a", "b", "c"]);
        // Edge between a (+1)-pure node and a (-1)-pure node via shared "b";
        // "b" is left unlabeled so both nodes stay pure.
        let complex = build_nerve(
            &[vec![cluster_of(&["a", "b"])], vec![cluster_of(&["b", "c"])]],
            &lens,
            1,
        )
        .unwrap();
        let labels = labels_of(&[("a", 1), ("c", -1)]);
        let report = separation_report(&complex, &labels);
        assert_eq!(report.component_count, 1);
        assert_eq!(report.cross_edges, 1);
    }

    #[test]
    fn mixed_node_has_no_majority_and_is_shared() {
        let lens = lens_for(&["a", "b"]);
        let complex = build_nerve(&[vec![cluster_of(&["a", "b"])]], &lens, 1).unwrap();
        let labels = labels_of(&[("a", 1), ("b", -1)]);
        let report = separation_report(&complex, &labels);
        assert_eq!(report.shared_nodes, vec![0]);
        assert_eq!(report.component_majority, vec![None]);
        assert_eq!(report.per_component_purity, vec![Some(0.5)]);
    }

    #[test]
    fn unlabeled_purity_is_undefined() {
        let lens = lens_for(&["a", "b"]);
        let complex = build_nerve(&[vec![cluster_of(&["a", "b"])]], &lens, 1).unwrap();
        let report = separation_report(&complex, &BTreeMap::new());
        assert_eq!(report.per_component_purity, vec![None]);
        assert_eq!(report.betti0, 1);
    }

    #[test]
    fn annotate_labels_fills_stats() {
        let lens = lens_for(&["a", "b"]);
        let mut complex = build_nerve(&[vec![cluster_of(&["a", "b"])]], &lens, 1).unwrap();
        complex.annotate_labels(&labels_of(&[("a", 1)]));
        let stats = complex.nodes[0].label_stats.unwrap();
        assert_eq!((stats.positive, stats.negative, stats.unlabeled), (1, 0, 1));
    }

    #[test]
    fn mean_lens_is_member_average() {
        let mut lens = LensValues::new();
        lens.insert("a", 0.0).unwrap();
        lens.insert("b", 1.0).unwrap();
        let complex = build_nerve(&[vec![cluster_of(&["a", "b"])]], &lens, 1).unwrap();
        assert_eq!(complex.nodes[0].mean_lens, 0.5);
    }
}
