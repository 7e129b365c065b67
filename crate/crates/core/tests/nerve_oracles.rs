//! Nerve correctness against brute-force subset enumeration, plus the
//! structural invariants: closure under faces, Euler consistency and
//! scheduling-independent determinism.

use std::collections::BTreeMap;

use fairmap_core::clustering::Cluster;
use fairmap_core::nerve::{betti_numbers_1skeleton, build_nerve, connected_components};
use fairmap_core::synthetic::SplitMix64;
use fairmap_core::testsupport::oracles;
use fairmap_core::vector::LensValues;

/// Random per-interval clusters over a small universe of points. Clusters
/// within one interval stay disjoint (they partition a preimage); distinct
/// intervals may share points freely.
fn random_instance(
    rng: &mut SplitMix64,
    max_points: usize,
    max_clusters: usize,
) -> (Vec<Vec<Cluster>>, LensValues) {
    let n_points = 4 + (rng.next_u64() as usize % (max_points - 3));
    let universe: Vec<String> = (0..n_points).map(|i| format!("p{i:03}")).collect();
    let mut lens = LensValues::new();
    for (i, id) in universe.iter().enumerate() {
        lens.insert(id, i as f64 * 0.1).unwrap();
    }
    let n_intervals = 1 + (rng.next_u64() as usize % 4);
    let mut total_clusters = 0;
    let mut by_interval = Vec::new();
    for _ in 0..n_intervals {
        // Sample a preimage, then split it into disjoint chunks.
        let mut members: Vec<String> = universe
            .iter()
            .filter(|_| rng.next_f64() < 0.55)
            .cloned()
            .collect();
        let mut clusters = Vec::new();
        while !members.is_empty() && total_clusters < max_clusters {
            let take = 1 + (rng.next_u64() as usize % members.len());
            let chunk: Vec<String> = members.drain(..take).collect();
            clusters.push(Cluster::from_members(chunk).unwrap());
            total_clusters += 1;
        }
        by_interval.push(clusters);
    }
    (by_interval, lens)
}

#[test]
fn nerve_matches_subset_enumeration_on_100_random_instances() {
    let mut rng = SplitMix64::new(0x4E52);
    let start = std::time::Instant::now();
    for case in 0..100 {
        let (by_interval, lens) = random_instance(&mut rng, 50, 12);
        let complex = build_nerve(&by_interval, &lens, 3).unwrap();
        let member_lists: Vec<Vec<String>> =
            complex.nodes.iter().map(|n| n.members.clone()).collect();
        let expected = oracles::nerve_by_subset_enumeration(&member_lists, 4);
        let mut got: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for per_dim in &complex.simplices {
            for s in per_dim {
                got.insert(s.vertices.clone(), s.weight);
            }
        }
        assert_eq!(got, expected, "case {case}");
    }
    assert!(
        start.elapsed().as_secs_f64() < 5.0,
        "nerve oracle suite too slow: {:?}",
        start.elapsed()
    );
}

#[test]
fn every_face_of_a_simplex_is_recorded() {
    let mut rng = SplitMix64::new(0xFACE);
    for _ in 0..50 {
        let (by_interval, lens) = random_instance(&mut rng, 30, 10);
        let complex = build_nerve(&by_interval, &lens, 3).unwrap();
        for per_dim in complex.simplices.iter().skip(1) {
            for s in per_dim {
                // Drop one vertex at a time; the face must exist one dim down.
                for skip in 0..s.vertices.len() {
                    let face: Vec<usize> = s
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, v)| *v)
                        .collect();
                    let dim = face.len() - 1;
                    assert!(
                        complex.simplices[dim - 1]
                            .iter()
                            .any(|f| f.vertices == face),
                        "missing face {face:?} of {:?}",
                        s.vertices
                    );
                }
            }
        }
    }
}

#[test]
fn euler_consistency_v_minus_e() {
    let mut rng = SplitMix64::new(0xE111);
    for _ in 0..100 {
        let (by_interval, lens) = random_instance(&mut rng, 40, 12);
        let complex = build_nerve(&by_interval, &lens, 1).unwrap();
        let (b0, b1) = betti_numbers_1skeleton(&complex);
        let v = complex.vertex_count() as i64;
        let e = complex.edge_count() as i64;
        assert_eq!(v - e, b0 as i64 - b1 as i64);
        // Components partition the vertex set.
        let comps = connected_components(&complex);
        let total: usize = comps.iter().map(Vec::len).sum();
        assert_eq!(total, complex.vertex_count());
        assert_eq!(comps.len(), b0);
    }
}

#[test]
fn nerve_is_deterministic_for_identical_inputs() {
    let mut rng = SplitMix64::new(0xDE7);
    let (by_interval, lens) = random_instance(&mut rng, 40, 12);
    let a = build_nerve(&by_interval, &lens, 3).unwrap();
    let b = build_nerve(&by_interval, &lens, 3).unwrap();
    assert_eq!(a, b);
    let json_a = serde_json::to_string(&a).unwrap();
    let json_b = serde_json::to_string(&b).unwrap();
    assert_eq!(json_a, json_b);
}
