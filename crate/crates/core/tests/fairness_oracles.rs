//! The direction construction against an independent one-pass summation
//! oracle over the shipped fixture, plus randomized invariants.

use std::path::PathBuf;

use fairmap_core::fairness::{
    build_fairness_direction, default_concept_table, fairness_score, ConceptPair,
};
use fairmap_core::ingest::load_precomputed;
use fairmap_core::synthetic::SplitMix64;
use fairmap_core::vector::Vector;

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/concepts_dim8.embtxt")
}

const FIXTURE_MODEL: &str = "fixture-model";

/// Regenerates the fixture from the deterministic mock-embedding rule.
/// Run manually with `cargo test -p fairmap-core regen -- --ignored`.
#[test]
#[ignore]
fn regen_concepts_fixture() {
    use fairmap_core::ingest::{save_embeddings, EmbeddingFormat};
    use fairmap_core::testsupport::mock_vector;
    use fairmap_core::vector::PointCloud;
    let mut cloud = PointCloud::new();
    for pair in default_concept_table() {
        for text in [pair.positive_text, pair.negative_text] {
            let v = Vector::new(mock_vector(FIXTURE_MODEL, &text, 8)).unwrap();
            cloud.insert(text, v).unwrap();
        }
    }
    std::fs::create_dir_all(fixture_path().parent().unwrap()).unwrap();
    save_embeddings(
        &cloud,
        FIXTURE_MODEL,
        &fixture_path(),
        EmbeddingFormat::Text,
    )
    .unwrap();
}

/// Minimal independent reader for the text embedding format: header lines,
/// then `id\tv0 v1 ...`. Shares no code with the library loader.
fn oracle_read_fixture() -> Vec<(String, Vec<f64>)> {
    let raw = std::fs::read_to_string(fixture_path()).expect("fixture present");
    let mut lines = raw.lines();
    for _ in 0..4 {
        lines.next().expect("header line");
    }
    lines
        .map(|line| {
            let (id, rest) = line.split_once('\t').expect("id\\tvalues");
            let values = rest
                .split(' ')
                .map(|s| s.parse::<f64>().expect("float"))
                .collect();
            (id.to_string(), values)
        })
        .collect()
}

fn oracle_unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// One-pass componentwise signed sum over the fixture, in table order.
fn oracle_direction(normalize_concepts: bool) -> Vec<f64> {
    let rows: std::collections::BTreeMap<String, Vec<f64>> =
        oracle_read_fixture().into_iter().collect();
    let table = default_concept_table();
    let dim = rows.values().next().unwrap().len();
    let mut sum = vec![0.0; dim];
    for pair in &table {
        let mut pos = rows[&pair.positive_text].clone();
        let mut neg = rows[&pair.negative_text].clone();
        if normalize_concepts {
            pos = oracle_unit(&pos);
            neg = oracle_unit(&neg);
        }
        for i in 0..dim {
            sum[i] += pos[i] - neg[i];
        }
    }
    oracle_unit(&sum)
}

fn resolved_default_table() -> Vec<ConceptPair> {
    let cloud = load_precomputed(&fixture_path()).expect("fixture parses");
    let mut table = default_concept_table();
    for pair in table.iter_mut() {
        pair.resolve_from_cloud(&cloud).expect("sentence embedded");
    }
    table
}

#[test]
fn direction_matches_independent_summation_oracle() {
    for normalize in [false, true] {
        let fd = build_fairness_direction(&resolved_default_table(), normalize).unwrap();
        let expected = oracle_direction(normalize);
        assert_eq!(fd.direction.dim(), expected.len());
        for (got, want) in fd.direction.values().iter().zip(&expected) {
            assert!(
                (got - want).abs() <= 1e-9,
                "normalize={normalize}: {got} vs {want}"
            );
        }
        assert!(fd.raw_norm > 0.0);
        assert!((fd.direction.norm() - 1.0).abs() <= 1e-9);
    }
}

#[test]
#[allow(clippy::needless_range_loop)]
fn corpus_scores_match_elementwise_cosine_oracle() {
    let fd = build_fairness_direction(&resolved_default_table(), true).unwrap();
    let cloud = load_precomputed(&fixture_path()).unwrap();
    assert_eq!(cloud.len(), 10);
    let lens = fairmap_core::fairness::score_corpus(&cloud, &fd).unwrap();
    let d = fd.direction.values();
    for (id, v) in cloud.iter() {
        let mut num = 0.0;
        let mut va = 0.0;
        for i in 0..v.dim() {
            num += v.values()[i] * d[i];
            va += v.values()[i] * v.values()[i];
        }
        let db: f64 = d.iter().map(|x| x * x).sum();
        let expected = num / (va.sqrt() * db.sqrt());
        assert!(
            (lens.get(id).unwrap() - expected).abs() <= 1e-12,
            "record {id}"
        );
    }
}

#[test]
fn fixture_scores_are_bounded_and_antisymmetric() {
    let fd = build_fairness_direction(&resolved_default_table(), true).unwrap();
    let cloud = load_precomputed(&fixture_path()).unwrap();
    for (_, v) in cloud.iter() {
        let score = fairness_score(v, &fd).unwrap();
        assert!((-1.0..=1.0).contains(&score));
        let negated = fairmap_core::vector::linear_combination(&[(-1.0, v)]).unwrap();
        let mirror = fairness_score(&negated, &fd).unwrap();
        assert!((score + mirror).abs() <= 1e-12);
    }
}

fn random_pairs(rng: &mut SplitMix64, n_pairs: usize, dim: usize) -> Vec<ConceptPair> {
    (0..n_pairs)
        .map(|i| {
            let mut pair = ConceptPair::new(
                format!("concept-{i}"),
                format!("positive sentence {i}"),
                format!("negative sentence {i}"),
            )
            .unwrap();
            pair.positive_vec =
                Some(Vector::new((0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect()).unwrap());
            pair.negative_vec =
                Some(Vector::new((0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect()).unwrap());
            pair
        })
        .collect()
}

#[test]
fn sign_antisymmetry_and_permutation_invariance_hold_on_100_random_sets() {
    let mut rng = SplitMix64::new(0xFA1);
    for case in 0..100 {
        let n_pairs = 1 + (rng.next_u64() % 8) as usize;
        let dim = 2 + (rng.next_u64() % 12) as usize;
        let pairs = random_pairs(&mut rng, n_pairs, dim);

        let fd = build_fairness_direction(&pairs, true).unwrap();

        // Swapping every polarity negates the direction bit-exactly.
        let mut swapped = pairs.clone();
        for p in swapped.iter_mut() {
            std::mem::swap(&mut p.positive_vec, &mut p.negative_vec);
            std::mem::swap(&mut p.positive_text, &mut p.negative_text);
        }
        let fd_swapped = build_fairness_direction(&swapped, true).unwrap();
        for (a, b) in fd
            .direction
            .values()
            .iter()
            .zip(fd_swapped.direction.values())
        {
            assert_eq!(*a, -*b, "case {case}");
        }

        // Permuting pair order moves the answer by at most summation
        // reordering noise.
        let mut permuted = pairs.clone();
        permuted.reverse();
        if permuted.len() > 2 {
            permuted.swap(0, 1);
        }
        let fd_permuted = build_fairness_direction(&permuted, true).unwrap();
        for (a, b) in fd
            .direction
            .values()
            .iter()
            .zip(fd_permuted.direction.values())
        {
            assert!((a - b).abs() <= 1e-12, "case {case}: {a} vs {b}");
        }

        // Scores stay inside [-1, 1] for arbitrary embeddings.
        let probe = Vector::new((0..dim).map(|_| rng.next_f64() * 20.0 - 10.0).collect()).unwrap();
        let score = fairness_score(&probe, &fd).unwrap();
        assert!((-1.0..=1.0).contains(&score), "case {case}: {score}");
    }
}
