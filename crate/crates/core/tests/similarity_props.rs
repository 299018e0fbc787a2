//! Randomized properties of associative arrays and cosine comparison,
//! including a full brute-force pipeline oracle.

mod common;

use common::{load_records, oracle_activation, random_dag_records};
use framesim_core::activation::{build_relatedness_table, SpreadParams};
use framesim_core::fn_graph::{FrameGraph, FrameId};
use framesim_core::similarity::{
    align, build_array, compare_annotations, cosine, AnnotationFrames, AssociativeArray,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::{BTreeMap, BTreeSet};

fn random_annotation(rng: &mut StdRng, graph: &FrameGraph, id: &str) -> AnnotationFrames {
    let count = rng.random_range(1..=4.min(graph.frame_count()));
    let mut evoked = BTreeSet::new();
    while evoked.len() < count {
        evoked.insert(FrameId(rng.random_range(0..graph.frame_count()) as u32));
    }
    AnnotationFrames {
        annotation_id: id.to_owned(),
        evoked,
    }
}

/// Brute-force comparison: breadth-first distances, decay powers, max over
/// evoked frames, explicit zero-completed dot product. No shared code with
/// the implementation path.
fn oracle_compare(
    graph: &FrameGraph,
    a: &AnnotationFrames,
    b: &AnnotationFrames,
    params: &SpreadParams,
) -> f64 {
    let vector = |ann: &AnnotationFrames| -> Vec<f64> {
        let seeds: Vec<(FrameId, f64)> = ann.evoked.iter().map(|&f| (f, 1.0)).collect();
        let mut v = oracle_activation(graph, &seeds, params);
        for value in &mut v {
            if *value < params.threshold {
                *value = 0.0;
            }
        }
        for &(seed, energy) in &seeds {
            v[seed.index()] = v[seed.index()].max(energy);
        }
        v
    };
    let va = vector(a);
    let vb = vector(b);
    let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
    let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[test]
fn compare_matches_brute_force_pipeline() {
    let mut rng = StdRng::seed_from_u64(211);
    for _ in 0..150 {
        let graph = load_records(&random_dag_records(&mut rng, 20, 40));
        let params = SpreadParams {
            threshold: 0.0,
            ..SpreadParams::default()
        };
        let table = build_relatedness_table(&graph, &params, None).unwrap();
        let a = random_annotation(&mut rng, &graph, "a");
        let b = random_annotation(&mut rng, &graph, "b");
        let got = compare_annotations(&a, &b, &table).unwrap();
        let want = oracle_compare(&graph, &a, &b, &params);
        assert!(
            (got - want).abs() <= 1e-12,
            "got {got}, oracle {want} (evoked {:?} vs {:?})",
            a.evoked,
            b.evoked
        );
    }
}

#[test]
fn symmetry_range_and_self_similarity() {
    let mut rng = StdRng::seed_from_u64(223);
    for _ in 0..250 {
        let graph = load_records(&random_dag_records(&mut rng, 20, 40));
        let params = SpreadParams::default();
        let table = build_relatedness_table(&graph, &params, None).unwrap();
        let a = random_annotation(&mut rng, &graph, "a");
        let b = random_annotation(&mut rng, &graph, "b");
        let ab = compare_annotations(&a, &b, &table).unwrap();
        let ba = compare_annotations(&b, &a, &table).unwrap();
        assert_eq!(ab.to_bits(), ba.to_bits(), "symmetry must be exact");
        assert!((0.0..=1.0).contains(&ab), "out of range: {ab}");
        let self_sim = compare_annotations(&a, &a, &table).unwrap();
        assert!((self_sim - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn zero_padding_leaves_cosine_unchanged() {
    let mut rng = StdRng::seed_from_u64(227);
    for _ in 0..200 {
        let graph = load_records(&random_dag_records(&mut rng, 20, 40));
        let params = SpreadParams::default();
        let table = build_relatedness_table(&graph, &params, None).unwrap();
        let a = random_annotation(&mut rng, &graph, "a");
        let b = random_annotation(&mut rng, &graph, "b");
        let arr_a = build_array(&a, &table).unwrap();
        let arr_b = build_array(&b, &table).unwrap();
        let (xa, xb) = align(&arr_a, &arr_b);
        let base = cosine(&xa, &xb).unwrap();

        // Extend both with the same extra zero-valued indexes.
        let pad = |arr: &AssociativeArray| {
            let mut map: BTreeMap<FrameId, f64> = arr.iter().collect();
            for off in 0..5u32 {
                map.insert(FrameId(10_000 + off), 0.0);
            }
            AssociativeArray::from_map(&map)
        };
        let padded = cosine(&pad(&xa), &pad(&xb)).unwrap();
        assert_eq!(base.to_bits(), padded.to_bits());
    }
}

proptest! {
    /// align() produces equal union indexes and preserves all values.
    #[test]
    fn align_is_union_preserving(
        a in proptest::collection::btree_map(0u32..50, 0.0f64..=1.0, 0..12),
        b in proptest::collection::btree_map(0u32..50, 0.0f64..=1.0, 0..12),
    ) {
        let to_arr = |m: &std::collections::BTreeMap<u32, f64>| {
            AssociativeArray::from_map(
                &m.iter().map(|(&k, &v)| (FrameId(k), v)).collect(),
            )
        };
        let (xa, xb) = align(&to_arr(&a), &to_arr(&b));
        prop_assert_eq!(xa.index(), xb.index());
        let union: BTreeSet<u32> = a.keys().chain(b.keys()).copied().collect();
        prop_assert_eq!(xa.index().len(), union.len());
        for (frame, value) in xa.iter() {
            let expected = a.get(&frame.0).copied().unwrap_or(0.0);
            prop_assert_eq!(value, expected);
        }
        for (frame, value) in xb.iter() {
            let expected = b.get(&frame.0).copied().unwrap_or(0.0);
            prop_assert_eq!(value, expected);
        }
    }

    /// Cosine of any two non-zero non-negative arrays is in [0,1] and
    /// symmetric.
    #[test]
    fn cosine_bounded_and_symmetric(
        a in proptest::collection::btree_map(0u32..30, 0.01f64..=1.0, 1..10),
        b in proptest::collection::btree_map(0u32..30, 0.01f64..=1.0, 1..10),
    ) {
        let to_arr = |m: &std::collections::BTreeMap<u32, f64>| {
            AssociativeArray::from_map(
                &m.iter().map(|(&k, &v)| (FrameId(k), v)).collect(),
            )
        };
        let arr_a = to_arr(&a);
        let arr_b = to_arr(&b);
        let ab = cosine(&arr_a, &arr_b).unwrap();
        let ba = cosine(&arr_b, &arr_a).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!((0.0..=1.0).contains(&ab));
    }
}
