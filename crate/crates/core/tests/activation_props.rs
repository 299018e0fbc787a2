//! Randomized properties of the spread-activation engine, checked against a
//! brute-force breadth-first distance oracle.

mod common;

use common::{load_records, oracle_activation, random_dag_records};
use framesim_core::activation::{build_relatedness_table, spread, SpreadParams, Traversal};
use framesim_core::fn_graph::FrameId;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;

fn random_seeds(rng: &mut StdRng, frames: usize) -> BTreeMap<FrameId, f64> {
    let count = rng.random_range(1..=3.min(frames));
    let mut seeds = BTreeMap::new();
    while seeds.len() < count {
        let frame = FrameId(rng.random_range(0..frames) as u32);
        seeds.insert(frame, rng.random_range(0.05..1.0));
    }
    seeds
}

#[test]
fn matches_distance_law_oracle_on_random_dags() {
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..120 {
        let graph = load_records(&random_dag_records(&mut rng, 20, 40));
        let seeds = random_seeds(&mut rng, graph.frame_count());
        let seed_vec: Vec<(FrameId, f64)> = seeds.iter().map(|(&f, &e)| (f, e)).collect();
        for traversal in [Traversal::Undirected, Traversal::ParentsOnly, Traversal::ChildrenOnly] {
            for decay in [0.3, 0.5, 0.9] {
                for max_depth in [0u32, 1, 2, 4] {
                    let params = SpreadParams {
                        decay,
                        max_depth,
                        threshold: 0.0,
                        traversal,
                        ..SpreadParams::default()
                    };
                    let map = spread(&graph, &seeds, &params).unwrap();
                    let expected = oracle_activation(&graph, &seed_vec, &params);
                    for (i, &from_distance) in expected.iter().enumerate() {
                        let frame = FrameId(i as u32);
                        let got = map.activation(frame);
                        let want = if seeds.contains_key(&frame) {
                            from_distance.max(seeds[&frame])
                        } else {
                            from_distance
                        };
                        assert!(
                            (got - want).abs() <= 1e-12,
                            "frame {i}: got {got}, oracle {want}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn activations_stay_in_unit_interval() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let graph = load_records(&random_dag_records(&mut rng, 20, 40));
        let seeds = random_seeds(&mut rng, graph.frame_count());
        let map = spread(&graph, &seeds, &SpreadParams::default()).unwrap();
        for (&frame, &value) in &map.entries {
            assert!((0.0..=1.0).contains(&value), "frame {frame:?}: {value}");
        }
    }
}

#[test]
fn raising_depth_never_decreases_activation() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..60 {
        let graph = load_records(&random_dag_records(&mut rng, 20, 40));
        let seeds = random_seeds(&mut rng, graph.frame_count());
        let mut previous: Option<BTreeMap<FrameId, f64>> = None;
        for max_depth in 0..=5 {
            let params = SpreadParams {
                max_depth,
                threshold: 0.0,
                ..SpreadParams::default()
            };
            let map = spread(&graph, &seeds, &params).unwrap();
            if let Some(prev) = &previous {
                for (&frame, &value) in prev {
                    let now = map.activation(frame);
                    assert!(
                        now >= value - 0.0,
                        "depth {max_depth} dropped {frame:?}: {value} -> {now}"
                    );
                }
            }
            previous = Some(map.entries);
        }
    }
}

#[test]
fn no_non_seed_entry_below_threshold() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..60 {
        let graph = load_records(&random_dag_records(&mut rng, 20, 40));
        let seeds = random_seeds(&mut rng, graph.frame_count());
        let threshold = rng.random_range(0.0..0.5);
        let params = SpreadParams { threshold, ..SpreadParams::default() };
        let map = spread(&graph, &seeds, &params).unwrap();
        for (&frame, &value) in &map.entries {
            if !seeds.contains_key(&frame) {
                assert!(value >= threshold, "{frame:?}: {value} < {threshold}");
            }
        }
        for &frame in seeds.keys() {
            assert!(map.entries.contains_key(&frame), "seed {frame:?} dropped");
        }
    }
}

#[test]
fn no_activation_exceeds_max_seed_energy() {
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..60 {
        let graph = load_records(&random_dag_records(&mut rng, 20, 40));
        let seeds = random_seeds(&mut rng, graph.frame_count());
        let cap = seeds.values().copied().fold(0.0, f64::max);
        let map = spread(&graph, &seeds, &SpreadParams::default()).unwrap();
        for &value in map.entries.values() {
            assert!(value <= cap + 1e-15);
        }
    }
}

#[test]
fn table_rows_bit_identical_to_individual_spreads() {
    let mut rng = StdRng::seed_from_u64(19);
    for _ in 0..20 {
        let graph = load_records(&random_dag_records(&mut rng, 15, 30));
        let params = SpreadParams::default();
        let table = build_relatedness_table(&graph, &params, None).unwrap();
        for frame in graph.frames().map(|f| f.id) {
            let direct = spread(&graph, &BTreeMap::from([(frame, 1.0)]), &params).unwrap();
            let row = table.row(frame).unwrap();
            assert_eq!(row.entries.len(), direct.entries.len());
            for (a, b) in row.entries.iter().zip(direct.entries.iter()) {
                assert_eq!(a.0, b.0);
                assert_eq!(a.1.to_bits(), b.1.to_bits());
            }
        }
    }
}

#[test]
fn table_serialization_round_trips_on_random_graphs() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..20 {
        let graph = load_records(&random_dag_records(&mut rng, 15, 30));
        let params = SpreadParams::default();
        let table = build_relatedness_table(&graph, &params, None).unwrap();
        let mut buf = Vec::new();
        table.write(&graph, &mut buf).unwrap();
        let reread = framesim_core::activation::RelatednessTable::read(
            &graph,
            buf.as_slice(),
            params,
        )
        .unwrap();
        assert_eq!(table, reread);
    }
}
