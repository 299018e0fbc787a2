#![allow(dead_code)]

use framesim_core::activation::{SpreadParams, Traversal};
use framesim_core::fn_graph::{FrameGraph, FrameId, RelationType};
use rand::rngs::StdRng;
use rand::Rng;

/// Random acyclic graph as a record stream: edges only run from
/// lower-numbered (parent) to higher-numbered (child) frames, so the result
/// is a DAG by construction. Returns the record lines so callers can mutate
/// the stream (inject back edges, dangling references) and reload.
pub fn random_dag_records(rng: &mut StdRng, max_frames: usize, max_relations: usize) -> Vec<String> {
    let n = rng.random_range(2..=max_frames);
    let mut lines: Vec<String> = (0..n)
        .map(|i| format!(r#"{{"kind":"frame","id":{i},"name":"F{i:02}","fes":[]}}"#))
        .collect();
    let m = rng.random_range(1..=max_relations);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..m {
        let a = rng.random_range(0..n - 1);
        let b = rng.random_range(a + 1..n);
        let rt = RelationType::ALL[rng.random_range(0..RelationType::ALL.len())];
        if seen.insert((rt, a, b)) {
            lines.push(format!(
                r#"{{"kind":"relation","type":"{}","parent":{a},"child":{b}}}"#,
                rt.as_str()
            ));
        }
    }
    lines
}

pub fn load_records(lines: &[String]) -> FrameGraph {
    framesim_core::fn_graph::load_frame_database(lines.join("\n").as_bytes()).unwrap()
}

/// Breadth-first distances under a traversal mode and relation filter,
/// walking the raw relation store directly. Independent of the spread
/// implementation.
pub fn bfs_distances(graph: &FrameGraph, params: &SpreadParams, start: FrameId) -> Vec<Option<u32>> {
    let n = graph.frame_count();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for rel in graph.relations() {
        if !params.allows(rel.relation_type) {
            continue;
        }
        let (p, c) = (rel.parent.index(), rel.child.index());
        match params.traversal {
            Traversal::Undirected => {
                adjacency[p].push(c);
                adjacency[c].push(p);
            }
            Traversal::ParentsOnly => adjacency[c].push(p),
            Traversal::ChildrenOnly => adjacency[p].push(c),
        }
    }
    let mut dist = vec![None; n];
    dist[start.index()] = Some(0);
    let mut queue = std::collections::VecDeque::from([start.index()]);
    while let Some(node) = queue.pop_front() {
        let d = dist[node].unwrap();
        for &next in &adjacency[node] {
            if dist[next].is_none() {
                dist[next] = Some(d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// The distance-law oracle: activation is the max over seeds of
/// energy * decay^distance, zero beyond the depth cap. Uniform weights only.
pub fn oracle_activation(
    graph: &FrameGraph,
    seeds: &[(FrameId, f64)],
    params: &SpreadParams,
) -> Vec<f64> {
    let n = graph.frame_count();
    let mut best = vec![0.0f64; n];
    for &(seed, energy) in seeds {
        let energy = energy.min(1.0);
        let dist = bfs_distances(graph, params, seed);
        for (i, d) in dist.iter().enumerate() {
            if let Some(d) = *d
                && d <= params.max_depth
            {
                let value = energy * params.decay.powi(d as i32);
                if value > best[i] {
                    best[i] = value;
                }
            }
        }
    }
    best
}
