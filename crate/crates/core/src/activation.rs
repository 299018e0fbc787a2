//! Spread activation over the frame graph.
//!
//! Energy starts at one or more seed frames, is clamped into [0,1] during
//! pre-adjustment, and propagates outward losing a decay factor (and the
//! edge weight) per traversed edge. Competing contributions combine by max,
//! so the activation of a frame is exactly
//!
//! ```text
//! activation(n) = max over seeds s, paths s..n of
//!                 energy(s) * prod(edge weights) * decay^len(path)
//! ```
//!
//! restricted to paths of at most `max_depth` edges. With uniform weights
//! this collapses to `energy(s) * decay^dist(s, n)` for the unweighted
//! shortest-path distance. No post-adjustment step exists; max-combination
//! keeps every value in [0,1] by construction.

use crate::fn_graph::{DbError, ExternId, FrameGraph, FrameId, RelationType};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Traversal {
    /// Relation edges are usable in both directions.
    #[default]
    Undirected,
    /// Energy flows from child frames to their parents only.
    ParentsOnly,
    /// Energy flows from parent frames to their children only.
    ChildrenOnly,
}

impl Traversal {
    pub fn as_str(self) -> &'static str {
        match self {
            Traversal::Undirected => "undirected",
            Traversal::ParentsOnly => "parents_only",
            Traversal::ChildrenOnly => "children_only",
        }
    }
}

/// Propagation parameters. The defaults (decay 0.5, depth 4, threshold 0.05,
/// undirected, all relation types at weight 1.0) are artifact configuration,
/// surfaced on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadParams {
    pub decay: f64,
    pub max_depth: u32,
    pub threshold: f64,
    /// Relation types that participate in propagation; `None` means all.
    pub relation_types: Option<HashSet<RelationType>>,
    /// Per-type edge weights in (0,1]; missing types weigh 1.0.
    pub relation_weights: HashMap<RelationType, f64>,
    pub traversal: Traversal,
}

impl Default for SpreadParams {
    fn default() -> Self {
        SpreadParams {
            decay: 0.5,
            max_depth: 4,
            threshold: 0.05,
            relation_types: None,
            relation_weights: HashMap::new(),
            traversal: Traversal::Undirected,
        }
    }
}

impl SpreadParams {
    pub fn validate(&self) -> Result<(), SpreadError> {
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(SpreadError::BadParam(format!(
                "decay must be in (0,1), got {}",
                self.decay
            )));
        }
        if !(self.threshold >= 0.0 && self.threshold < 1.0) {
            return Err(SpreadError::BadParam(format!(
                "threshold must be in [0,1), got {}",
                self.threshold
            )));
        }
        for (rt, w) in &self.relation_weights {
            if !(*w > 0.0 && *w <= 1.0) {
                return Err(SpreadError::BadParam(format!(
                    "weight for {rt} must be in (0,1], got {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn allows(&self, rt: RelationType) -> bool {
        self.relation_types.as_ref().is_none_or(|set| set.contains(&rt))
    }

    pub fn weight(&self, rt: RelationType) -> f64 {
        self.relation_weights.get(&rt).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Error)]
pub enum SpreadError {
    #[error("invalid spread parameter: {0}")]
    BadParam(String),
    #[error("negative seed energy {energy} for frame {frame:?}")]
    NegativeEnergy { frame: FrameId, energy: f64 },
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("unknown seed frame {0:?}")]
    UnknownSeed(FrameId),
    #[error("unknown frame in requested subset: {0:?}")]
    UnknownSubsetFrame(FrameId),
    #[error(transparent)]
    Db(#[from] DbError),
}

/// Per-frame activation produced by one spread run. Entries below the
/// threshold are dropped, seeds are always retained.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivationMap {
    pub entries: BTreeMap<FrameId, f64>,
    pub seeds: BTreeMap<FrameId, f64>,
    pub params: SpreadParams,
}

impl ActivationMap {
    pub fn activation(&self, frame: FrameId) -> f64 {
        self.entries.get(&frame).copied().unwrap_or(0.0)
    }
}

/// Pre-adjustment: clamps every seed energy into [0,1]. Negative energy is
/// an error rather than a clamp so that caller bugs surface.
pub fn pre_adjust(
    seed_energies: &BTreeMap<FrameId, f64>,
) -> Result<BTreeMap<FrameId, f64>, SpreadError> {
    let mut out = BTreeMap::new();
    for (&frame, &energy) in seed_energies {
        if energy < 0.0 {
            return Err(SpreadError::NegativeEnergy { frame, energy });
        }
        out.insert(frame, energy.min(1.0));
    }
    Ok(out)
}

fn propagation_edges(graph: &FrameGraph, params: &SpreadParams) -> Vec<(u32, u32, f64)> {
    let mut edges = Vec::new();
    for rel in graph.relations() {
        if !params.allows(rel.relation_type) {
            continue;
        }
        let factor = params.weight(rel.relation_type) * params.decay;
        let (p, c) = (rel.parent.0, rel.child.0);
        match params.traversal {
            Traversal::Undirected => {
                edges.push((p, c, factor));
                edges.push((c, p, factor));
            }
            Traversal::ParentsOnly => edges.push((c, p, factor)),
            Traversal::ChildrenOnly => edges.push((p, c, factor)),
        }
    }
    edges
}

/// Spreads seed energy through the graph and returns the resulting
/// activation map. Pure function of (graph, seeds, params).
pub fn spread(
    graph: &FrameGraph,
    seeds: &BTreeMap<FrameId, f64>,
    params: &SpreadParams,
) -> Result<ActivationMap, SpreadError> {
    params.validate()?;
    if seeds.is_empty() {
        return Err(SpreadError::EmptySeeds);
    }
    let n = graph.frame_count();
    for &frame in seeds.keys() {
        if frame.index() >= n {
            return Err(SpreadError::UnknownSeed(frame));
        }
    }
    let seeds = pre_adjust(seeds)?;

    let edges = propagation_edges(graph, params);

    // Layered relaxation: layer d holds the best value attainable with a
    // walk of exactly d edges. Every per-edge factor is < 1, so the max over
    // layers equals the max over simple paths; evaluation order cannot
    // change the result because each value is a product of the same factors.
    let mut best = vec![0.0f64; n];
    for (&frame, &energy) in &seeds {
        best[frame.index()] = best[frame.index()].max(energy);
    }
    let mut current = best.clone();
    for _ in 0..params.max_depth {
        let mut next = vec![0.0f64; n];
        let mut moved = false;
        for &(from, to, factor) in &edges {
            let candidate = current[from as usize] * factor;
            if candidate > next[to as usize] {
                next[to as usize] = candidate;
            }
        }
        for i in 0..n {
            if next[i] > best[i] {
                best[i] = next[i];
                moved = true;
            }
        }
        current = next;
        if !moved {
            break;
        }
    }

    let mut entries = BTreeMap::new();
    for (i, &value) in best.iter().enumerate() {
        let frame = FrameId(i as u32);
        let is_seed = seeds.contains_key(&frame);
        if is_seed || (value > 0.0 && value >= params.threshold) {
            entries.insert(frame, value);
        }
    }
    Ok(ActivationMap {
        entries,
        seeds,
        params: params.clone(),
    })
}

/// The associative table: one activation map per frame, seeded with that
/// frame at energy 1.0. Row f's entry for g is the relatedness of g to f.
#[derive(Clone, Debug, PartialEq)]
pub struct RelatednessTable {
    rows: BTreeMap<FrameId, ActivationMap>,
    pub params: SpreadParams,
}

impl RelatednessTable {
    pub fn row(&self, frame: FrameId) -> Option<&ActivationMap> {
        self.rows.get(&frame)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&FrameId, &ActivationMap)> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn relatedness(&self, from: FrameId, to: FrameId) -> f64 {
        self.rows.get(&from).map_or(0.0, |row| row.activation(to))
    }

    /// Writes one line per row: `{"frame":<id>,"related":[[<id>,<act>],...]}`
    /// with rows and entries in dense-handle order. Activations round-trip
    /// bit-exactly through the shortest-representation float printing.
    pub fn write<W: Write>(&self, graph: &FrameGraph, mut out: W) -> std::io::Result<()> {
        for (&frame, map) in &self.rows {
            let ext = &graph.frame(frame).expect("row frame exists").ext_id;
            let related: Vec<(&ExternId, f64)> = map
                .entries
                .iter()
                .map(|(&f, &v)| (&graph.frame(f).expect("entry frame exists").ext_id, v))
                .collect();
            let line = serde_json::json!({ "frame": ext, "related": related });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads a table previously produced by [`RelatednessTable::write`].
    /// The file does not carry parameters, so the caller supplies the params
    /// the table was built with.
    pub fn read<R: BufRead>(
        graph: &FrameGraph,
        reader: R,
        params: SpreadParams,
    ) -> Result<RelatednessTable, TableReadError> {
        #[derive(Deserialize)]
        struct RawRow {
            frame: ExternId,
            related: Vec<(ExternId, f64)>,
        }
        let mut rows = BTreeMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(TableReadError::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawRow = serde_json::from_str(&line)
                .map_err(|e| TableReadError::Malformed { line: lineno, msg: e.to_string() })?;
            let frame = graph
                .frame_by_ext(&raw.frame)
                .ok_or_else(|| TableReadError::UnknownFrame { line: lineno, id: raw.frame.clone() })?;
            let mut entries = BTreeMap::new();
            for (ext, value) in raw.related {
                let f = graph
                    .frame_by_ext(&ext)
                    .ok_or_else(|| TableReadError::UnknownFrame { line: lineno, id: ext.clone() })?;
                entries.insert(f, value);
            }
            let seeds = BTreeMap::from([(frame, 1.0)]);
            rows.insert(
                frame,
                ActivationMap { entries, seeds, params: params.clone() },
            );
        }
        Ok(RelatednessTable { rows, params })
    }
}

#[derive(Debug, Error)]
pub enum TableReadError {
    #[error("line {line}: malformed table row: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: unknown frame id {id}")]
    UnknownFrame { line: usize, id: ExternId },
    #[error(transparent)]
    Io(std::io::Error),
}

/// Builds the relatedness table for the requested frames (default: all).
/// Rows are computed independently, in parallel, and are bit-identical to
/// individually invoked [`spread`] calls.
pub fn build_relatedness_table(
    graph: &FrameGraph,
    params: &SpreadParams,
    frames: Option<&[FrameId]>,
) -> Result<RelatednessTable, SpreadError> {
    params.validate()?;
    let all: Vec<FrameId>;
    let wanted: &[FrameId] = match frames {
        Some(subset) => {
            for &f in subset {
                if f.index() >= graph.frame_count() {
                    return Err(SpreadError::UnknownSubsetFrame(f));
                }
            }
            subset
        }
        None => {
            all = graph.frames().map(|f| f.id).collect();
            &all
        }
    };
    let rows = wanted
        .par_iter()
        .map(|&f| {
            let seeds = BTreeMap::from([(f, 1.0)]);
            spread(graph, &seeds, params).map(|map| (f, map))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    Ok(RelatednessTable { rows, params: params.clone() })
}
