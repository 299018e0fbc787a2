//! Associative arrays and cosine similarity between annotations.
//!
//! An annotation is reduced to its set of directly evoked frames; the
//! relatedness table expands that set into a sparse frame-indexed activation
//! vector (per-index max across evoked frames). Two vectors are compared by
//! zero-completing each against the other's index and taking the standard
//! cosine, which lands in [0,1] because activations are non-negative.

use crate::activation::RelatednessTable;
use crate::fn_graph::{ExternId, FrameGraph, FrameId};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// The frames directly evoked by one annotation (caption parse or manual
/// image labels). Set semantics: duplicates collapse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationFrames {
    pub annotation_id: String,
    pub evoked: BTreeSet<FrameId>,
}

impl AnnotationFrames {
    pub fn new(annotation_id: impl Into<String>, evoked: impl IntoIterator<Item = FrameId>) -> Self {
        AnnotationFrames {
            annotation_id: annotation_id.into(),
            evoked: evoked.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.evoked.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("annotation `{0}` evokes no frames; similarity is undefined")]
    EmptyAnnotation(String),
    #[error("evoked frame {0:?} has no relatedness table row")]
    MissingTableRow(FrameId),
    #[error("zero-norm associative array; similarity is undefined")]
    ZeroNorm,
    #[error("line {line}: malformed associative-array record: {msg}")]
    MalformedRecord { line: usize, msg: String },
    #[error("unknown frame id {0} in associative-array record")]
    UnknownFrame(ExternId),
}

/// Sparse frame-indexed activation vector: a strictly ascending index of
/// dense frame handles and one value in [0,1] per index entry.
#[derive(Clone, Debug, PartialEq)]
pub struct AssociativeArray {
    index: Vec<FrameId>,
    values: Vec<f64>,
}

impl AssociativeArray {
    /// Builds from (frame, value) pairs; the map keying makes the index
    /// canonical and duplicate-free.
    pub fn from_map(entries: &BTreeMap<FrameId, f64>) -> Self {
        AssociativeArray {
            index: entries.keys().copied().collect(),
            values: entries.values().copied().collect(),
        }
    }

    pub fn index(&self) -> &[FrameId] {
        &self.index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FrameId, f64)> + '_ {
        self.index.iter().copied().zip(self.values.iter().copied())
    }

    /// One-line record `{"annotation":<id>,"frames":[[<frame id>,<value>],...]}`
    /// sorted by frame id, for debugging and cross-implementation comparison.
    pub fn to_record(&self, annotation_id: &str, graph: &FrameGraph) -> String {
        let frames: Vec<(&ExternId, f64)> = self
            .iter()
            .map(|(f, v)| (&graph.frame(f).expect("indexed frame exists").ext_id, v))
            .collect();
        serde_json::json!({ "annotation": annotation_id, "frames": frames }).to_string()
    }

    /// Parses a record produced by [`AssociativeArray::to_record`].
    pub fn from_record(
        graph: &FrameGraph,
        line: &str,
        lineno: usize,
    ) -> Result<(String, AssociativeArray), SimilarityError> {
        #[derive(Deserialize)]
        struct Raw {
            annotation: String,
            frames: Vec<(ExternId, f64)>,
        }
        let raw: Raw = serde_json::from_str(line).map_err(|e| SimilarityError::MalformedRecord {
            line: lineno,
            msg: e.to_string(),
        })?;
        let mut entries = BTreeMap::new();
        for (ext, value) in raw.frames {
            let frame = graph
                .frame_by_ext(&ext)
                .ok_or(SimilarityError::UnknownFrame(ext))?;
            entries.insert(frame, value);
        }
        Ok((raw.annotation, AssociativeArray::from_map(&entries)))
    }
}

/// Expands an annotation into its associative array: per frame, the max
/// activation that any evoked frame's table row assigns to it. Directly
/// evoked frames carry 1.0 because every table row self-activates at 1.0.
pub fn build_array(
    ann: &AnnotationFrames,
    table: &RelatednessTable,
) -> Result<AssociativeArray, SimilarityError> {
    let mut acc: BTreeMap<FrameId, f64> = BTreeMap::new();
    for &evoked in &ann.evoked {
        let row = table
            .row(evoked)
            .ok_or(SimilarityError::MissingTableRow(evoked))?;
        for (&frame, &value) in &row.entries {
            let slot = acc.entry(frame).or_insert(0.0);
            if value > *slot {
                *slot = value;
            }
        }
    }
    Ok(AssociativeArray::from_map(&acc))
}

/// Zero-completion: re-indexes both arrays over the union of their indexes,
/// filling missing positions with 0.0.
pub fn align(a1: &AssociativeArray, a2: &AssociativeArray) -> (AssociativeArray, AssociativeArray) {
    let union: BTreeSet<FrameId> = a1.index.iter().chain(a2.index.iter()).copied().collect();
    let project = |arr: &AssociativeArray| {
        let mut map: BTreeMap<FrameId, f64> = union.iter().map(|&f| (f, 0.0)).collect();
        for (f, v) in arr.iter() {
            map.insert(f, v);
        }
        AssociativeArray::from_map(&map)
    };
    (project(a1), project(a2))
}

/// Standard cosine between two associative arrays, aligning them first when
/// their indexes differ. Non-negative values put the result in [0,1]; a
/// zero-norm operand makes the similarity undefined.
pub fn cosine(a1: &AssociativeArray, a2: &AssociativeArray) -> Result<f64, SimilarityError> {
    let (x, y);
    let (a1, a2) = if a1.index == a2.index {
        (a1, a2)
    } else {
        (x, y) = align(a1, a2);
        (&x, &y)
    };
    let mut dot = 0.0;
    let mut norm1_sq = 0.0;
    let mut norm2_sq = 0.0;
    for i in 0..a1.values.len() {
        let (u, v) = (a1.values[i], a2.values[i]);
        dot += u * v;
        norm1_sq += u * u;
        norm2_sq += v * v;
    }
    if norm1_sq == 0.0 || norm2_sq == 0.0 {
        return Err(SimilarityError::ZeroNorm);
    }
    // Norms are multiplied (not sqrt of the product) so the expression is
    // exactly symmetric in its arguments.
    Ok((dot / (norm1_sq.sqrt() * norm2_sq.sqrt())).min(1.0))
}

/// Full comparison pipeline: arrays from both annotations, zero-completed
/// against each other, then cosine. Symmetric in its arguments.
pub fn compare_annotations(
    ann1: &AnnotationFrames,
    ann2: &AnnotationFrames,
    table: &RelatednessTable,
) -> Result<f64, SimilarityError> {
    if ann1.is_empty() {
        return Err(SimilarityError::EmptyAnnotation(ann1.annotation_id.clone()));
    }
    if ann2.is_empty() {
        return Err(SimilarityError::EmptyAnnotation(ann2.annotation_id.clone()));
    }
    let a1 = build_array(ann1, table)?;
    let a2 = build_array(ann2, table)?;
    let (a1, a2) = align(&a1, &a2);
    cosine(&a1, &a2)
}
