//! Frame disambiguation for caption text.
//!
//! Maps a sentence to the set of frames it evokes in three steps: dictionary
//! lemmatization against the graph's lexical-unit inventory (greedy
//! longest-match for multiword units, case folding, trivial plural
//! stripping), candidate collection per lemma, and spread-activation scoring
//! that picks, for each ambiguous lemma, the candidate frame best supported
//! by the other lemmas in the sentence.
//!
//! The scoring rule is: a candidate frame starts at 1.0 for its own lemma
//! and gains, per other token, the maximum relatedness from any of that
//! token's candidate frames. Ties break toward the alphabetically first
//! frame name, so results are deterministic and order-free.

use crate::activation::{spread, SpreadError, SpreadParams};
use crate::fn_graph::{ExternId, FrameGraph, FrameId};
use crate::similarity::AnnotationFrames;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DaisyError {
    #[error("caption text is empty")]
    EmptyText,
    #[error("language `{0}` has no lexical units in the frame database")]
    UnsupportedLanguage(String),
    #[error(transparent)]
    Spread(#[from] SpreadError),
}

/// One lemmatized token. `span` is the half-open range of word positions the
/// token covers; multiword units cover more than one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaToken {
    pub surface: String,
    pub lemma: String,
    pub span: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub lu_id: ExternId,
    pub frame: FrameId,
}

/// A token together with its candidate frames, deduplicated by frame and
/// sorted by frame name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub token: LemmaToken,
    pub candidates: Vec<Candidate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameAssignment {
    pub token: LemmaToken,
    pub frame: FrameId,
    pub score: f64,
}

/// Result of parsing one caption: the evoked frame set plus the per-token
/// detail and the counts that feed the frame:lemma ratio statistics.
#[derive(Clone, Debug)]
pub struct ParseOutput {
    pub frames: AnnotationFrames,
    pub candidate_sets: Vec<CandidateSet>,
    pub assignments: Vec<FrameAssignment>,
    /// All emitted tokens, evoking or not.
    pub lemma_count: usize,
    /// Tokens with at least one candidate frame.
    pub evoking_lemma_count: usize,
}

/// Per-token audit record emitted by the CLI trace stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub caption: String,
    pub token: String,
    pub lemma: String,
    pub candidates: Vec<String>,
    pub chosen: String,
    pub score: f64,
}

impl ParseOutput {
    pub fn trace_records(&self, graph: &FrameGraph) -> Vec<TraceRecord> {
        self.candidate_sets
            .iter()
            .zip(&self.assignments)
            .map(|(set, assignment)| TraceRecord {
                caption: self.frames.annotation_id.clone(),
                token: set.token.surface.clone(),
                lemma: set.token.lemma.clone(),
                candidates: set
                    .candidates
                    .iter()
                    .map(|c| graph.frame_name(c.frame).to_owned())
                    .collect(),
                chosen: graph.frame_name(assignment.frame).to_owned(),
                score: assignment.score,
            })
            .collect()
    }
}

fn words_of(text: &str) -> Vec<&str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect()
}

fn strip_plural<'a>(word: &str, lang: &str, inventory: &BTreeSet<&'a str>) -> Option<&'a str> {
    let mut stems: Vec<&str> = Vec::new();
    if let Some(stem) = word.strip_suffix('s') {
        stems.push(stem);
    }
    if lang == "en"
        && let Some(stem) = word.strip_suffix("es")
    {
        stems.push(stem);
    }
    stems
        .into_iter()
        .filter(|s| !s.is_empty())
        .find_map(|s| inventory.get(s).copied())
}

/// Splits a caption into lemma tokens. Words are maximal alphanumeric runs,
/// case-folded; multiword lexical units are recognized greedily left to
/// right (longest match, exact form); remaining single words fall back to
/// plural stripping ("-s"/"-es" for en, "-s" for pt). Words without any
/// lexical-unit match are still emitted and simply evoke nothing.
pub fn lemmatize(
    text: &str,
    lang: &str,
    graph: &FrameGraph,
) -> Result<Vec<LemmaToken>, DaisyError> {
    if text.trim().is_empty() {
        return Err(DaisyError::EmptyText);
    }
    if !graph.has_lang(lang) {
        return Err(DaisyError::UnsupportedLanguage(lang.to_owned()));
    }
    // BTreeSet so the borrow-returning lookups in strip_plural stay simple.
    let inventory: BTreeSet<&str> = graph.lemma_inventory(lang).into_iter().collect();
    let max_words = inventory
        .iter()
        .map(|l| l.split(' ').count())
        .max()
        .unwrap_or(1);

    let surfaces = words_of(text);
    let folded: Vec<String> = surfaces.iter().map(|w| w.to_lowercase()).collect();

    let mut tokens = Vec::new();
    let mut i = 0;
    while i < surfaces.len() {
        let mut matched_len = 0;
        let mut matched_lemma = String::new();
        if max_words >= 2 {
            let upper = max_words.min(surfaces.len() - i);
            for n in (2..=upper).rev() {
                let phrase = folded[i..i + n].join(" ");
                if inventory.contains(phrase.as_str()) {
                    matched_len = n;
                    matched_lemma = phrase;
                    break;
                }
            }
        }
        if matched_len > 0 {
            tokens.push(LemmaToken {
                surface: surfaces[i..i + matched_len].join(" "),
                lemma: matched_lemma,
                span: (i, i + matched_len),
            });
            i += matched_len;
            continue;
        }
        let word = &folded[i];
        let lemma = if inventory.contains(word.as_str()) {
            word.clone()
        } else if let Some(stem) = strip_plural(word, lang, &inventory) {
            stem.to_owned()
        } else {
            word.clone()
        };
        tokens.push(LemmaToken {
            surface: surfaces[i].to_owned(),
            lemma,
            span: (i, i + 1),
        });
        i += 1;
    }
    Ok(tokens)
}

/// One candidate set per token that matches at least one lexical unit;
/// non-evoking tokens are omitted. Candidates are deduplicated by frame and
/// sorted by frame name.
pub fn candidates(tokens: &[LemmaToken], graph: &FrameGraph, lang: &str) -> Vec<CandidateSet> {
    let mut out = Vec::new();
    for token in tokens {
        let hits = graph.lookup_lemma(&token.lemma, lang, None);
        if hits.is_empty() {
            continue;
        }
        let mut seen = BTreeSet::new();
        let mut cands = Vec::new();
        // lookup_lemma sorts by frame name, so first-seen keeps that order.
        for (lu, frame) in hits {
            if seen.insert(frame.id) {
                cands.push(Candidate {
                    lu_id: lu.id.clone(),
                    frame: frame.id,
                });
            }
        }
        out.push(CandidateSet {
            token: token.clone(),
            candidates: cands,
        });
    }
    out
}

/// Assigns each token the candidate frame with the highest context score.
pub fn disambiguate(
    candidate_sets: &[CandidateSet],
    graph: &FrameGraph,
    params: &SpreadParams,
) -> Result<Vec<FrameAssignment>, DaisyError> {
    params.validate()?;
    // Relatedness rows for every distinct candidate frame in the sentence.
    let distinct: BTreeSet<FrameId> = candidate_sets
        .iter()
        .flat_map(|set| set.candidates.iter().map(|c| c.frame))
        .collect();
    let mut rows: BTreeMap<FrameId, _> = BTreeMap::new();
    for &frame in &distinct {
        let seeds = BTreeMap::from([(frame, 1.0)]);
        rows.insert(frame, spread(graph, &seeds, params)?);
    }

    let mut assignments = Vec::with_capacity(candidate_sets.len());
    for (i, set) in candidate_sets.iter().enumerate() {
        let mut best: Option<(f64, FrameId)> = None;
        for cand in &set.candidates {
            let mut score = 1.0;
            for (j, other) in candidate_sets.iter().enumerate() {
                if i == j {
                    continue;
                }
                let support = other
                    .candidates
                    .iter()
                    .map(|c| rows[&c.frame].activation(cand.frame))
                    .fold(0.0, f64::max);
                score += support;
            }
            // Strictly-greater keeps the alphabetically first frame on ties
            // (candidates are sorted by frame name).
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, cand.frame));
            }
        }
        let (score, frame) = best.expect("candidate sets are non-empty by construction");
        assignments.push(FrameAssignment {
            token: set.token.clone(),
            frame,
            score,
        });
    }
    Ok(assignments)
}

/// Full caption parse: lemmatize, collect candidates, disambiguate, and
/// gather the evoked frame set plus counting detail.
pub fn parse(
    annotation_id: &str,
    text: &str,
    lang: &str,
    graph: &FrameGraph,
    params: &SpreadParams,
) -> Result<ParseOutput, DaisyError> {
    let tokens = lemmatize(text, lang, graph)?;
    let sets = candidates(&tokens, graph, lang);
    let assignments = disambiguate(&sets, graph, params)?;
    let evoked: BTreeSet<FrameId> = assignments.iter().map(|a| a.frame).collect();
    Ok(ParseOutput {
        frames: AnnotationFrames {
            annotation_id: annotation_id.to_owned(),
            evoked,
        },
        lemma_count: tokens.len(),
        evoking_lemma_count: sets.len(),
        candidate_sets: sets,
        assignments,
    })
}
