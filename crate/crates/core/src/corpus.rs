//! Caption/annotation corpora across the five setups (ENO, PTT, PTO text
//! captions; VWC, VWoC visual frame labels), paired by image, with
//! descriptive statistics and pairwise similarity sampling.

use crate::activation::{RelatednessTable, SpreadParams};
use crate::daisy::{self, DaisyError};
use crate::fn_graph::{FrameGraph, FrameId};
use crate::similarity::{compare_annotations, AnnotationFrames, SimilarityError};
use crate::stats::mean_and_stdev;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setup {
    #[serde(rename = "ENO")]
    Eno,
    #[serde(rename = "PTT")]
    Ptt,
    #[serde(rename = "PTO")]
    Pto,
    #[serde(rename = "VWC")]
    Vwc,
    #[serde(rename = "VWoC")]
    Vwoc,
}

impl Setup {
    pub const ALL: [Setup; 5] = [Setup::Eno, Setup::Ptt, Setup::Pto, Setup::Vwc, Setup::Vwoc];

    pub fn as_str(self) -> &'static str {
        match self {
            Setup::Eno => "ENO",
            Setup::Ptt => "PTT",
            Setup::Pto => "PTO",
            Setup::Vwc => "VWC",
            Setup::Vwoc => "VWoC",
        }
    }

    /// Text setups carry captions; the visual ones carry frame labels.
    pub fn is_text(self) -> bool {
        matches!(self, Setup::Eno | Setup::Ptt | Setup::Pto)
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Setup {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Setup::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or(())
    }
}

/// A manual frame label on one bounding box. Frame-element names and box ids
/// are stored and round-tripped but never scored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameLabel {
    pub frame: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fe: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "box")]
    pub box_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Text(String),
    Labels(Vec<FrameLabel>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub record_id: String,
    pub image_id: String,
    pub setup: Setup,
    pub lang: String,
    pub payload: Payload,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MergePolicy {
    /// Duplicate (image, setup) pairs are a load error.
    #[default]
    Error,
    /// Keep the first record, drop later duplicates.
    First,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed corpus record: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: record {id}: setup {setup} expects {expected}")]
    PayloadMismatch {
        line: usize,
        id: String,
        setup: Setup,
        expected: &'static str,
    },
    #[error("duplicate record for image `{image}` setup {setup}")]
    Duplicate { image: String, setup: Setup },
    #[error("record {id}: unknown frame label `{frame}`")]
    UnknownFrameLabel { id: String, frame: String },
    #[error("setup {0} has no records")]
    EmptySetup(Setup),
    #[error("setup {0} carries frame labels, not captions; lemma statistics are undefined")]
    VisualStatsUnsupported(Setup),
    #[error("record {id}: {source}")]
    RecordParse {
        id: String,
        #[source]
        source: DaisyError,
    },
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("histogram needs at least one bin")]
    BadBins,
    #[error("histogram sample is empty")]
    EmptySample,
    #[error("line {line}: malformed CSV row: {msg}")]
    CsvMalformed { line: usize, msg: String },
    #[error("CSV field `{0}` contains a delimiter or newline")]
    CsvUnsafeField(String),
    #[error("CSV contains no data rows")]
    EmptyCsv,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct RawCorpusRecord {
    id: String,
    image: String,
    setup: Setup,
    lang: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<FrameLabel>>,
}

/// The loaded corpus, indexed by (image, setup). Immutable after load.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<AnnotationRecord>,
    index: HashMap<(String, Setup), usize>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    pub fn get(&self, image: &str, setup: Setup) -> Option<&AnnotationRecord> {
        self.index
            .get(&(image.to_owned(), setup))
            .map(|&i| &self.records[i])
    }

    pub fn records_for(&self, setup: Setup) -> impl Iterator<Item = &AnnotationRecord> {
        self.records.iter().filter(move |r| r.setup == setup)
    }

    /// Image ids present in a setup, sorted.
    pub fn images(&self, setup: Setup) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .records_for(setup)
            .map(|r| r.image_id.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    /// Serializes back to the line-delimited record format; loading the
    /// output reproduces the corpus exactly.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in &self.records {
            let (text, labels) = match &record.payload {
                Payload::Text(t) => (Some(t.clone()), None),
                Payload::Labels(l) => (None, Some(l.clone())),
            };
            let raw = RawCorpusRecord {
                id: record.record_id.clone(),
                image: record.image_id.clone(),
                setup: record.setup,
                lang: record.lang.clone(),
                text,
                labels,
            };
            writeln!(out, "{}", serde_json::to_string(&raw).expect("record serializes"))?;
        }
        Ok(())
    }
}

/// Loads a line-delimited corpus, checking payload shape against each
/// record's setup and every frame label against the graph. Empty caption
/// text is tolerated here and surfaces as a per-record failure at parse
/// time.
pub fn load_corpus<R: BufRead>(
    reader: R,
    graph: &FrameGraph,
    policy: MergePolicy,
) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawCorpusRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                line: lineno,
                msg: e.to_string(),
            })?;
        let payload = match (raw.setup.is_text(), raw.text, raw.labels) {
            (true, Some(text), None) => Payload::Text(text),
            (false, None, Some(labels)) => {
                for label in &labels {
                    if graph.frame_by_name(&label.frame).is_none() {
                        return Err(CorpusError::UnknownFrameLabel {
                            id: raw.id,
                            frame: label.frame.clone(),
                        });
                    }
                }
                Payload::Labels(labels)
            }
            (true, _, _) => {
                return Err(CorpusError::PayloadMismatch {
                    line: lineno,
                    id: raw.id,
                    setup: raw.setup,
                    expected: "a `text` field and no `labels`",
                })
            }
            (false, _, _) => {
                return Err(CorpusError::PayloadMismatch {
                    line: lineno,
                    id: raw.id,
                    setup: raw.setup,
                    expected: "a `labels` field and no `text`",
                })
            }
        };
        let key = (raw.image.clone(), raw.setup);
        if corpus.index.contains_key(&key) {
            match policy {
                MergePolicy::Error => {
                    return Err(CorpusError::Duplicate {
                        image: raw.image,
                        setup: raw.setup,
                    })
                }
                MergePolicy::First => continue,
            }
        }
        corpus.index.insert(key, corpus.records.len());
        corpus.records.push(AnnotationRecord {
            record_id: raw.id,
            image_id: raw.image,
            setup: raw.setup,
            lang: raw.lang,
            payload,
        });
    }
    Ok(corpus)
}

/// The evoked frame set of one record: the parse pipeline for captions, the
/// deduplicated explicit labels for visual records. May be empty; callers
/// flag and skip empty sets rather than scoring them.
pub fn annotation_frames(
    record: &AnnotationRecord,
    graph: &FrameGraph,
    params: &SpreadParams,
) -> Result<AnnotationFrames, CorpusError> {
    match &record.payload {
        Payload::Text(text) => {
            let out = daisy::parse(&record.record_id, text, &record.lang, graph, params)
                .map_err(|source| CorpusError::RecordParse {
                    id: record.record_id.clone(),
                    source,
                })?;
            Ok(out.frames)
        }
        Payload::Labels(labels) => {
            let mut evoked = BTreeSet::new();
            for label in labels {
                let frame = graph.frame_by_name(&label.frame).ok_or_else(|| {
                    CorpusError::UnknownFrameLabel {
                        id: record.record_id.clone(),
                        frame: label.frame.clone(),
                    }
                })?;
                evoked.insert(frame);
            }
            Ok(AnnotationFrames {
                annotation_id: record.record_id.clone(),
                evoked,
            })
        }
    }
}

/// Per-setup averages of frame counts, lemma counts and frame:lemma ratios
/// over caption records (sample stdev, n-1 denominator).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub setup: Setup,
    pub records: usize,
    pub avg_frames: f64,
    pub stdev_frames: f64,
    pub avg_lemmas: f64,
    pub stdev_lemmas: f64,
    pub avg_ratio: f64,
    pub stdev_ratio: f64,
}

pub fn descriptive_stats(
    corpus: &Corpus,
    setup: Setup,
    graph: &FrameGraph,
    params: &SpreadParams,
) -> Result<DescriptiveStats, CorpusError> {
    if !setup.is_text() {
        return Err(CorpusError::VisualStatsUnsupported(setup));
    }
    let records: Vec<&AnnotationRecord> = corpus.records_for(setup).collect();
    if records.is_empty() {
        return Err(CorpusError::EmptySetup(setup));
    }
    let counts = records
        .par_iter()
        .map(|record| {
            let Payload::Text(text) = &record.payload else {
                unreachable!("text setup filtered above");
            };
            daisy::parse(&record.record_id, text, &record.lang, graph, params)
                .map(|out| (out.evoking_lemma_count, out.lemma_count))
                .map_err(|source| CorpusError::RecordParse {
                    id: record.record_id.clone(),
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let frames: Vec<f64> = counts.iter().map(|&(f, _)| f as f64).collect();
    let lemmas: Vec<f64> = counts.iter().map(|&(_, l)| l as f64).collect();
    let ratios: Vec<f64> = counts
        .iter()
        .map(|&(f, l)| if l == 0 { 0.0 } else { f as f64 / l as f64 })
        .collect();
    let (avg_frames, stdev_frames) = mean_and_stdev(&frames);
    let (avg_lemmas, stdev_lemmas) = mean_and_stdev(&lemmas);
    let (avg_ratio, stdev_ratio) = mean_and_stdev(&ratios);
    Ok(DescriptiveStats {
        setup,
        records: records.len(),
        avg_frames,
        stdev_frames,
        avg_lemmas,
        stdev_lemmas,
        avg_ratio,
        stdev_ratio,
    })
}

/// Per-image cosine similarities between two setups.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilaritySample {
    pub setups: (Setup, Setup),
    pub pairs: Vec<(String, f64)>,
}

impl SimilaritySample {
    pub fn cosines(&self) -> Vec<f64> {
        self.pairs.iter().map(|&(_, c)| c).collect()
    }

    /// CSV export: `image_id,setup_a,setup_b,cosine`, one row per image,
    /// already sorted by image id.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        writeln!(out, "image_id,setup_a,setup_b,cosine")?;
        for (image, cosine) in &self.pairs {
            if image.contains([',', '"', '\n', '\r']) {
                return Err(CorpusError::CsvUnsafeField(image.clone()));
            }
            writeln!(
                out,
                "{image},{},{},{cosine}",
                self.setups.0, self.setups.1
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<SimilaritySample, CorpusError> {
        let mut lines = reader.lines().enumerate();
        let Some((_, header)) = lines.next() else {
            return Err(CorpusError::EmptyCsv);
        };
        let header = header?;
        if header.trim() != "image_id,setup_a,setup_b,cosine" {
            return Err(CorpusError::CsvMalformed {
                line: 1,
                msg: format!("unexpected header `{header}`"),
            });
        }
        let mut setups = None;
        let mut pairs = Vec::new();
        for (lineno, line) in lines {
            let lineno = lineno + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(CorpusError::CsvMalformed {
                    line: lineno,
                    msg: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let a = Setup::from_str(fields[1]).map_err(|_| CorpusError::CsvMalformed {
                line: lineno,
                msg: format!("unknown setup `{}`", fields[1]),
            })?;
            let b = Setup::from_str(fields[2]).map_err(|_| CorpusError::CsvMalformed {
                line: lineno,
                msg: format!("unknown setup `{}`", fields[2]),
            })?;
            let cosine: f64 = fields[3].parse().map_err(|e| CorpusError::CsvMalformed {
                line: lineno,
                msg: format!("bad cosine value: {e}"),
            })?;
            match setups {
                None => setups = Some((a, b)),
                Some(pair) if pair == (a, b) => {}
                Some(pair) => {
                    return Err(CorpusError::CsvMalformed {
                        line: lineno,
                        msg: format!(
                            "setup pair {a}x{b} differs from {}x{}",
                            pair.0, pair.1
                        ),
                    })
                }
            }
            pairs.push((fields[0].to_owned(), cosine));
        }
        let setups = setups.ok_or(CorpusError::EmptyCsv)?;
        Ok(SimilaritySample { setups, pairs })
    }
}

/// Images skipped while sampling: present on one side only, evoking nothing,
/// or failing to parse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SkipReport {
    pub missing: usize,
    pub empty: usize,
    pub failed: usize,
}

enum PairOutcome {
    Scored(String, f64),
    Empty,
    Failed,
}

/// Compares the two setups image by image over their shared images.
/// Per-image problems are counted, never fatal; output order is image-id
/// order regardless of scheduling.
pub fn pairwise_similarities(
    corpus: &Corpus,
    setup_a: Setup,
    setup_b: Setup,
    graph: &FrameGraph,
    table: &RelatednessTable,
    params: &SpreadParams,
) -> (SimilaritySample, SkipReport) {
    let images_a: BTreeSet<&str> = corpus.images(setup_a).into_iter().collect();
    let images_b: BTreeSet<&str> = corpus.images(setup_b).into_iter().collect();
    let shared: Vec<&str> = images_a.intersection(&images_b).copied().collect();
    let missing = images_a.symmetric_difference(&images_b).count();

    let outcomes: Vec<PairOutcome> = shared
        .par_iter()
        .map(|&image| {
            let rec_a = corpus.get(image, setup_a).expect("image in intersection");
            let rec_b = corpus.get(image, setup_b).expect("image in intersection");
            let ann_a = match annotation_frames(rec_a, graph, params) {
                Ok(a) => a,
                Err(_) => return PairOutcome::Failed,
            };
            let ann_b = match annotation_frames(rec_b, graph, params) {
                Ok(b) => b,
                Err(_) => return PairOutcome::Failed,
            };
            if ann_a.is_empty() || ann_b.is_empty() {
                return PairOutcome::Empty;
            }
            match compare_annotations(&ann_a, &ann_b, table) {
                Ok(cosine) => PairOutcome::Scored(image.to_owned(), cosine),
                Err(_) => PairOutcome::Failed,
            }
        })
        .collect();

    let mut skip = SkipReport { missing, empty: 0, failed: 0 };
    let mut pairs = Vec::new();
    for outcome in outcomes {
        match outcome {
            PairOutcome::Scored(image, cosine) => pairs.push((image, cosine)),
            PairOutcome::Empty => skip.empty += 1,
            PairOutcome::Failed => skip.failed += 1,
        }
    }
    (
        SimilaritySample {
            setups: (setup_a, setup_b),
            pairs,
        },
        skip,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram over [0,1]; the last bin is right-closed, so the
/// counts always sum to the sample size.
pub fn histogram(sample: &[f64], bins: usize) -> Result<Vec<HistogramBin>, CorpusError> {
    if bins == 0 {
        return Err(CorpusError::BadBins);
    }
    if sample.is_empty() {
        return Err(CorpusError::EmptySample);
    }
    let mut counts = vec![0usize; bins];
    for &value in sample {
        let raw = (value * bins as f64).floor();
        let index = (raw as isize).clamp(0, bins as isize - 1) as usize;
        counts[index] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: i as f64 / bins as f64,
            hi: (i + 1) as f64 / bins as f64,
            count,
        })
        .collect())
}

/// Frame ids evoked per setup for one image, resolved through the corpus;
/// convenience for reports.
pub fn evoked_by_image(
    corpus: &Corpus,
    setup: Setup,
    graph: &FrameGraph,
    params: &SpreadParams,
) -> Result<BTreeMap<String, BTreeSet<FrameId>>, CorpusError> {
    let mut out = BTreeMap::new();
    for record in corpus.records_for(setup) {
        let frames = annotation_frames(record, graph, params)?;
        out.insert(record.image_id.clone(), frames.evoked);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::build_relatedness_table;
    use crate::fn_graph::{FrameGraphBuilder, RelationType};

    fn g5_with_lexicon() -> FrameGraph {
        let mut b = FrameGraphBuilder::new();
        for name in ["A", "B", "C", "D", "E"] {
            b.frame(name, name, vec![]);
        }
        b.relation(RelationType::Inheritance, "A", "B");
        b.relation(RelationType::Inheritance, "A", "C");
        b.relation(RelationType::PerspectiveOn, "B", "D");
        b.relation(RelationType::Inheritance, "C", "E");
        b.lu("l1", "bee", "n", "B", "en");
        b.lu("l2", "cee", "n", "C", "en");
        b.lu("l3", "dee", "n", "D", "en");
        b.build().unwrap()
    }

    fn params() -> SpreadParams {
        SpreadParams {
            decay: 0.5,
            max_depth: 3,
            threshold: 0.0,
            ..SpreadParams::default()
        }
    }

    #[test]
    fn loads_two_records_for_one_image() {
        let g = g5_with_lexicon();
        let stream = r#"{"id":"r1","image":"img1","setup":"ENO","lang":"en","text":"a bee"}
{"id":"r2","image":"img1","setup":"PTO","lang":"pt","text":"uma abelha"}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.images(Setup::Eno), vec!["img1"]);
        assert_eq!(corpus.images(Setup::Pto), vec!["img1"]);
    }

    #[test]
    fn duplicate_image_setup_rejected_by_default_kept_first_otherwise() {
        let g = g5_with_lexicon();
        let stream = r#"{"id":"r1","image":"img1","setup":"ENO","lang":"en","text":"a bee"}
{"id":"r2","image":"img1","setup":"ENO","lang":"en","text":"a cee"}"#;
        assert!(matches!(
            load_corpus(stream.as_bytes(), &g, MergePolicy::Error),
            Err(CorpusError::Duplicate { .. })
        ));
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::First).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.records()[0].record_id, "r1");
    }

    #[test]
    fn visual_labels_must_name_existing_frames() {
        let g = g5_with_lexicon();
        let good = r#"{"id":"v1","image":"img1","setup":"VWC","lang":"en","labels":[{"frame":"B","fe":"Agent","box":"b1"}]}"#;
        let corpus = load_corpus(good.as_bytes(), &g, MergePolicy::Error).unwrap();
        assert_eq!(corpus.len(), 1);

        let bad = r#"{"id":"v2","image":"img1","setup":"VWC","lang":"en","labels":[{"frame":"Theft"}]}"#;
        assert!(matches!(
            load_corpus(bad.as_bytes(), &g, MergePolicy::Error),
            Err(CorpusError::UnknownFrameLabel { frame, .. }) if frame == "Theft"
        ));
    }

    #[test]
    fn payload_must_match_setup() {
        let g = g5_with_lexicon();
        let text_with_labels =
            r#"{"id":"r1","image":"i","setup":"ENO","lang":"en","labels":[{"frame":"B"}]}"#;
        assert!(matches!(
            load_corpus(text_with_labels.as_bytes(), &g, MergePolicy::Error),
            Err(CorpusError::PayloadMismatch { .. })
        ));
        let visual_with_text = r#"{"id":"r1","image":"i","setup":"VWoC","lang":"en","text":"x"}"#;
        assert!(matches!(
            load_corpus(visual_with_text.as_bytes(), &g, MergePolicy::Error),
            Err(CorpusError::PayloadMismatch { .. })
        ));
    }

    #[test]
    fn unknown_setup_tag_is_malformed() {
        let g = g5_with_lexicon();
        let stream = r#"{"id":"r1","image":"i","setup":"XXX","lang":"en","text":"x"}"#;
        assert!(matches!(
            load_corpus(stream.as_bytes(), &g, MergePolicy::Error),
            Err(CorpusError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn annotation_frames_dedups_visual_labels() {
        let g = g5_with_lexicon();
        let record = AnnotationRecord {
            record_id: "v1".into(),
            image_id: "img1".into(),
            setup: Setup::Vwoc,
            lang: "en".into(),
            payload: Payload::Labels(vec![
                FrameLabel { frame: "B".into(), fe: None, box_id: None },
                FrameLabel { frame: "B".into(), fe: Some("Agent".into()), box_id: None },
            ]),
        };
        let frames = annotation_frames(&record, &g, &params()).unwrap();
        assert_eq!(frames.evoked.len(), 1);
    }

    #[test]
    fn annotation_frames_parses_text_records() {
        let g = g5_with_lexicon();
        let record = AnnotationRecord {
            record_id: "r1".into(),
            image_id: "img1".into(),
            setup: Setup::Eno,
            lang: "en".into(),
            payload: Payload::Text("the bee and the dee".into()),
        };
        let frames = annotation_frames(&record, &g, &params()).unwrap();
        let expected = daisy::parse("r1", "the bee and the dee", "en", &g, &params())
            .unwrap()
            .frames;
        assert_eq!(frames.evoked, expected.evoked);
    }

    #[test]
    fn empty_label_set_flags_as_empty() {
        let g = g5_with_lexicon();
        let record = AnnotationRecord {
            record_id: "v0".into(),
            image_id: "img1".into(),
            setup: Setup::Vwc,
            lang: "en".into(),
            payload: Payload::Labels(vec![]),
        };
        let frames = annotation_frames(&record, &g, &params()).unwrap();
        assert!(frames.is_empty());
    }

    #[test]
    fn descriptive_stats_single_and_two_records() {
        let g = g5_with_lexicon();
        // 2 evoking lemmas out of 2 -> ratio 1.0; "the bee dee" -> 2/3.
        let stream = r#"{"id":"r1","image":"i1","setup":"ENO","lang":"en","text":"bee dee"}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        let stats = descriptive_stats(&corpus, Setup::Eno, &g, &params()).unwrap();
        assert_eq!(stats.records, 1);
        assert_eq!(stats.avg_ratio, 1.0);
        assert_eq!(stats.stdev_ratio, 0.0);

        // Ratios 0.8 (4/5) and 1.0 -> avg 0.9, stdev ~ 0.1414.
        let stream = r#"{"id":"r1","image":"i1","setup":"ENO","lang":"en","text":"bee dee cee bee nada"}
{"id":"r2","image":"i2","setup":"ENO","lang":"en","text":"bee dee"}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        let stats = descriptive_stats(&corpus, Setup::Eno, &g, &params()).unwrap();
        assert!((stats.avg_ratio - 0.9).abs() < 1e-12);
        assert!((stats.stdev_ratio - 0.1414213562373095).abs() < 1e-12);

        assert!(matches!(
            descriptive_stats(&corpus, Setup::Ptt, &g, &params()),
            Err(CorpusError::EmptySetup(Setup::Ptt))
        ));
        assert!(matches!(
            descriptive_stats(&corpus, Setup::Vwc, &g, &params()),
            Err(CorpusError::VisualStatsUnsupported(Setup::Vwc))
        ));
    }

    #[test]
    fn pairwise_similarity_matches_hand_value() {
        let g = g5_with_lexicon();
        let table = build_relatedness_table(&g, &params(), None).unwrap();
        let stream = r#"{"id":"w1","image":"img1","setup":"VWC","lang":"en","labels":[{"frame":"B"}]}
{"id":"w2","image":"img1","setup":"VWoC","lang":"en","labels":[{"frame":"C"}]}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        let (sample, skip) =
            pairwise_similarities(&corpus, Setup::Vwc, Setup::Vwoc, &g, &table, &params());
        assert_eq!(skip, SkipReport::default());
        assert_eq!(sample.pairs.len(), 1);
        assert_eq!(sample.pairs[0].0, "img1");
        assert!((sample.pairs[0].1 - 0.875 / 1.578125).abs() < 1e-12);
    }

    #[test]
    fn identical_labels_give_similarity_one() {
        let g = g5_with_lexicon();
        let table = build_relatedness_table(&g, &params(), None).unwrap();
        let stream = r#"{"id":"w1","image":"img1","setup":"VWC","lang":"en","labels":[{"frame":"B"},{"frame":"E"}]}
{"id":"w2","image":"img1","setup":"VWoC","lang":"en","labels":[{"frame":"B"},{"frame":"E"}]}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        let (sample, _) =
            pairwise_similarities(&corpus, Setup::Vwc, Setup::Vwoc, &g, &table, &params());
        assert!((sample.pairs[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_images_produce_empty_sample() {
        let g = g5_with_lexicon();
        let table = build_relatedness_table(&g, &params(), None).unwrap();
        let stream = r#"{"id":"w1","image":"img1","setup":"VWC","lang":"en","labels":[{"frame":"B"}]}
{"id":"w2","image":"img2","setup":"VWoC","lang":"en","labels":[{"frame":"C"}]}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        let (sample, skip) =
            pairwise_similarities(&corpus, Setup::Vwc, Setup::Vwoc, &g, &table, &params());
        assert!(sample.pairs.is_empty());
        assert_eq!(skip.missing, 2);
    }

    #[test]
    fn empty_frame_sets_are_skipped_and_counted() {
        let g = g5_with_lexicon();
        let table = build_relatedness_table(&g, &params(), None).unwrap();
        let stream = r#"{"id":"w1","image":"img1","setup":"VWC","lang":"en","labels":[]}
{"id":"w2","image":"img1","setup":"VWoC","lang":"en","labels":[{"frame":"C"}]}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        let (sample, skip) =
            pairwise_similarities(&corpus, Setup::Vwc, Setup::Vwoc, &g, &table, &params());
        assert!(sample.pairs.is_empty());
        assert_eq!(skip.empty, 1);
    }

    #[test]
    fn corpus_round_trips_through_serialization() {
        let g = g5_with_lexicon();
        let stream = r#"{"id":"r1","image":"img1","setup":"ENO","lang":"en","text":"a bee"}
{"id":"v1","image":"img1","setup":"VWC","lang":"en","labels":[{"frame":"B","fe":"Agent","box":"b0"},{"frame":"C"}]}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        let mut buf = Vec::new();
        corpus.write(&mut buf).unwrap();
        let reloaded = load_corpus(buf.as_slice(), &g, MergePolicy::Error).unwrap();
        assert_eq!(corpus, reloaded);
    }

    #[test]
    fn histogram_boundaries_and_totals() {
        let bins = histogram(&[0.0, 0.5, 1.0], 2).unwrap();
        assert_eq!(bins.len(), 2);
        assert_eq!(bins[0].count, 1);
        assert_eq!(bins[1].count, 2);
        assert_eq!(bins[0].lo, 0.0);
        assert_eq!(bins[1].hi, 1.0);

        let single = histogram(&[0.1, 0.9, 0.4], 1).unwrap();
        assert_eq!(single[0].count, 3);

        assert!(matches!(histogram(&[], 2), Err(CorpusError::EmptySample)));
        assert!(matches!(histogram(&[0.5], 0), Err(CorpusError::BadBins)));
    }

    #[test]
    fn histogram_of_uniform_sample_is_flat_within_binomial_noise() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(8080);
        let sample: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..1.0)).collect();
        let bins = histogram(&sample, 10).unwrap();
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 1000);
        // Binomial: sigma = sqrt(1000 * 0.1 * 0.9) ~ 9.49, so 3 sigma ~ 28.5.
        for bin in &bins {
            let deviation = (bin.count as f64 - 100.0).abs();
            assert!(deviation <= 28.5, "bin {:?} off by {deviation}", (bin.lo, bin.hi));
        }
    }

    #[test]
    fn identical_records_have_zero_stdevs() {
        let g = g5_with_lexicon();
        let stream = r#"{"id":"r1","image":"i1","setup":"ENO","lang":"en","text":"bee dee"}
{"id":"r2","image":"i2","setup":"ENO","lang":"en","text":"bee dee"}
{"id":"r3","image":"i3","setup":"ENO","lang":"en","text":"bee dee"}"#;
        let corpus = load_corpus(stream.as_bytes(), &g, MergePolicy::Error).unwrap();
        let stats = descriptive_stats(&corpus, Setup::Eno, &g, &params()).unwrap();
        assert_eq!(stats.stdev_frames, 0.0);
        assert_eq!(stats.stdev_lemmas, 0.0);
        assert_eq!(stats.stdev_ratio, 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let sample = SimilaritySample {
            setups: (Setup::Vwc, Setup::Eno),
            pairs: vec![
                ("img01".into(), 0.5544554455445545),
                ("img02".into(), 1.0),
            ],
        };
        let mut buf = Vec::new();
        sample.write_csv(&mut buf).unwrap();
        let reread = SimilaritySample::read_csv(buf.as_slice()).unwrap();
        assert_eq!(sample, reread);
    }
}
