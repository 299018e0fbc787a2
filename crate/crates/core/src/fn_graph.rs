//! Frame database: frames, frame elements, lexical units and typed
//! frame-to-frame relations, loaded from line-delimited records into an
//! immutable, fully indexed graph.

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use thiserror::Error;

/// Identifier as written in database files: a JSON integer or string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExternId {
    Int(i64),
    Str(String),
}

impl fmt::Display for ExternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExternId::Int(n) => write!(f, "{n}"),
            ExternId::Str(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for ExternId {
    fn from(n: i64) -> Self {
        ExternId::Int(n)
    }
}

impl From<&str> for ExternId {
    fn from(s: &str) -> Self {
        ExternId::Str(s.to_owned())
    }
}

impl From<String> for ExternId {
    fn from(s: String) -> Self {
        ExternId::Str(s)
    }
}

/// Dense frame handle assigned in declaration order. Activation vectors and
/// associative arrays are indexed by these.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameId(pub u32);

impl FrameId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coreness {
    Core,
    NonCore,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameElement {
    pub name: String,
    pub coreness: Coreness,
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub id: FrameId,
    pub ext_id: ExternId,
    pub name: String,
    pub frame_elements: Vec<FrameElement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexicalUnit {
    pub id: ExternId,
    /// Case-folded at load time; may contain spaces for multiword units.
    pub lemma: String,
    pub pos: String,
    pub frame: FrameId,
    pub lang: String,
}

/// The eight relation types admitted by the database format. Anything else is
/// rejected at load time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    Inheritance,
    PerspectiveOn,
    Using,
    Subframe,
    Precedes,
    SeeAlso,
    InchoativeOf,
    CausativeOf,
}

impl RelationType {
    pub const ALL: [RelationType; 8] = [
        RelationType::Inheritance,
        RelationType::PerspectiveOn,
        RelationType::Using,
        RelationType::Subframe,
        RelationType::Precedes,
        RelationType::SeeAlso,
        RelationType::InchoativeOf,
        RelationType::CausativeOf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationType::Inheritance => "inheritance",
            RelationType::PerspectiveOn => "perspective_on",
            RelationType::Using => "using",
            RelationType::Subframe => "subframe",
            RelationType::Precedes => "precedes",
            RelationType::SeeAlso => "see_also",
            RelationType::InchoativeOf => "inchoative_of",
            RelationType::CausativeOf => "causative_of",
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        RelationType::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or(())
    }
}

/// A typed directed edge from a parent frame to a child frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FrameRelation {
    pub relation_type: RelationType,
    pub parent: FrameId,
    pub child: FrameId,
}

/// Query direction for [`FrameGraph::related`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Parents,
    Children,
    Both,
}

/// Which end of the edge the neighbor occupies in a `related` result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeEnd {
    Parent,
    Child,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelatedFrame {
    pub frame: FrameId,
    pub relation_type: RelationType,
    pub end: EdgeEnd,
}

#[derive(Debug, Error)]
pub enum DbError {
    #[error("line {line}: malformed record: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: unknown relation type `{value}`")]
    UnknownRelationType { line: usize, value: String },
    #[error("relation references unknown frame id {id}")]
    DanglingFrameRef { id: ExternId },
    #[error("lexical unit {lu} references unknown frame id {id}")]
    DanglingLuFrame { lu: ExternId, id: ExternId },
    #[error("duplicate frame id {id}")]
    DuplicateFrameId { id: ExternId },
    #[error("duplicate frame name `{name}`")]
    DuplicateFrameName { name: String },
    #[error("duplicate lexical unit id {id}")]
    DuplicateLuId { id: ExternId },
    #[error("duplicate relation {relation_type} {parent} -> {child}")]
    DuplicateRelation {
        relation_type: RelationType,
        parent: ExternId,
        child: ExternId,
    },
    #[error("relation {relation_type} links frame {id} to itself")]
    SelfRelation { relation_type: RelationType, id: ExternId },
    #[error("lexical unit {lu} has an empty lemma")]
    EmptyLemma { lu: ExternId },
    #[error("unknown frame handle {0:?}")]
    UnknownFrame(FrameId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One invariant violation found by [`FrameGraph::validate`]. Violations are
/// data, not failures: a report full of them is still a successful validation
/// run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A directed cycle through the relation edges, as a frame-name sequence.
    Cycle { frames: Vec<String> },
    DanglingFrameRef { relation_type: RelationType, id: ExternId },
    DanglingLuFrame { lu: ExternId, id: ExternId },
    DuplicateFrameId { id: ExternId },
    DuplicateFrameName { name: String },
    DuplicateLuId { id: ExternId },
    DuplicateRelation {
        relation_type: RelationType,
        parent: String,
        child: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { frames } => write!(f, "cycle: {}", frames.join(" -> ")),
            Violation::DanglingFrameRef { relation_type, id } => {
                write!(f, "dangling frame reference in {relation_type} relation: {id}")
            }
            Violation::DanglingLuFrame { lu, id } => {
                write!(f, "lexical unit {lu} references unknown frame {id}")
            }
            Violation::DuplicateFrameId { id } => write!(f, "duplicate frame id {id}"),
            Violation::DuplicateFrameName { name } => write!(f, "duplicate frame name `{name}`"),
            Violation::DuplicateLuId { id } => write!(f, "duplicate lexical unit id {id}"),
            Violation::DuplicateRelation {
                relation_type,
                parent,
                child,
            } => write!(f, "duplicate relation {relation_type} {parent} -> {child}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Frames, lexical units and relations with adjacency indexes in both
/// directions. Immutable after construction; queries are read-only and safe
/// to run concurrently.
#[derive(Clone, Debug)]
pub struct FrameGraph {
    frames: Vec<Frame>,
    by_ext: HashMap<ExternId, FrameId>,
    by_name: HashMap<String, FrameId>,
    lexical_units: Vec<LexicalUnit>,
    by_lemma_lang: HashMap<(String, String), Vec<u32>>,
    by_lemma_pos_lang: HashMap<(String, String, String), Vec<u32>>,
    relations: Vec<FrameRelation>,
    parents_of: Vec<Vec<(FrameId, RelationType)>>,
    children_of: Vec<Vec<(FrameId, RelationType)>>,
    langs: HashSet<String>,
    /// Defects recorded by the unchecked builder path; folded into validate().
    defects: Vec<Violation>,
}

impl FrameGraph {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> impl Iterator<Item = &Frame> {
        self.frames.iter()
    }

    pub fn frame(&self, id: FrameId) -> Result<&Frame, DbError> {
        self.frames.get(id.index()).ok_or(DbError::UnknownFrame(id))
    }

    pub fn frame_name(&self, id: FrameId) -> &str {
        &self.frames[id.index()].name
    }

    pub fn frame_by_name(&self, name: &str) -> Option<FrameId> {
        self.by_name.get(name).copied()
    }

    pub fn frame_by_ext(&self, id: &ExternId) -> Option<FrameId> {
        self.by_ext.get(id).copied()
    }

    pub fn relations(&self) -> &[FrameRelation] {
        &self.relations
    }

    pub fn lexical_units(&self) -> &[LexicalUnit] {
        &self.lexical_units
    }

    pub fn has_lang(&self, lang: &str) -> bool {
        self.langs.contains(lang)
    }

    /// All distinct LU lemmas for a language, case-folded.
    pub fn lemma_inventory(&self, lang: &str) -> HashSet<&str> {
        self.lexical_units
            .iter()
            .filter(|lu| lu.lang == lang)
            .map(|lu| lu.lemma.as_str())
            .collect()
    }

    /// LUs whose case-folded lemma and language match, each paired with its
    /// owning frame. `pos`, when given, must match too. Results are sorted by
    /// (frame name, pos, lu id) so callers see a stable order.
    pub fn lookup_lemma(
        &self,
        lemma: &str,
        lang: &str,
        pos: Option<&str>,
    ) -> Vec<(&LexicalUnit, &Frame)> {
        let folded = lemma.to_lowercase();
        let indexes: &[u32] = match pos {
            Some(p) => self
                .by_lemma_pos_lang
                .get(&(folded.clone(), p.to_owned(), lang.to_owned()))
                .map(Vec::as_slice)
                .unwrap_or(&[]),
            None => self
                .by_lemma_lang
                .get(&(folded, lang.to_owned()))
                .map(Vec::as_slice)
                .unwrap_or(&[]),
        };
        let mut out: Vec<(&LexicalUnit, &Frame)> = indexes
            .iter()
            .map(|&i| {
                let lu = &self.lexical_units[i as usize];
                (lu, &self.frames[lu.frame.index()])
            })
            .collect();
        out.sort_by(|(lu_a, fr_a), (lu_b, fr_b)| {
            (&fr_a.name, &lu_a.pos, &lu_a.id).cmp(&(&fr_b.name, &lu_b.pos, &lu_b.id))
        });
        out
    }

    /// Neighbors of a frame under an optional relation-type filter and a
    /// direction, sorted by (neighbor name, relation type, edge end).
    pub fn related(
        &self,
        frame: FrameId,
        filter: Option<&HashSet<RelationType>>,
        direction: Direction,
    ) -> Result<Vec<RelatedFrame>, DbError> {
        if frame.index() >= self.frames.len() {
            return Err(DbError::UnknownFrame(frame));
        }
        let keep = |rt: RelationType| filter.is_none_or(|set| set.contains(&rt));
        let mut out = Vec::new();
        if matches!(direction, Direction::Parents | Direction::Both) {
            for &(parent, rt) in &self.parents_of[frame.index()] {
                if keep(rt) {
                    out.push(RelatedFrame {
                        frame: parent,
                        relation_type: rt,
                        end: EdgeEnd::Parent,
                    });
                }
            }
        }
        if matches!(direction, Direction::Children | Direction::Both) {
            for &(child, rt) in &self.children_of[frame.index()] {
                if keep(rt) {
                    out.push(RelatedFrame {
                        frame: child,
                        relation_type: rt,
                        end: EdgeEnd::Child,
                    });
                }
            }
        }
        out.sort_by(|a, b| {
            (self.frame_name(a.frame), a.relation_type, a.end)
                .cmp(&(self.frame_name(b.frame), b.relation_type, b.end))
        });
        Ok(out)
    }

    /// Checks every graph invariant: acyclicity, referential integrity,
    /// duplicate ids/names/relations, adjacency/store coherence. Graphs
    /// assembled by the checked loader can only ever be flagged for cycles.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = self.defects.clone();

        // Duplicate relation triples in the store.
        let mut seen: HashSet<(RelationType, FrameId, FrameId)> = HashSet::new();
        for rel in &self.relations {
            if !seen.insert((rel.relation_type, rel.parent, rel.child)) {
                violations.push(Violation::DuplicateRelation {
                    relation_type: rel.relation_type,
                    parent: self.frame_name(rel.parent).to_owned(),
                    child: self.frame_name(rel.child).to_owned(),
                });
            }
        }

        // Cycle scan: iterative DFS over parent->child edges, one reported
        // cycle per back edge.
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Grey,
            Black,
        }
        let n = self.frames.len();
        let mut color = vec![Color::White; n];
        for start in 0..n {
            if color[start] != Color::White {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = Color::Grey;
            while let Some(top) = stack.last_mut() {
                let node = top.0;
                let succ = &self.children_of[node];
                if top.1 < succ.len() {
                    let (child, _) = succ[top.1];
                    top.1 += 1;
                    match color[child.index()] {
                        Color::Grey => {
                            // Back edge: the cycle runs from `child` down the
                            // stack to `node` and closes back on `child`.
                            let from = stack
                                .iter()
                                .position(|&(f, _)| f == child.index())
                                .expect("grey node is on the stack");
                            let frames = stack[from..]
                                .iter()
                                .map(|&(f, _)| self.frames[f].name.clone())
                                .collect();
                            violations.push(Violation::Cycle { frames });
                        }
                        Color::White => {
                            color[child.index()] = Color::Grey;
                            stack.push((child.index(), 0));
                        }
                        Color::Black => {}
                    }
                } else {
                    color[node] = Color::Black;
                    stack.pop();
                }
            }
        }

        ValidationReport { violations }
    }
}

/// Convenience free function mirroring the graph method.
pub fn validate(graph: &FrameGraph) -> ValidationReport {
    graph.validate()
}

#[derive(Clone, Debug)]
struct RawFrame {
    ext_id: ExternId,
    name: String,
    fes: Vec<FrameElement>,
}

#[derive(Clone, Debug)]
struct RawLu {
    id: ExternId,
    lemma: String,
    pos: String,
    frame: ExternId,
    lang: String,
}

#[derive(Clone, Debug)]
struct RawRelation {
    relation_type: RelationType,
    parent: ExternId,
    child: ExternId,
}

/// Collects raw records and assembles a [`FrameGraph`]. `build` enforces the
/// referential and uniqueness invariants; `build_unchecked` keeps going and
/// records each problem as a defect for [`FrameGraph::validate`] to report.
/// Neither path rejects cycles: acyclicity is validate's job.
#[derive(Clone, Debug, Default)]
pub struct FrameGraphBuilder {
    frames: Vec<RawFrame>,
    lus: Vec<RawLu>,
    relations: Vec<RawRelation>,
}

impl FrameGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frame(
        &mut self,
        ext_id: impl Into<ExternId>,
        name: &str,
        fes: Vec<FrameElement>,
    ) -> &mut Self {
        self.frames.push(RawFrame {
            ext_id: ext_id.into(),
            name: name.to_owned(),
            fes,
        });
        self
    }

    pub fn lu(
        &mut self,
        id: impl Into<ExternId>,
        lemma: &str,
        pos: &str,
        frame: impl Into<ExternId>,
        lang: &str,
    ) -> &mut Self {
        self.lus.push(RawLu {
            id: id.into(),
            lemma: lemma.to_owned(),
            pos: pos.to_owned(),
            frame: frame.into(),
            lang: lang.to_owned(),
        });
        self
    }

    pub fn relation(
        &mut self,
        relation_type: RelationType,
        parent: impl Into<ExternId>,
        child: impl Into<ExternId>,
    ) -> &mut Self {
        self.relations.push(RawRelation {
            relation_type,
            parent: parent.into(),
            child: child.into(),
        });
        self
    }

    pub fn build(self) -> Result<FrameGraph, DbError> {
        let (graph, errors) = self.assemble();
        match errors.into_iter().next() {
            Some(err) => Err(err),
            None => Ok(graph),
        }
    }

    pub fn build_unchecked(self) -> FrameGraph {
        let (graph, _) = self.assemble();
        graph
    }

    fn assemble(self) -> (FrameGraph, Vec<DbError>) {
        let mut errors = Vec::new();
        let mut defects = Vec::new();

        let mut frames: Vec<Frame> = Vec::with_capacity(self.frames.len());
        let mut by_ext = HashMap::new();
        let mut by_name = HashMap::new();
        for raw in self.frames {
            if by_ext.contains_key(&raw.ext_id) {
                errors.push(DbError::DuplicateFrameId { id: raw.ext_id.clone() });
                defects.push(Violation::DuplicateFrameId { id: raw.ext_id });
                continue;
            }
            if by_name.contains_key(&raw.name) {
                errors.push(DbError::DuplicateFrameName { name: raw.name.clone() });
                defects.push(Violation::DuplicateFrameName { name: raw.name });
                continue;
            }
            let id = FrameId(frames.len() as u32);
            by_ext.insert(raw.ext_id.clone(), id);
            by_name.insert(raw.name.clone(), id);
            frames.push(Frame {
                id,
                ext_id: raw.ext_id,
                name: raw.name,
                frame_elements: raw.fes,
            });
        }

        let mut lexical_units: Vec<LexicalUnit> = Vec::with_capacity(self.lus.len());
        let mut lu_ids = HashSet::new();
        let mut by_lemma_lang: HashMap<(String, String), Vec<u32>> = HashMap::new();
        let mut by_lemma_pos_lang: HashMap<(String, String, String), Vec<u32>> = HashMap::new();
        let mut langs = HashSet::new();
        for raw in self.lus {
            if raw.lemma.is_empty() {
                errors.push(DbError::EmptyLemma { lu: raw.id.clone() });
                continue;
            }
            if !lu_ids.insert(raw.id.clone()) {
                errors.push(DbError::DuplicateLuId { id: raw.id.clone() });
                defects.push(Violation::DuplicateLuId { id: raw.id });
                continue;
            }
            let Some(&frame) = by_ext.get(&raw.frame) else {
                errors.push(DbError::DanglingLuFrame {
                    lu: raw.id.clone(),
                    id: raw.frame.clone(),
                });
                defects.push(Violation::DanglingLuFrame { lu: raw.id, id: raw.frame });
                continue;
            };
            let lemma = raw.lemma.to_lowercase();
            let index = lexical_units.len() as u32;
            by_lemma_lang
                .entry((lemma.clone(), raw.lang.clone()))
                .or_default()
                .push(index);
            by_lemma_pos_lang
                .entry((lemma.clone(), raw.pos.clone(), raw.lang.clone()))
                .or_default()
                .push(index);
            langs.insert(raw.lang.clone());
            lexical_units.push(LexicalUnit {
                id: raw.id,
                lemma,
                pos: raw.pos,
                frame,
                lang: raw.lang,
            });
        }

        let mut relations: Vec<FrameRelation> = Vec::with_capacity(self.relations.len());
        let mut triples = HashSet::new();
        let mut parents_of = vec![Vec::new(); frames.len()];
        let mut children_of = vec![Vec::new(); frames.len()];
        for raw in self.relations {
            let parent = by_ext.get(&raw.parent).copied();
            let child = by_ext.get(&raw.child).copied();
            let (Some(parent), Some(child)) = (parent, child) else {
                let missing = if parent.is_none() { raw.parent } else { raw.child };
                errors.push(DbError::DanglingFrameRef { id: missing.clone() });
                defects.push(Violation::DanglingFrameRef {
                    relation_type: raw.relation_type,
                    id: missing,
                });
                continue;
            };
            if parent == child {
                errors.push(DbError::SelfRelation {
                    relation_type: raw.relation_type,
                    id: frames[parent.index()].ext_id.clone(),
                });
                // A self-relation is a directed cycle of length one.
                defects.push(Violation::Cycle {
                    frames: vec![frames[parent.index()].name.clone()],
                });
                continue;
            }
            if !triples.insert((raw.relation_type, parent, child)) {
                errors.push(DbError::DuplicateRelation {
                    relation_type: raw.relation_type,
                    parent: frames[parent.index()].ext_id.clone(),
                    child: frames[child.index()].ext_id.clone(),
                });
                // Kept out of the adjacency but visible to validate() via the
                // relation store, so the report names it exactly once.
                relations.push(FrameRelation {
                    relation_type: raw.relation_type,
                    parent,
                    child,
                });
                continue;
            }
            parents_of[child.index()].push((parent, raw.relation_type));
            children_of[parent.index()].push((child, raw.relation_type));
            relations.push(FrameRelation {
                relation_type: raw.relation_type,
                parent,
                child,
            });
        }

        // Deterministic adjacency order regardless of input order.
        for list in parents_of.iter_mut().chain(children_of.iter_mut()) {
            list.sort_by_key(|&(f, rt)| (f, rt));
        }

        (
            FrameGraph {
                frames,
                by_ext,
                by_name,
                lexical_units,
                by_lemma_lang,
                by_lemma_pos_lang,
                relations,
                parents_of,
                children_of,
                langs,
                defects,
            },
            errors,
        )
    }
}

#[derive(Deserialize)]
struct RawFeRecord {
    name: String,
    core: bool,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawRecord {
    Frame {
        id: ExternId,
        name: String,
        #[serde(default)]
        fes: Vec<RawFeRecord>,
    },
    Lu {
        id: ExternId,
        lemma: String,
        pos: String,
        frame: ExternId,
        lang: String,
    },
    Relation {
        #[serde(rename = "type")]
        relation_type: String,
        parent: ExternId,
        child: ExternId,
    },
}

/// Reads a line-delimited frame database. Lines may arrive in any order;
/// frame references are resolved after the full stream has been read. The
/// loader enforces referential integrity and uniqueness but accepts cyclic
/// relation structures; run [`FrameGraph::validate`] to detect those.
pub fn load_frame_database<R: BufRead>(reader: R) -> Result<FrameGraph, DbError> {
    let mut builder = FrameGraphBuilder::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord =
            serde_json::from_str(&line).map_err(|e| DbError::Malformed {
                line: lineno,
                msg: e.to_string(),
            })?;
        match record {
            RawRecord::Frame { id, name, fes } => {
                let fes = fes
                    .into_iter()
                    .map(|fe| FrameElement {
                        name: fe.name,
                        coreness: if fe.core { Coreness::Core } else { Coreness::NonCore },
                    })
                    .collect();
                builder.frame(id, &name, fes);
            }
            RawRecord::Lu {
                id,
                lemma,
                pos,
                frame,
                lang,
            } => {
                builder.lu(id, &lemma, &pos, frame, &lang);
            }
            RawRecord::Relation {
                relation_type,
                parent,
                child,
            } => {
                let rt = RelationType::from_str(&relation_type).map_err(|_| {
                    DbError::UnknownRelationType {
                        line: lineno,
                        value: relation_type,
                    }
                })?;
                builder.relation(rt, parent, child);
            }
        }
    }
    builder.build()
}
