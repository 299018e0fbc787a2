//! Browser demo over the bundled toy frame database: explore spread
//! activation parameters, compare two captions, and run t-tests, all in a
//! static page. The `*_json` functions are plain string-in/JSON-out so the
//! logic is testable natively; the `#[wasm_bindgen]` exports are thin
//! wrappers.

use framesim_core::activation::{spread, SpreadParams, Traversal};
use framesim_core::daisy;
use framesim_core::fn_graph::{load_frame_database, FrameGraph, FrameId};
use framesim_core::similarity::{align, cosine, AssociativeArray};
use framesim_core::stats::{t_test, SummaryStats, TTestKind};
use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::OnceLock;
use wasm_bindgen::prelude::*;

const DEMO_DB: &str = include_str!("../../../fixtures/toy.framedb");

fn graph() -> &'static FrameGraph {
    static GRAPH: OnceLock<FrameGraph> = OnceLock::new();
    GRAPH.get_or_init(|| load_frame_database(DEMO_DB.as_bytes()).expect("bundled db is valid"))
}

fn parse_traversal(s: &str) -> Result<Traversal, String> {
    match s.replace('-', "_").as_str() {
        "undirected" => Ok(Traversal::Undirected),
        "parents_only" => Ok(Traversal::ParentsOnly),
        "children_only" => Ok(Traversal::ChildrenOnly),
        other => Err(format!("unknown traversal `{other}`")),
    }
}

fn params_for(decay: f64, max_depth: u32, threshold: f64, traversal: &str) -> Result<SpreadParams, String> {
    let params = SpreadParams {
        decay,
        max_depth,
        threshold,
        traversal: parse_traversal(traversal)?,
        ..SpreadParams::default()
    };
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

/// The demo graph as JSON: frame names plus typed parent->child edges.
pub fn graph_json() -> String {
    let g = graph();
    let nodes: Vec<&str> = g.frames().map(|f| f.name.as_str()).collect();
    let edges: Vec<serde_json::Value> = g
        .relations()
        .iter()
        .map(|rel| {
            serde_json::json!({
                "parent": g.frame_name(rel.parent),
                "child": g.frame_name(rel.child),
                "type": rel.relation_type.as_str(),
            })
        })
        .collect();
    serde_json::json!({ "nodes": nodes, "edges": edges }).to_string()
}

/// Spread activation from comma-separated seed frame names; returns one
/// activation per frame (zero when dropped).
pub fn spread_json(
    seed_names: &str,
    decay: f64,
    max_depth: u32,
    threshold: f64,
    traversal: &str,
) -> Result<String, String> {
    let g = graph();
    let params = params_for(decay, max_depth, threshold, traversal)?;
    let mut seeds: BTreeMap<FrameId, f64> = BTreeMap::new();
    for name in seed_names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let frame = g
            .frame_by_name(name)
            .ok_or_else(|| format!("unknown frame `{name}`"))?;
        seeds.insert(frame, 1.0);
    }
    if seeds.is_empty() {
        return Err("pick at least one seed frame".to_owned());
    }
    let map = spread(g, &seeds, &params).map_err(|e| e.to_string())?;
    let rows: Vec<serde_json::Value> = g
        .frames()
        .map(|f| {
            serde_json::json!({
                "name": f.name,
                "activation": map.activation(f.id),
                "seed": seeds.contains_key(&f.id),
            })
        })
        .collect();
    Ok(serde_json::json!({ "frames": rows }).to_string())
}

/// Parses two captions (en or pt), compares their evoked frame sets, and
/// reports the cosine plus the aligned activation vectors.
pub fn compare_captions_json(
    text_a: &str,
    lang_a: &str,
    text_b: &str,
    lang_b: &str,
    decay: f64,
    max_depth: u32,
    threshold: f64,
) -> Result<String, String> {
    let g = graph();
    let params = params_for(decay, max_depth, threshold, "undirected")?;
    let parse = |text: &str, lang: &str, id: &str| {
        daisy::parse(id, text, lang, g, &params).map_err(|e| e.to_string())
    };
    let out_a = parse(text_a, lang_a, "a")?;
    let out_b = parse(text_b, lang_b, "b")?;
    if out_a.frames.evoked.is_empty() || out_b.frames.evoked.is_empty() {
        return Err("one of the captions evokes no frames in the demo lexicon".to_owned());
    }

    let seeds_vector = |evoked: &std::collections::BTreeSet<FrameId>| {
        let seeds: BTreeMap<FrameId, f64> = evoked.iter().map(|&f| (f, 1.0)).collect();
        spread(g, &seeds, &params).map(|m| AssociativeArray::from_map(&m.entries))
    };
    let arr_a = seeds_vector(&out_a.frames.evoked).map_err(|e| e.to_string())?;
    let arr_b = seeds_vector(&out_b.frames.evoked).map_err(|e| e.to_string())?;
    let (arr_a, arr_b) = align(&arr_a, &arr_b);
    let similarity = cosine(&arr_a, &arr_b).map_err(|e| e.to_string())?;

    let names = |evoked: &std::collections::BTreeSet<FrameId>| -> Vec<&str> {
        evoked.iter().map(|&f| g.frame_name(f)).collect()
    };
    let vector: Vec<serde_json::Value> = arr_a
        .iter()
        .zip(arr_b.iter())
        .map(|((frame, va), (_, vb))| {
            serde_json::json!({ "frame": g.frame_name(frame), "a": va, "b": vb })
        })
        .collect();
    let tokens = |out: &daisy::ParseOutput| -> Vec<serde_json::Value> {
        out.assignments
            .iter()
            .map(|a| {
                serde_json::json!({
                    "token": a.token.surface,
                    "frame": g.frame_name(a.frame),
                })
            })
            .collect()
    };
    Ok(serde_json::json!({
        "cosine": similarity,
        "frames_a": names(&out_a.frames.evoked),
        "frames_b": names(&out_b.frames.evoked),
        "tokens_a": tokens(&out_a),
        "tokens_b": tokens(&out_b),
        "vector": vector,
    })
    .to_string())
}

/// Two-sample t-test from summary statistics.
pub fn t_test_json(
    mean1: f64,
    stdev1: f64,
    n1: u32,
    mean2: f64,
    stdev2: f64,
    n2: u32,
    kind: &str,
) -> Result<String, String> {
    let kind = TTestKind::from_str(kind).map_err(|_| format!("unknown kind `{kind}`"))?;
    let a = SummaryStats::new(mean1, stdev1, n1 as u64).map_err(|e| e.to_string())?;
    let b = SummaryStats::new(mean2, stdev2, n2 as u64).map_err(|e| e.to_string())?;
    let r = t_test(&a, &b, kind).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "t": r.t,
        "df": r.df,
        "p": r.p_two_sided,
        "kind": kind.as_str(),
    })
    .to_string())
}

#[wasm_bindgen(js_name = graphJson)]
pub fn graph_json_js() -> String {
    graph_json()
}

#[wasm_bindgen(js_name = spreadJson)]
pub fn spread_json_js(
    seed_names: &str,
    decay: f64,
    max_depth: u32,
    threshold: f64,
    traversal: &str,
) -> Result<String, JsValue> {
    spread_json(seed_names, decay, max_depth, threshold, traversal).map_err(|e| e.into())
}

#[wasm_bindgen(js_name = compareCaptionsJson)]
pub fn compare_captions_json_js(
    text_a: &str,
    lang_a: &str,
    text_b: &str,
    lang_b: &str,
    decay: f64,
    max_depth: u32,
    threshold: f64,
) -> Result<String, JsValue> {
    compare_captions_json(text_a, lang_a, text_b, lang_b, decay, max_depth, threshold)
        .map_err(|e| e.into())
}

#[wasm_bindgen(js_name = tTestJson)]
pub fn t_test_json_js(
    mean1: f64,
    stdev1: f64,
    n1: u32,
    mean2: f64,
    stdev2: f64,
    n2: u32,
    kind: &str,
) -> Result<String, JsValue> {
    t_test_json(mean1, stdev1, n1, mean2, stdev2, n2, kind).map_err(|e| e.into())
}
