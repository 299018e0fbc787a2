//! The five subcommands: validate, table, parse, compare, report.

use crate::config::{OutputFormat, RunConfig};
use crate::output::{log, render_histogram};
use crate::CliError;
use framesim_core::activation::{build_relatedness_table, RelatednessTable};
use framesim_core::corpus::{
    self, histogram, load_corpus, Corpus, MergePolicy, Payload, Setup, SimilaritySample,
};
use framesim_core::daisy;
use framesim_core::fn_graph::{load_frame_database, FrameGraph};
use framesim_core::similarity::{align, build_array};
use framesim_core::stats::{summarize, t_test, SummaryStats, TTestKind};
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent()
        && !parent.as_os_str().is_empty()
    {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn load_graph(cfg: &RunConfig) -> Result<FrameGraph, CliError> {
    let path = cfg.frame_db()?;
    let graph = load_frame_database(open(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(graph)
}

fn load_corpus_file(cfg: &RunConfig, graph: &FrameGraph) -> Result<Corpus, CliError> {
    let path = cfg.corpus()?;
    load_corpus(open(path)?, graph, MergePolicy::Error)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `validate`: loads the database and prints every invariant violation, one
/// per line, on standard output. Exit 0 when clean, 3 when violations exist.
pub fn cmd_validate(cfg: &RunConfig) -> Result<(), CliError> {
    let graph = load_graph(cfg)?;
    let report = graph.validate();
    for violation in &report.violations {
        println!("{violation}");
    }
    if report.is_empty() {
        log(cfg.quiet, "info", "frame database is valid");
        Ok(())
    } else {
        Err(CliError::Validation(report.violations.len()))
    }
}

fn table_path(cfg: &RunConfig) -> PathBuf {
    cfg.table
        .clone()
        .unwrap_or_else(|| cfg.out.join("table.records"))
}

/// `table`: builds the full relatedness table and writes it as line
/// records. Re-running with identical inputs produces identical bytes.
pub fn cmd_table(cfg: &RunConfig) -> Result<(), CliError> {
    let graph = load_graph(cfg)?;
    let report = graph.validate();
    if !report.is_empty() {
        for violation in &report.violations {
            log(cfg.quiet, "error", &violation.to_string());
        }
        return Err(CliError::Validation(report.violations.len()));
    }
    let table = build_relatedness_table(&graph, &cfg.params, None)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let path = table_path(cfg);
    let mut out = create(&path)?;
    table
        .write(&graph, &mut out)
        .map_err(|e| CliError::Input(e.to_string()))?;
    out.flush().map_err(|e| CliError::Input(e.to_string()))?;
    log(
        cfg.quiet,
        "info",
        &format!("wrote {} rows to {}", table.len(), path.display()),
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct ParsedRecord<'a> {
    annotation: &'a str,
    image: &'a str,
    setup: Setup,
    lang: &'a str,
    frames: Vec<&'a str>,
    lemmas: usize,
    evoking: usize,
}

/// `parse`: runs the disambiguation pipeline over every caption record
/// (optionally filtered by setup) and writes per-record frame sets plus the
/// per-token trace stream. Individual failures are logged and counted; any
/// failure makes the run exit 4.
pub fn cmd_parse(cfg: &RunConfig, setups: &[Setup]) -> Result<(), CliError> {
    let graph = load_graph(cfg)?;
    let corpus = load_corpus_file(cfg, &graph)?;
    let wanted: Vec<Setup> = if setups.is_empty() {
        Setup::ALL.into_iter().filter(|s| s.is_text()).collect()
    } else {
        setups.to_vec()
    };

    let records: Vec<_> = corpus
        .records()
        .iter()
        .filter(|r| r.setup.is_text() && wanted.contains(&r.setup))
        .collect();

    let results: Vec<_> = records
        .par_iter()
        .map(|record| {
            let Payload::Text(text) = &record.payload else {
                unreachable!("text records filtered above");
            };
            daisy::parse(&record.record_id, text, &record.lang, &graph, &cfg.params)
                .map(|out| (*record, out))
                .map_err(|e| (record.record_id.clone(), e.to_string()))
        })
        .collect();

    let mut parsed = create(&cfg.out.join("parse.records"))?;
    let mut traces = create(&cfg.out.join("trace.records"))?;
    let mut failures = 0usize;
    for result in results {
        match result {
            Ok((record, out)) => {
                let mut frames: Vec<&str> = out
                    .frames
                    .evoked
                    .iter()
                    .map(|&f| graph.frame_name(f))
                    .collect();
                frames.sort_unstable();
                let line = ParsedRecord {
                    annotation: &record.record_id,
                    image: &record.image_id,
                    setup: record.setup,
                    lang: &record.lang,
                    frames,
                    lemmas: out.lemma_count,
                    evoking: out.evoking_lemma_count,
                };
                writeln!(parsed, "{}", serde_json::to_string(&line).expect("serializes"))
                    .map_err(|e| CliError::Input(e.to_string()))?;
                for trace in out.trace_records(&graph) {
                    writeln!(traces, "{}", serde_json::to_string(&trace).expect("serializes"))
                        .map_err(|e| CliError::Input(e.to_string()))?;
                }
            }
            Err((id, msg)) => {
                failures += 1;
                log(cfg.quiet, "error", &format!("record {id}: {msg}"));
            }
        }
    }
    parsed.flush().map_err(|e| CliError::Input(e.to_string()))?;
    traces.flush().map_err(|e| CliError::Input(e.to_string()))?;
    log(
        cfg.quiet,
        "info",
        &format!("parsed {} records, {failures} failures", records.len()),
    );
    if failures > 0 {
        return Err(CliError::Partial(format!("{failures} records failed to parse")));
    }
    Ok(())
}

fn load_or_build_table(
    cfg: &RunConfig,
    graph: &FrameGraph,
) -> Result<RelatednessTable, CliError> {
    if let Some(path) = &cfg.table
        && path.exists()
    {
        log(
            cfg.quiet,
            "info",
            &format!("loading relatedness table from {}", path.display()),
        );
        return RelatednessTable::read(graph, open(path)?, cfg.params.clone())
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())));
    }
    build_relatedness_table(graph, &cfg.params, None).map_err(|e| CliError::Input(e.to_string()))
}

#[derive(serde::Serialize)]
struct CompareSummary<'a> {
    comparison: String,
    setup_a: Setup,
    setup_b: Setup,
    n: usize,
    mean: f64,
    stdev: f64,
    skipped: &'a corpus::SkipReport,
}

/// `compare`: pairwise cosine similarities for every image present in both
/// setups. Writes the canonical CSV, optional associative-array records and
/// an optional SVG histogram, and emits a summary record on stdout.
pub fn cmd_compare(cfg: &RunConfig, setup_a: Setup, setup_b: Setup) -> Result<(), CliError> {
    let graph = load_graph(cfg)?;
    let corpus = load_corpus_file(cfg, &graph)?;
    let table = load_or_build_table(cfg, &graph)?;
    let (sample, skip) =
        corpus::pairwise_similarities(&corpus, setup_a, setup_b, &graph, &table, &cfg.params);

    let stem = format!("compare_{setup_a}_{setup_b}");
    if cfg.formats.contains(&OutputFormat::Csv) {
        let mut out = create(&cfg.out.join(format!("{stem}.csv")))?;
        sample
            .write_csv(&mut out)
            .map_err(|e| CliError::Input(e.to_string()))?;
        out.flush().map_err(|e| CliError::Input(e.to_string()))?;
    }
    if cfg.formats.contains(&OutputFormat::Records) {
        let mut out = create(&cfg.out.join(format!("arrays_{setup_a}_{setup_b}.records")))?;
        for (image, _) in &sample.pairs {
            let rec_a = corpus.get(image, setup_a).expect("scored image");
            let rec_b = corpus.get(image, setup_b).expect("scored image");
            let ann_a = corpus::annotation_frames(rec_a, &graph, &cfg.params)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let ann_b = corpus::annotation_frames(rec_b, &graph, &cfg.params)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let arr_a = build_array(&ann_a, &table).map_err(|e| CliError::Input(e.to_string()))?;
            let arr_b = build_array(&ann_b, &table).map_err(|e| CliError::Input(e.to_string()))?;
            let (arr_a, arr_b) = align(&arr_a, &arr_b);
            writeln!(out, "{}", arr_a.to_record(&format!("{image}:{setup_a}"), &graph))
                .map_err(|e| CliError::Input(e.to_string()))?;
            writeln!(out, "{}", arr_b.to_record(&format!("{image}:{setup_b}"), &graph))
                .map_err(|e| CliError::Input(e.to_string()))?;
        }
        out.flush().map_err(|e| CliError::Input(e.to_string()))?;
    }
    if cfg.formats.contains(&OutputFormat::SvgHistogram) && !sample.pairs.is_empty() {
        let bins = histogram(&sample.cosines(), cfg.bins)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let svg = render_histogram(&bins, &format!("{setup_a} x {setup_b}"));
        let mut out = create(&cfg.out.join(format!("{stem}.svg")))?;
        out.write_all(svg.as_bytes())
            .map_err(|e| CliError::Input(e.to_string()))?;
        out.flush().map_err(|e| CliError::Input(e.to_string()))?;
    }

    let cosines = sample.cosines();
    let (mean, stdev) = framesim_core::stats::mean_and_stdev(&cosines);
    let summary = CompareSummary {
        comparison: format!("{setup_a} x {setup_b}"),
        setup_a,
        setup_b,
        n: sample.pairs.len(),
        mean,
        stdev,
        skipped: &skip,
    };
    let summary_line = serde_json::to_string(&summary).expect("serializes");
    println!("{summary_line}");
    let mut out = create(&cfg.out.join(format!("{stem}.summary.record")))?;
    writeln!(out, "{summary_line}").map_err(|e| CliError::Input(e.to_string()))?;
    out.flush().map_err(|e| CliError::Input(e.to_string()))?;

    if sample.pairs.is_empty() {
        log(
            cfg.quiet,
            "error",
            &format!("no images shared between {setup_a} and {setup_b}"),
        );
        return Err(CliError::Partial("empty similarity sample".to_owned()));
    }
    Ok(())
}

/// One side of a report comparison: inline summary statistics or a
/// similarity CSV produced by `compare`.
pub enum ReportInput {
    Summary(SummaryStats),
    Csv(PathBuf),
}

fn side_stats(input: &ReportInput) -> Result<(SummaryStats, String), CliError> {
    match input {
        ReportInput::Summary(stats) => Ok((
            *stats,
            format!("summary({},{},{})", stats.mean, stats.stdev, stats.n),
        )),
        ReportInput::Csv(path) => {
            let sample = SimilaritySample::read_csv(open(path)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let stats = summarize(&sample.cosines())
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Ok((stats, format!("{} x {}", sample.setups.0, sample.setups.1)))
        }
    }
}

#[derive(serde::Serialize)]
struct ReportRecord {
    comparison: String,
    kind: TTestKind,
    t: f64,
    df: f64,
    p: f64,
    n1: u64,
    n2: u64,
}

/// `report`: a two-sample t-test over two inputs, each either inline
/// summary statistics or a similarity CSV. Emits one report record on
/// stdout and appends it to `report.records` in the output directory.
pub fn cmd_report(
    cfg: &RunConfig,
    inputs: &[ReportInput],
    kind: TTestKind,
    label: Option<&str>,
) -> Result<(), CliError> {
    let [left, right] = inputs else {
        return Err(CliError::Usage(format!(
            "report needs exactly two inputs (got {}); pass --from-summary and/or --from-csv twice",
            inputs.len()
        )));
    };
    let (a, name_a) = side_stats(left)?;
    let (b, name_b) = side_stats(right)?;
    let result = t_test(&a, &b, kind).map_err(|e| CliError::Input(e.to_string()))?;
    let record = ReportRecord {
        comparison: label
            .map(str::to_owned)
            .unwrap_or_else(|| format!("{name_a} vs {name_b}")),
        kind,
        t: result.t,
        df: result.df,
        p: result.p_two_sided,
        n1: a.n,
        n2: b.n,
    };
    let line = serde_json::to_string(&record).expect("serializes");
    println!("{line}");
    let path = cfg.out.join("report.records");
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    writeln!(file, "{line}").map_err(|e| CliError::Input(e.to_string()))?;
    Ok(())
}

/// Parses a `--from-summary M,S,N` value.
pub fn parse_summary_spec(spec: &str) -> Result<SummaryStats, String> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [mean, stdev, n] = parts.as_slice() else {
        return Err(format!("expected M,S,N, got `{spec}`"));
    };
    let mean: f64 = mean.parse().map_err(|e| format!("bad mean: {e}"))?;
    let stdev: f64 = stdev.parse().map_err(|e| format!("bad stdev: {e}"))?;
    let n: u64 = n.parse().map_err(|e| format!("bad n: {e}"))?;
    SummaryStats::new(mean, stdev, n).map_err(|e| e.to_string())
}

