//! Run configuration: defaults, then the config file (FRAMESIM_CONFIG or
//! --config), then command-line flags, later layers winning.

use crate::CliError;
use framesim_core::activation::{SpreadParams, Traversal};
use framesim_core::fn_graph::RelationType;
use serde::Deserialize;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    Csv,
    Records,
    SvgHistogram,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "records" => Ok(OutputFormat::Records),
            "svg-histogram" => Ok(OutputFormat::SvgHistogram),
            other => Err(format!(
                "unknown format `{other}` (expected csv, records or svg-histogram)"
            )),
        }
    }
}

fn parse_traversal(s: &str) -> Result<Traversal, String> {
    match s.replace('-', "_").as_str() {
        "undirected" => Ok(Traversal::Undirected),
        "parents_only" => Ok(Traversal::ParentsOnly),
        "children_only" => Ok(Traversal::ChildrenOnly),
        other => Err(format!(
            "unknown traversal `{other}` (expected undirected, parents-only or children-only)"
        )),
    }
}

fn parse_relations(list: &str) -> Result<HashSet<RelationType>, String> {
    let mut set = HashSet::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let rt = RelationType::from_str(name)
            .map_err(|_| format!("unknown relation type `{name}`"))?;
        set.insert(rt);
    }
    if set.is_empty() {
        return Err("relation list is empty".to_owned());
    }
    Ok(set)
}

/// Shape of the JSON config file. Every field is optional; flags override.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub frame_db: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub decay: Option<f64>,
    pub max_depth: Option<u32>,
    pub threshold: Option<f64>,
    pub traversal: Option<String>,
    pub relations: Option<Vec<String>>,
    pub relation_weights: Option<HashMap<String, f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<String>>,
    pub bins: Option<usize>,
    pub quiet: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Input(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("bad config {}: {e}", path.display())))
    }
}

/// Flag values shared by the pipeline subcommands.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct CommonFlags {
    /// Frame database (line-delimited records)
    #[arg(long, value_name = "PATH")]
    pub frame_db: Option<PathBuf>,
    /// Corpus file (line-delimited records)
    #[arg(long, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    /// Relatedness table file (cache for compare, output for table)
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,
    /// Per-hop energy decay in (0,1)
    #[arg(long, value_name = "R")]
    pub decay: Option<f64>,
    /// Propagation depth cap
    #[arg(long, value_name = "N")]
    pub max_depth: Option<u32>,
    /// Minimum retained activation in [0,1)
    #[arg(long, value_name = "R")]
    pub threshold: Option<f64>,
    /// Edge traversal: undirected, parents-only or children-only
    #[arg(long, value_name = "MODE")]
    pub traversal: Option<String>,
    /// Comma-separated relation types participating in propagation
    #[arg(long, value_name = "LIST")]
    pub relations: Option<String>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats: csv, records, svg-histogram
    #[arg(long, value_name = "LIST")]
    pub format: Option<String>,
    /// Histogram bin count
    #[arg(long, value_name = "N")]
    pub bins: Option<usize>,
}

/// Fully resolved configuration for one command run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub frame_db: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub params: SpreadParams,
    pub out: PathBuf,
    pub formats: BTreeSet<OutputFormat>,
    pub bins: usize,
    pub quiet: bool,
}

impl RunConfig {
    pub fn resolve(
        file: &FileConfig,
        flags: &CommonFlags,
        quiet_flag: bool,
    ) -> Result<RunConfig, CliError> {
        let mut params = SpreadParams::default();
        if let Some(decay) = flags.decay.or(file.decay) {
            params.decay = decay;
        }
        if let Some(depth) = flags.max_depth.or(file.max_depth) {
            params.max_depth = depth;
        }
        if let Some(threshold) = flags.threshold.or(file.threshold) {
            params.threshold = threshold;
        }
        let traversal = flags.traversal.clone().or_else(|| file.traversal.clone());
        if let Some(t) = traversal {
            params.traversal = parse_traversal(&t).map_err(CliError::Usage)?;
        }
        if let Some(list) = &flags.relations {
            params.relation_types = Some(parse_relations(list).map_err(CliError::Usage)?);
        } else if let Some(list) = &file.relations {
            params.relation_types =
                Some(parse_relations(&list.join(",")).map_err(CliError::Usage)?);
        }
        if let Some(weights) = &file.relation_weights {
            for (name, weight) in weights {
                let rt = RelationType::from_str(name).map_err(|_| {
                    CliError::Input(format!("config relation_weights: unknown type `{name}`"))
                })?;
                params.relation_weights.insert(rt, *weight);
            }
        }
        params
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;

        let mut formats = BTreeSet::new();
        let format_list: Option<Vec<String>> = match (&flags.format, &file.format) {
            (Some(list), _) => Some(list.split(',').map(|s| s.trim().to_owned()).collect()),
            (None, Some(list)) => Some(list.clone()),
            (None, None) => None,
        };
        match format_list {
            Some(list) => {
                for name in list.iter().filter(|s| !s.is_empty()) {
                    formats.insert(OutputFormat::from_str(name).map_err(CliError::Usage)?);
                }
            }
            None => {
                formats.insert(OutputFormat::Csv);
            }
        }

        Ok(RunConfig {
            frame_db: flags.frame_db.clone().or_else(|| file.frame_db.clone()),
            corpus: flags.corpus.clone().or_else(|| file.corpus.clone()),
            table: flags.table.clone().or_else(|| file.table.clone()),
            params,
            out: flags
                .out
                .clone()
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("out")),
            formats,
            bins: flags.bins.or(file.bins).unwrap_or(10),
            quiet: quiet_flag || file.quiet.unwrap_or(false),
        })
    }

    pub fn frame_db(&self) -> Result<&Path, CliError> {
        self.frame_db
            .as_deref()
            .ok_or_else(|| CliError::Usage("--frame-db is required".to_owned()))
    }

    pub fn corpus(&self) -> Result<&Path, CliError> {
        self.corpus
            .as_deref()
            .ok_or_else(|| CliError::Usage("--corpus is required".to_owned()))
    }
}
