//! Command-line verbs. Exit codes: 0 success, 2 malformed input, 3 corpus
//! mismatch, 4 provider or configuration failure, 1 anything else.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use subckt_core::benchmark::{corpus_stats, bundled_corpus, prepare, TaxonomyMap};
use subckt_core::detect::detect;
use subckt_core::metrics::{aggregate, evaluate_netlist};
use subckt_core::pipeline::{bundled_demos, identify_with_codebase, run_pipeline, LogRecord, PipelineConfig, Target};
use subckt_core::{default_reserved, AnnotationSet, Level, NetRoles, RoleOverrides};

use crate::config::PipelineFile;
use crate::corpus::{self, CorpusError};
use crate::sandbox::{SubprocessRunner, DEFAULT_INTERPRETER};
use crate::store;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Provider(String),
    #[error("{0:#}")]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Mismatch(_) => 3,
            CliError::Provider(_) => 4,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        if e.is_parse() {
            CliError::Parse(e.to_string())
        } else {
            CliError::Other(e.into())
        }
    }
}

impl From<store::StoreError> for CliError {
    fn from(e: store::StoreError) -> Self {
        match e {
            store::StoreError::Corpus(c) => c.into(),
            other => CliError::Other(other.into()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "subckt", version, about = "Analog subcircuit identification in flat SPICE netlists")]
pub struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the rule-based detectors on a netlist or a directory of netlists.
    Identify(IdentifyArgs),
    /// Score prediction documents against ground truth.
    Evaluate(EvaluateArgs),
    /// Anonymize and normalize a labeled corpus.
    Prepare(PrepareArgs),
    /// Label and size statistics of a corpus.
    Stats(StatsArgs),
    /// Generate identifier scripts with a language model.
    Pipeline(PipelineArgs),
    /// Run a generated codebase on netlists.
    Infer(InferArgs),
}

fn parse_level(s: &str) -> Result<Level, String> {
    Level::parse(s).ok_or_else(|| format!("unknown level '{s}' (expected hl1, hl2 or hl3)"))
}

#[derive(Debug, Args)]
pub struct LevelsArg {
    /// Comma-separated hierarchy levels.
    #[arg(long, value_delimiter = ',', value_parser = parse_level, default_value = "hl1,hl2,hl3")]
    pub levels: Vec<Level>,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub levels: LevelsArg,
    /// Output directory; documents go to stdout without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub supply: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub ground: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub inputs: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub outputs: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub bias: Option<Vec<String>>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub pred_dir: PathBuf,
    pub truth_dir: PathBuf,
    #[command(flatten)]
    pub levels: LevelsArg,
    /// Report file; stdout without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Net names kept verbatim; the default set when absent.
    #[arg(long, value_delimiter = ',')]
    pub reserved_nets: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Corpus directory; the bundled demonstrations when absent.
    pub dir: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated targets (HL1, CM, DiffPair, Inverter, HL3); all by default.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<String>>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seconds per script execution.
    #[arg(long)]
    pub timeout: Option<u64>,
    #[arg(long)]
    pub retry_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub codebase: PathBuf,
    #[command(flatten)]
    pub levels: LevelsArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,
    #[arg(long, default_value = DEFAULT_INTERPRETER)]
    pub interpreter: String,
    #[arg(long)]
    pub workers: Option<usize>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Identify(a) => identify(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Prepare(a) => prepare_corpus(a),
        Command::Stats(a) => stats(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Infer(a) => infer(a),
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .context("worker pool")
        .map_err(CliError::Other)
}

/// Writes to `out` when given; otherwise prints, with a header per document
/// unless there is exactly one.
fn emit(out: Option<&Path>, results: &[(String, AnnotationSet)], levels: &[Level]) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            for (id, set) in results {
                corpus::write_levels(dir, id, set, levels)?;
            }
        }
        None => {
            let single = results.len() == 1 && levels.len() == 1;
            for (id, set) in results {
                for level in levels {
                    if !single {
                        println!("# {id} {}", level.as_str());
                    }
                    print!("{}", set.to_document(Some(*level)));
                }
            }
        }
    }
    Ok(())
}

fn identify(a: IdentifyArgs) -> Result<(), CliError> {
    let overrides = RoleOverrides {
        supply: a.supply,
        ground: a.ground,
        inputs: a.inputs,
        outputs: a.outputs,
        bias: a.bias,
    };
    let paths = corpus::netlist_paths(&a.input)?;
    let levels = a.levels.levels;
    let results: Vec<Result<(String, AnnotationSet), CliError>> = pool(a.workers)?.install(|| {
        paths
            .par_iter()
            .map(|p| {
                let netlist = corpus::read_netlist(p)?;
                let roles = NetRoles::classify(&netlist, &overrides).map_err(|e| CliError::Parse(e.to_string()))?;
                Ok((corpus::stem(p), detect(&netlist, &roles, &levels)))
            })
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    emit(a.out.as_deref(), &results, &levels)
}

/// Ids with a label document of one of `levels` in `dir`.
fn label_ids(dir: &Path, levels: &[Level]) -> Result<BTreeSet<String>, CliError> {
    let mut ids = BTreeSet::new();
    for level in levels {
        ids.extend(corpus::ids_with_ext(dir, level.extension())?);
    }
    Ok(ids)
}

fn evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let levels = a.levels.levels;
    for dir in [&a.pred_dir, &a.truth_dir] {
        if !dir.is_dir() {
            return Err(CliError::Other(anyhow::anyhow!("{} is not a directory", dir.display())));
        }
    }
    let pred_ids = label_ids(&a.pred_dir, &levels)?;
    let truth_ids = label_ids(&a.truth_dir, &levels)?;
    let orphans: Vec<&String> = pred_ids.difference(&truth_ids).collect();
    if !orphans.is_empty() {
        let names: Vec<&str> = orphans.iter().map(|s| s.as_str()).collect();
        return Err(CliError::Mismatch(format!("predictions without ground truth: {}", names.join(", "))));
    }
    for id in truth_ids.difference(&pred_ids) {
        log::warn!("{id}: no prediction, scored as empty");
    }
    let taxonomy = TaxonomyMap::default();
    let rows: Vec<Result<_, CliError>> = pool(a.workers)?.install(|| {
        truth_ids
            .par_iter()
            .map(|id| {
                let present: Vec<Level> = levels
                    .iter()
                    .copied()
                    .filter(|l| a.truth_dir.join(format!("{id}.{}", l.extension())).exists())
                    .collect();
                let truth = corpus::read_truth(&a.truth_dir, id, &present, &taxonomy)?;
                let pred = corpus::read_truth(&a.pred_dir, id, &present, &taxonomy)?;
                let netlist_path = a.truth_dir.join(format!("{id}.{}", corpus::NETLIST_EXT));
                let universe = if netlist_path.exists() {
                    corpus::universe(&corpus::read_netlist(&netlist_path)?)
                } else {
                    truth.iter().chain(pred.iter()).flat_map(|i| i.components.iter().cloned()).collect()
                };
                Ok(evaluate_netlist(id, &pred, &truth, &present, &universe))
            })
            .collect()
    });
    let mut scores = Vec::new();
    let mut matrices = Vec::new();
    for r in rows {
        let (s, m) = r?;
        scores.extend(s);
        matrices.extend(m);
    }
    let mut report = aggregate(scores).map_err(|e| CliError::Mismatch(format!("{}: {e}", a.truth_dir.display())))?;
    for m in &matrices {
        let level = levels
            .iter()
            .copied()
            .find(|l| m.labels.first().map(String::as_str) == l.labels().first().map(|x| x.as_str()))
            .expect("matrix of a requested level");
        report.add_confusion(m, level);
    }
    let text = if a.json {
        serde_json::to_string_pretty(&report).context("report serialization")? + "\n"
    } else {
        report.to_string()
    };
    match &a.out {
        Some(p) => corpus::write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct PreparedEntry<'a> {
    id: &'a str,
    transistors: usize,
    size_bucket: &'static str,
}

fn prepare_corpus(a: PrepareArgs) -> Result<(), CliError> {
    let taxonomy = TaxonomyMap::default();
    let reserved = match a.reserved_nets {
        Some(nets) => nets.into_iter().collect(),
        None => default_reserved(),
    };
    let entries = corpus::read_corpus(&a.input, &taxonomy)?;
    let mut manifest = Vec::new();
    let mut prepared = Vec::new();
    for e in &entries {
        let (entry, map) = prepare(&e.id, &e.netlist, &e.truth, &reserved, &taxonomy)
            .map_err(|err| CliError::Parse(format!("{}: {err}", e.id)))?;
        corpus::write_atomic(&a.out.join(format!("{}.{}", entry.id, corpus::NETLIST_EXT)), &entry.netlist.serialize())?;
        let levels: Vec<Level> = entry.truth.levels().collect();
        corpus::write_levels(&a.out, &entry.id, &entry.truth, &levels)?;
        let map_json = serde_json::to_string_pretty(&map).context("rename map")?;
        corpus::write_atomic(&a.out.join(format!("{}.map.json", entry.id)), &(map_json + "\n"))?;
        prepared.push(entry);
    }
    for entry in &prepared {
        manifest.push(PreparedEntry {
            id: &entry.id,
            transistors: entry.transistor_count,
            size_bucket: entry.size_bucket.as_str(),
        });
    }
    let json = serde_json::to_string_pretty(&manifest).context("manifest")?;
    corpus::write_atomic(&a.out.join("manifest.json"), &(json + "\n"))?;
    println!("prepared {} netlists into {}", prepared.len(), a.out.display());
    Ok(())
}

fn stats(a: StatsArgs) -> Result<(), CliError> {
    let entries = match &a.dir {
        Some(dir) => corpus::read_corpus(dir, &TaxonomyMap::default())?,
        None => bundled_corpus(),
    };
    let stats = corpus_stats(&entries).map_err(|e| CliError::Mismatch(e.to_string()))?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&stats).context("stats serialization")?);
    } else {
        print!("{stats}");
    }
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<(), CliError> {
    let config_err = |e: &dyn std::fmt::Display| CliError::Provider(e.to_string());
    let file = PipelineFile::load(&a.config).map_err(|e| config_err(&e))?;
    let targets: Vec<Target> = match &a.targets {
        Some(names) => names
            .iter()
            .map(|n| Target::builtin(n).ok_or_else(|| CliError::Provider(format!("unknown target '{n}'"))))
            .collect::<Result<_, _>>()?,
        None => Target::builtins(),
    };
    let demos = match &file.demos {
        Some(dir) => corpus::read_demos(dir, &TaxonomyMap::default())?,
        None => bundled_demos(),
    };
    let mut config = PipelineConfig::new(demos);
    config.retry_limit = a.retry_limit.unwrap_or(file.retry_limit);
    config.seed = a.seed.unwrap_or(file.seed);
    for t in &targets {
        if config.demos_for(t).is_empty() {
            return Err(CliError::Provider(format!("no demonstration covers target {}", t.name)));
        }
    }
    let timeout = a.timeout.map(Duration::from_secs).unwrap_or(file.timeout());
    let mut runner = SubprocessRunner::new(&file.interpreter, timeout).map_err(|e| config_err(&e))?;
    let mut provider = file.provider.build().map_err(|e| config_err(&e))?;

    let (codebase, log) = run_pipeline(&config, &targets, provider.as_mut(), &mut runner);
    store::save_codebase(&a.out.join("codebase"), &codebase)?;
    store::save_run_log(&a.out.join(store::RUN_LOG), &log)?;

    println!("retries");
    for line in log.retry_summary() {
        println!("  {line}");
    }
    println!("execution status");
    print!("{}", log.status_histogram());

    let provider_errors: Vec<String> = log
        .records
        .iter()
        .filter_map(|r| match r {
            LogRecord::Call { target, error: Some(e), .. } => Some(format!("{target}: {e}")),
            _ => None,
        })
        .collect();
    if !provider_errors.is_empty() {
        return Err(CliError::Provider(format!("provider failed: {}", provider_errors.join("; "))));
    }
    for (target, error) in log.errors() {
        log::warn!("{target}: {error}");
    }
    Ok(())
}

fn infer(a: InferArgs) -> Result<(), CliError> {
    let codebase = store::load_codebase(&a.codebase)?;
    let runner = SubprocessRunner::new(&a.interpreter, Duration::from_secs(a.timeout))
        .map_err(|e| CliError::Provider(e.to_string()))?;
    let paths = corpus::netlist_paths(&a.input)?;
    let levels = a.levels.levels;
    let results: Vec<Result<(String, AnnotationSet), CliError>> = pool(a.workers)?.install(|| {
        paths
            .par_iter()
            .map(|p| {
                let netlist = corpus::read_netlist(p)?;
                let mut runner = runner.clone();
                let (set, failures) = identify_with_codebase(&codebase, &netlist, &mut runner);
                for f in failures {
                    log::warn!("{}: {} failed: {}", p.display(), f.target, f.message);
                }
                Ok((corpus::stem(p), set.restrict(&levels)))
            })
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    emit(a.out.as_deref(), &results, &levels)
}

