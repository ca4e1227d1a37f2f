//! Argument definitions and dispatch for the `toxiscope` binary.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use toxiscope::corpus::{dedup_for_network, write_jsonl};
use toxiscope::graph::{build_graph, read_edges_csv, GeodesicMode, RelationKind};
use toxiscope::report::ReportHeader;
use toxiscope::topics::{read_record_topics_csv, Category, TopicConfig};
use toxiscope::toxicity::{filter_toxic, ScoreCache, ToxicityConfig, DEFAULT_THRESHOLD};
use tracing::info;

use crate::config::{hash_value, ProviderChoice, RunConfig};
use crate::error::CliError;
use crate::pipeline::{self, OutputDir, TrendsParams};

#[derive(Debug, Parser)]
#[command(
    name = "toxiscope",
    version,
    about = "Toxicity, topic and interaction-network reports for short posts"
)]
pub struct Cli {
    /// Cap on worker threads for every parallel stage.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log verbosity when RUST_LOG is unset.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and normalize a JSON Lines corpus.
    Ingest(IngestArgs),
    /// Score every record for toxicity.
    Score(ScoreArgs),
    /// Keep records scoring at or above a threshold.
    Filter(FilterArgs),
    /// Fit topics and assign categories.
    Topics(TopicsArgs),
    /// Statistics, centrality and communities of one interaction graph.
    Network(NetworkArgs),
    /// Daily volume, weekly composition, hashtags and per-user category tallies.
    Trends(TrendsArgs),
    /// Run every stage from a config file.
    RunAll(RunAllArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
    /// Also write the summary as JSON.
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
    #[arg(long, value_parser = parse_provider, default_value = "stub")]
    pub provider: ProviderChoice,
    /// Existing scores to reuse; only missing records are scored.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub requests_per_second: Option<f64>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct FilterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TopicsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub category_map: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub reduce_dim: usize,
    #[arg(long, default_value_t = 10)]
    pub keywords: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct NetworkArgs {
    /// Corpus to build the graph from.
    #[arg(long, required_unless_present = "edges", conflicts_with = "edges")]
    pub input: Option<PathBuf>,
    /// Edge list to read instead of a corpus.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub relation: RelationKind,
    #[arg(long)]
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub top: usize,
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long, value_parser = parse_geodesics, default_value = "undirected")]
    pub geodesics: GeodesicMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrendsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output of the topics command.
    #[arg(long)]
    pub record_topics: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub output_dir: PathBuf,
    /// Graph whose targets get per-category tallies.
    #[arg(long, default_value = "mention")]
    pub relation: RelationKind,
    #[arg(long, default_value_t = 20)]
    pub hashtags: usize,
    #[arg(long, default_value_t = 10)]
    pub peaks: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunAllArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_provider)]
    pub provider: Option<ProviderChoice>,
}

fn parse_provider(s: &str) -> Result<ProviderChoice, String> {
    match s {
        "stub" => Ok(ProviderChoice::Stub),
        "remote" => Ok(ProviderChoice::Remote),
        other => Err(format!(
            "unknown provider `{other}` (expected stub or remote)"
        )),
    }
}

fn parse_geodesics(s: &str) -> Result<GeodesicMode, String> {
    match s {
        "undirected" => Ok(GeodesicMode::Undirected),
        "directed" => Ok(GeodesicMode::Directed),
        other => Err(format!(
            "unknown geodesic mode `{other}` (expected undirected or directed)"
        )),
    }
}

/// Header for a standalone command: its seed plus a digest of its non-output arguments.
fn header_for(args: &impl Serialize, seed: u64) -> ReportHeader {
    let value = serde_json::to_value(args).expect("arguments serialize");
    ReportHeader::new(seed, hash_value(&value))
}

fn create_file(path: &Path) -> Result<std::io::BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))
}

/// Runs one command. Returns the line to print on success.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Score(a) => score(a, cli.threads),
        Command::Filter(a) => filter(a),
        Command::Topics(a) => topics(a),
        Command::Network(a) => network(a),
        Command::Trends(a) => trends(a),
        Command::RunAll(a) => run_all(a, cli.threads),
    }
}

fn ingest(a: IngestArgs) -> Result<String, CliError> {
    let header = header_for(&a, a.seed);
    let corpus = pipeline::ingest(&a.input)?;
    let head = header.to_string();
    write_jsonl(create_file(&a.output)?, &corpus, Some(&head))
        .map_err(CliError::stage("ingest"))?;
    if let Some(report) = &a.report {
        serde_json::to_writer_pretty(
            create_file(report)?,
            &pipeline::ingest_report(&corpus, &header),
        )
        .map_err(|e| CliError::stage("ingest")(e.into()))?;
    }
    Ok(pipeline::ingest_summary(&corpus))
}

fn score(a: ScoreArgs, threads: Option<usize>) -> Result<String, CliError> {
    let header = header_for(&a, a.seed);
    let corpus = pipeline::ingest(&a.input)?;
    let mut client = ToxicityConfig::default();
    if let Some(e) = &a.endpoint {
        client.endpoint = e.clone();
    }
    if let Some(r) = a.requests_per_second {
        client.requests_per_second = r;
    }
    if let Some(m) = a.max_retries {
        client.max_retries = m;
    }
    if let Some(t) = threads {
        client.concurrency = client.concurrency.min(t.max(1));
    }
    client.validate().map_err(CliError::from_core)?;
    let mut cache = match &a.cache {
        Some(p) if p.exists() => pipeline::read_cache(p)?,
        _ => ScoreCache::new(),
    };
    let before = cache.len();
    let scorer = pipeline::scorer(a.provider, &client)?;
    pipeline::score(&corpus, scorer.as_ref(), &mut cache)?;
    cache
        .write(create_file(&a.output)?, Some(&header.to_string()))
        .map_err(CliError::stage("score"))?;
    Ok(format!(
        "{} scored, {} reused",
        cache.len() - before.min(cache.len()),
        before
    ))
}

fn filter(a: FilterArgs) -> Result<String, CliError> {
    toxiscope::toxicity::validate_threshold(a.threshold).map_err(CliError::from_core)?;
    let header = header_for(&a, a.seed);
    let corpus = pipeline::ingest(&a.input)?;
    let scores = pipeline::read_cache(&a.scores)?.into_map();
    let toxic = filter_toxic(&corpus, &scores, a.threshold).map_err(CliError::from_core)?;
    write_jsonl(create_file(&a.output)?, &toxic, Some(&header.to_string()))
        .map_err(CliError::stage("filter"))?;
    Ok(format!(
        "{} of {} records at or above {}",
        toxic.len(),
        corpus.len(),
        a.threshold
    ))
}

fn topics(a: TopicsArgs) -> Result<String, CliError> {
    let header = header_for(&a, a.seed);
    let config = TopicConfig {
        k: a.k,
        reduce_dim: a.reduce_dim,
        keywords_per_topic: a.keywords,
        max_iterations: a.max_iterations,
        seed: a.seed,
        ..Default::default()
    };
    config.validate().map_err(CliError::from_core)?;
    let map = pipeline::read_category_map(&a.category_map)?;
    let corpus = pipeline::ingest(&a.input)?;
    let run = pipeline::topics(&corpus, &config, &map)?;
    let mut out = OutputDir::create(&a.output_dir)?;
    pipeline::write_topic_outputs(&mut out, &run, &map, &header)?;
    Ok(format!(
        "{} topics over {} records",
        run.model.k(),
        run.model.clustered_rows.len()
    ))
}

fn network(a: NetworkArgs) -> Result<String, CliError> {
    let header = header_for(&a, a.seed);
    let (graph, corpus) = match (&a.input, &a.edges) {
        (Some(input), _) => {
            let corpus = pipeline::ingest(input)?;
            let (deduped, removed) = dedup_for_network(&corpus);
            info!(removed, "duplicate (author, text) pairs removed");
            (build_graph(&deduped, a.relation), Some(corpus))
        }
        (None, Some(edges)) => {
            let file = File::open(edges)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", edges.display())))?;
            let graph = read_edges_csv(BufReader::new(file), Some(a.relation))
                .map_err(CliError::from_core)?;
            (graph, None)
        }
        (None, None) => return Err(CliError::input("either --input or --edges is required")),
    };
    let profiles = match &corpus {
        Some(c) => pipeline::load_profiles(c, a.profiles.as_deref())?,
        None => pipeline::load_profiles(&Default::default(), a.profiles.as_deref())?,
    };
    let run = pipeline::network(graph, a.relation, a.geodesics, a.top, &profiles);
    let mut out = OutputDir::create(&a.output_dir)?;
    pipeline::write_network_outputs(&mut out, &run, &profiles, &header)?;
    Ok(format!(
        "{}: {} vertices, {} edges, {} communities",
        a.relation,
        run.stats.vertices,
        run.stats.total_edges,
        run.partition.community_count()
    ))
}

fn trends(a: TrendsArgs) -> Result<String, CliError> {
    let header = header_for(&a, a.seed);
    let corpus = pipeline::ingest(&a.input)?;
    let file = File::open(&a.record_topics)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", a.record_topics.display())))?;
    let assigned = read_record_topics_csv(file).map_err(CliError::from_core)?;
    let categories: HashMap<String, Category> = assigned
        .into_iter()
        .filter_map(|(id, t)| t.category.map(|c| (id, c)))
        .collect();
    let (deduped, _) = dedup_for_network(&corpus);
    let graph = build_graph(&deduped, a.relation);
    let mut out = OutputDir::create(&a.output_dir)?;
    pipeline::write_trend_outputs(
        &mut out,
        &corpus,
        &categories,
        &graph,
        &TrendsParams {
            hashtags: a.hashtags,
            peaks: a.peaks,
        },
        &header,
    )?;
    Ok(format!(
        "{} files written to {}",
        out.written().len(),
        a.output_dir.display()
    ))
}

fn run_all(a: RunAllArgs, threads: Option<usize>) -> Result<String, CliError> {
    let mut config = RunConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(d) = a.output_dir {
        // flags are relative to the working directory, not the config file
        config.output_dir = std::path::absolute(&d)
            .map_err(|e| CliError::input(format!("bad output directory: {e}")))?;
    }
    if let Some(t) = a.threshold {
        config.toxicity.client.threshold = t;
    }
    if let Some(k) = a.k {
        config.topics.k = k;
    }
    if let Some(p) = a.provider {
        config.toxicity.provider = p;
    }
    let files = pipeline::run_all(&config, threads)?;
    Ok(format!(
        "{} files written to {}",
        files.len(),
        config.output_path().display()
    ))
}
