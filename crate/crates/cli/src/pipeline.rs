//! Pipeline stages shared by the subcommands and `run-all`.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use toxiscope::corpus::{dedup_for_network, parse_records, write_jsonl, Corpus};
use toxiscope::graph::{
    build_graph, cnm_communities, profiles_from_corpus, rank_users, read_profiles_csv,
    summarize_with, write_centrality_csv, write_partition_csv, write_ranked_csv, write_stats_csv,
    CentralityTable, CommunityPartition, GeodesicMode, InteractionGraph, NetworkStats, RankMetric,
    RankedUser, RelationKind, UserProfile,
};
use toxiscope::report::{ReportHeader, TOOL_NAME};
use toxiscope::seed::derive_seed;
use toxiscope::topics::{
    apply_categories, fit_topics, write_record_topics_csv, write_topic_map_csv, write_topics_csv,
    Category, CategoryMap, HashingEmbedder, Pca, TopicConfig, TopicModel, DEFAULT_DIM,
};
use toxiscope::toxicity::{
    filter_toxic, score_corpus, RemoteScorer, ScoreCache, StubScorer, ToxicityConfig,
    ToxicityScore, ToxicityScorer,
};
use toxiscope::trends::{
    composition, daily_volume, hashtag_counts, user_category_mentions, write_daily_csv,
    write_hashtags_csv, write_peaks_csv, write_user_categories_csv, write_weekly_csv,
};
use tracing::info;

use crate::config::{sha256_file, ProviderChoice, RunConfig};
use crate::error::CliError;

/// Topic sub-stages whose seeds derive from the run seed.
pub const SUB_SEEDS: [&str; 3] = ["reduce", "kmeans", "viz-reduce"];

pub fn ingest(path: &Path) -> Result<Corpus, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    parse_records(BufReader::new(file))
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// One-line ingest summary such as `3 kept, 0 dropped` or `2 kept, 1 invalid`.
pub fn ingest_summary(corpus: &Corpus) -> String {
    let mut s = format!("{} kept, ", corpus.len());
    if corpus.dropped_invalid == 0 {
        s.push_str(&format!("{} dropped", corpus.dropped_duplicates));
    } else {
        s.push_str(&format!("{} invalid", corpus.dropped_invalid));
        if corpus.dropped_duplicates > 0 {
            s.push_str(&format!(", {} duplicates", corpus.dropped_duplicates));
        }
    }
    s
}

pub fn ingest_report(corpus: &Corpus, header: &ReportHeader) -> serde_json::Value {
    json!({
        "tool": TOOL_NAME,
        "version": header.version,
        "seed": header.seed,
        "config_hash": header.config_hash,
        "kept": corpus.len(),
        "dropped_duplicates": corpus.dropped_duplicates,
        "dropped_invalid": corpus.dropped_invalid,
    })
}

pub fn scorer(
    provider: ProviderChoice,
    config: &ToxicityConfig,
) -> Result<Box<dyn ToxicityScorer>, CliError> {
    Ok(match provider {
        ProviderChoice::Stub => Box::new(StubScorer),
        ProviderChoice::Remote => {
            Box::new(RemoteScorer::from_env(config.clone()).map_err(CliError::from_core)?)
        }
    })
}

pub fn read_cache(path: &Path) -> Result<ScoreCache, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    ScoreCache::read(BufReader::new(file)).map_err(CliError::from_core)
}

pub fn score(
    corpus: &Corpus,
    scorer: &dyn ToxicityScorer,
    cache: &mut ScoreCache,
) -> Result<HashMap<String, ToxicityScore>, CliError> {
    score_corpus(corpus, scorer, cache).map_err(CliError::stage("score"))
}

pub fn read_category_map(path: &Path) -> Result<CategoryMap, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    CategoryMap::from_json(&text).map_err(CliError::from_core)
}

/// Profiles carried by the corpus, overridden by the profiles file when given.
pub fn load_profiles(
    corpus: &Corpus,
    path: Option<&Path>,
) -> Result<HashMap<String, UserProfile>, CliError> {
    let mut profiles = profiles_from_corpus(corpus);
    if let Some(p) = path {
        let file = File::open(p)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display())))?;
        profiles.extend(read_profiles_csv(file).map_err(CliError::from_core)?);
    }
    Ok(profiles)
}

pub struct TopicRun {
    pub model: TopicModel,
    pub categories: Vec<Option<Category>>,
    pub coords: Vec<(usize, Vec<f64>)>,
}

pub fn topics(
    corpus: &Corpus,
    config: &TopicConfig,
    map: &CategoryMap,
) -> Result<TopicRun, CliError> {
    map.ensure_covers(config.k).map_err(CliError::from_core)?;
    let reducer = Pca::default();
    let model = fit_topics(corpus, &HashingEmbedder::new(DEFAULT_DIM), &reducer, config)
        .map_err(CliError::stage("topics"))?;
    let categories =
        apply_categories(&model.assignments, map).map_err(CliError::stage("categorize"))?;
    let coords = model
        .visualization(&reducer)
        .map_err(CliError::stage("topics"))?;
    Ok(TopicRun {
        model,
        categories,
        coords,
    })
}

pub struct NetworkRun {
    pub relation: RelationKind,
    pub graph: InteractionGraph,
    pub stats: NetworkStats,
    pub table: CentralityTable,
    pub partition: CommunityPartition,
    pub top_in_degree: Vec<RankedUser>,
    pub top_betweenness: Vec<RankedUser>,
}

pub fn network(
    graph: InteractionGraph,
    relation: RelationKind,
    geodesics: GeodesicMode,
    top: usize,
    profiles: &HashMap<String, UserProfile>,
) -> NetworkRun {
    let stats = summarize_with(&graph, geodesics);
    let table = CentralityTable::compute(&graph);
    let partition = match cnm_communities(&graph) {
        Ok(p) => p,
        Err(_) => CommunityPartition::singletons(&graph),
    };
    let top_in_degree = rank_users(
        &table,
        RankMetric::InDegree,
        top,
        Some(&partition),
        profiles,
    );
    let top_betweenness = rank_users(
        &table,
        RankMetric::Betweenness,
        top,
        Some(&partition),
        profiles,
    );
    info!(
        %relation,
        vertices = stats.vertices,
        edges = stats.total_edges,
        communities = partition.community_count(),
        "network summarized"
    );
    NetworkRun {
        relation,
        graph,
        stats,
        table,
        partition,
        top_in_degree,
        top_betweenness,
    }
}

/// Creates files under one directory and remembers their names in creation order.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Runs `write` against a buffered file; failures are attributed to `stage`.
    pub fn write(
        &mut self,
        stage: &'static str,
        name: &str,
        write: impl FnOnce(&mut BufWriter<File>) -> toxiscope::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::Stage {
            stage,
            source: e.into(),
        })?;
        let mut out = BufWriter::new(file);
        write(&mut out).map_err(CliError::stage(stage))?;
        out.flush().map_err(|e| CliError::Stage {
            stage,
            source: e.into(),
        })?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json(
        &mut self,
        stage: &'static str,
        name: &str,
        value: &impl Serialize,
    ) -> Result<(), CliError> {
        self.write(stage, name, |out| {
            serde_json::to_writer_pretty(&mut *out, value)?;
            out.write_all(b"\n")?;
            Ok(())
        })
    }
}

pub fn write_topic_outputs(
    out: &mut OutputDir,
    run: &TopicRun,
    map: &CategoryMap,
    header: &ReportHeader,
) -> Result<(), CliError> {
    out.write("topics", "topics.csv", |w| {
        write_topics_csv(w, &run.model, map, header)
    })?;
    out.write("topics", "topic_map.csv", |w| {
        write_topic_map_csv(w, &run.model, &run.coords, &run.categories, header)
    })?;
    out.write("topics", "record_topics.csv", |w| {
        write_record_topics_csv(w, &run.model, &run.categories, header)
    })
}

pub fn write_network_outputs(
    out: &mut OutputDir,
    run: &NetworkRun,
    profiles: &HashMap<String, UserProfile>,
    header: &ReportHeader,
) -> Result<(), CliError> {
    let r = run.relation.as_str();
    out.write("network", &format!("network_stats_{r}.csv"), |w| {
        write_stats_csv(w, &run.stats, header)
    })?;
    out.write("network", &format!("centrality_{r}.csv"), |w| {
        write_centrality_csv(w, &run.table, &run.partition, profiles, header)
    })?;
    out.write("network", &format!("partition_{r}.csv"), |w| {
        write_partition_csv(w, &run.partition, header)
    })?;
    out.write("network", &format!("top_in_degree_{r}.csv"), |w| {
        write_ranked_csv(w, &run.top_in_degree, RankMetric::InDegree, header)
    })?;
    out.write("network", &format!("top_betweenness_{r}.csv"), |w| {
        write_ranked_csv(w, &run.top_betweenness, RankMetric::Betweenness, header)
    })
}

pub struct TrendsParams {
    pub hashtags: usize,
    pub peaks: usize,
}

/// Trend tables over the categorized records of `corpus`. `categories` maps record ids to
/// categories; records missing from it are left out. `graph` supplies the per-user tallies.
pub fn write_trend_outputs(
    out: &mut OutputDir,
    corpus: &Corpus,
    categories: &HashMap<String, Category>,
    graph: &InteractionGraph,
    params: &TrendsParams,
    header: &ReportHeader,
) -> Result<(), CliError> {
    let stage = "trends";
    let categorized = corpus.retain(|r| categories.contains_key(&r.id));
    let labels: Vec<Option<Category>> = categorized
        .iter()
        .map(|r| categories.get(&r.id).copied())
        .collect();
    let series = daily_volume(&categorized, &labels).map_err(CliError::stage(stage))?;
    out.write(stage, "daily_volume.csv", |w| {
        write_daily_csv(w, &series, header)
    })?;
    let table = if series.is_empty() {
        Default::default()
    } else {
        composition(&series).map_err(CliError::stage(stage))?
    };
    out.write(stage, "weekly_shares.csv", |w| {
        write_weekly_csv(w, &table, header)
    })?;
    let tags = hashtag_counts(corpus, params.hashtags);
    out.write(stage, "hashtags.csv", |w| {
        write_hashtags_csv(w, &tags, header)
    })?;
    let tallies = user_category_mentions(graph, categories);
    out.write(stage, "user_categories.csv", |w| {
        write_user_categories_csv(w, &tallies, header)
    })?;
    let peaks = series.top_days(params.peaks);
    out.write(stage, "peaks.csv", |w| write_peaks_csv(w, &peaks, header))
}

#[derive(Debug, Serialize)]
pub struct NetworkSummary {
    pub vertices: usize,
    pub edges: usize,
    pub communities: usize,
    /// `null` when undefined.
    pub modularity: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub sub_seeds: BTreeMap<&'static str, u64>,
    pub records: BTreeMap<&'static str, usize>,
    pub networks: BTreeMap<String, NetworkSummary>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub const MANIFEST_NAME: &str = "run_manifest.json";

/// Executes every stage in order and writes the report bundle. Returns the names of the
/// files written, manifest last. `threads` caps in-flight scoring requests; it does not
/// enter the config hash.
pub fn run_all(config: &RunConfig, threads: Option<usize>) -> Result<Vec<String>, CliError> {
    config.validate()?;
    let hash = config.hash();
    let header = ReportHeader::new(config.seed, hash.clone());
    let mut out = OutputDir::create(&config.output_path())?;

    info!(stage = "ingest", "starting");
    let corpus = ingest(&config.input_path())?;
    info!("{}", ingest_summary(&corpus));
    let head = header.to_string();
    out.write("ingest", "corpus.jsonl", |w| {
        write_jsonl(w, &corpus, Some(&head))
    })?;
    out.write_json("ingest", "ingest.json", &ingest_report(&corpus, &header))?;

    info!(stage = "score", "starting");
    let tox = &config.toxicity;
    let mut client = tox.client.clone();
    if let Some(t) = threads {
        client.concurrency = client.concurrency.min(t.max(1));
    }
    let scorer = scorer(tox.provider, &client)?;
    let mut cache = ScoreCache::new();
    let scores = score(&corpus, scorer.as_ref(), &mut cache)?;
    out.write("score", "scores.jsonl", |w| cache.write(w, Some(&head)))?;

    info!(stage = "filter", "starting");
    let toxic =
        filter_toxic(&corpus, &scores, tox.client.threshold).map_err(CliError::stage("filter"))?;
    info!(kept = toxic.len(), "toxic records");
    out.write("filter", "toxic.jsonl", |w| {
        write_jsonl(w, &toxic, Some(&head))
    })?;

    info!(stage = "topics", "starting");
    let map = read_category_map(&config.category_map_path())?;
    let topic_config = TopicConfig {
        seed: config.seed,
        ..config.topics.clone()
    };
    let topic_run = topics(&toxic, &topic_config, &map)?;
    write_topic_outputs(&mut out, &topic_run, &map, &header)?;

    info!(stage = "network", "starting");
    let profiles = load_profiles(&corpus, config.profiles_path().as_deref())?;
    let (network_corpus, removed) = dedup_for_network(&toxic);
    info!(removed, "duplicate (author, text) pairs removed");
    let mut networks = BTreeMap::new();
    let mut graphs = Vec::new();
    for &relation in &config.network.relations {
        let graph = build_graph(&network_corpus, relation);
        let run = network(
            graph,
            relation,
            config.network.geodesics,
            config.network.top,
            &profiles,
        );
        write_network_outputs(&mut out, &run, &profiles, &header)?;
        networks.insert(
            relation.to_string(),
            NetworkSummary {
                vertices: run.stats.vertices,
                edges: run.stats.total_edges,
                communities: run.partition.community_count(),
                modularity: Some(run.partition.modularity).filter(|q| q.is_finite()),
            },
        );
        graphs.push(run.graph);
    }
    out.write("network", "edges.csv", |w| {
        toxiscope::graph::write_edges_csv(w, &graphs, &header)
    })?;

    info!(stage = "trends", "starting");
    let categories: HashMap<String, Category> = topic_run
        .model
        .record_ids
        .iter()
        .zip(&topic_run.categories)
        .filter_map(|(id, c)| c.map(|c| (id.clone(), c)))
        .collect();
    let trend_graph = &graphs[0];
    write_trend_outputs(
        &mut out,
        &toxic,
        &categories,
        trend_graph,
        &TrendsParams {
            hashtags: config.trends.hashtags,
            peaks: config.trends.peaks,
        },
        &header,
    )?;

    let mut inputs = BTreeMap::new();
    let mut files = vec![
        ("input", config.input_path()),
        ("category_map", config.category_map_path()),
    ];
    files.extend(config.profiles_path().map(|p| ("profiles", p)));
    for (what, path) in files {
        let digest = sha256_file(&path).map_err(|e| CliError::Stage {
            stage: "manifest",
            source: e.into(),
        })?;
        inputs.insert(what.to_string(), digest);
    }
    let mut outputs = BTreeMap::new();
    for name in out.written() {
        let digest = sha256_file(&out.path(name)).map_err(|e| CliError::Stage {
            stage: "manifest",
            source: e.into(),
        })?;
        outputs.insert(name.clone(), digest);
    }
    let manifest = Manifest {
        tool: TOOL_NAME,
        version: header.version.clone(),
        seed: config.seed,
        config_hash: hash,
        sub_seeds: SUB_SEEDS
            .iter()
            .map(|&s| (s, derive_seed(config.seed, s)))
            .collect(),
        records: BTreeMap::from([
            ("ingested", corpus.len()),
            ("dropped_duplicates", corpus.dropped_duplicates),
            ("dropped_invalid", corpus.dropped_invalid),
            ("toxic", toxic.len()),
            ("categorized", categories.len()),
            ("network_duplicates_removed", removed),
        ]),
        networks,
        inputs,
        outputs,
    };
    out.write_json("manifest", MANIFEST_NAME, &manifest)?;
    Ok(out.written().to_vec())
}
