//! The `vlink` command line.
//!
//! Each subcommand reads its inputs from the configuration, writes its artifacts into the
//! output directory together with a `<subcommand>.summary.json`, and logs to stderr.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration, 4 missing input, 5 I/O, 6 invalid or
//! misaligned data (including a dirty `validate`), 7 computation error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use vlink_core::linkgraph::{build_graph, rank_linked_artists};
use vlink_core::{corpus, evalkit, pca, Corpus, Index};

use crate::config::{ConfigFile, PipelineConfig};
use crate::export::{self, GraphFormat};
use crate::{embeddings, evalio, index_file, manifest, model_file, results, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_MISSING_INPUT: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_INVALID_DATA: i32 = 6;
pub const EXIT_COMPUTE: i32 = 7;

#[derive(Debug, Parser)]
#[command(name = "vlink", version, about = "Visual-link retrieval and artist influence graphs for painting collections")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Painting manifest (JSON lines)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Raw embedding file.
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    /// Reduced embedding file [default: <output-dir>/reduced.vlnk].
    #[arg(long, global = true)]
    reduced_embeddings: Option<PathBuf>,
    /// PCA model file [default: <output-dir>/pca.vpca].
    #[arg(long, global = true)]
    pca_model: Option<PathBuf>,
    /// Index file [default: <output-dir>/index.vidx].
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    /// Number of principal components [default: 50].
    #[arg(long, global = true)]
    pca_k: Option<usize>,
    /// Neighbors per query and evaluation pool size [default: 3].
    #[arg(long, global = true)]
    nn_k: Option<usize>,
    /// Index strategy: brute or tree [default: brute].
    #[arg(long, global = true)]
    strategy: Option<String>,
    /// Maximum points per k-d tree leaf [default: 32]
    #[arg(long, global = true)]
    leaf_size: Option<usize>,
    /// Seed for evaluation sampling [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact directory [default: out].
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
}

impl GlobalArgs {
    fn overrides(&self) -> ConfigFile {
        ConfigFile {
            manifest: self.manifest.clone(),
            embeddings: self.embeddings.clone(),
            reduced_embeddings: self.reduced_embeddings.clone(),
            pca_model: self.pca_model.clone(),
            index: self.index.clone(),
            pca_k: self.pca_k,
            nn_k: self.nn_k,
            strategy: self.strategy.clone(),
            leaf_size: self.leaf_size,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that the manifest and the raw embeddings are aligned and finite.
    Validate,
    /// Fit the PCA model on the raw embeddings.
    FitPca,
    /// Project the raw embeddings with the fitted model.
    Transform,
    /// Build the nearest-neighbor index over the reduced embeddings.
    BuildIndex,
    /// Retrieve the nearest paintings by other artists for one painting.
    Query {
        #[arg(long)]
        painting: String,
        /// Number of hits [default: nn_k].
        #[arg(long)]
        k: Option<usize>,
        /// Keep paintings by the query's own artist.
        #[arg(long)]
        include_same_artist: bool,
    },
    /// Top-1 cross-artist link for every painting, plus the per-artist ranked lists.
    Links,
    /// Build the influence graph, compute centralities and export it.
    Graph {
        /// Export formats; repeatable [default: all of graphml, edge-csv, dot].
        #[arg(long = "format")]
        formats: Vec<String>,
    },
    /// Sample query/hit pairs for expert evaluation.
    EvalSample {
        #[arg(long, default_value_t = evalkit::DEFAULT_PAIRS)]
        pairs: usize,
    },
    /// Aggregate expert judgments by majority and print the precision.
    EvalScore {
        /// One `pair_index,verdict` file per expert.
        #[arg(long, required = true, num_args = 1..)]
        judgments: Vec<PathBuf>,
        /// Sample file fixing the expected pair count.
        #[arg(long)]
        sample: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::FitPca => "fit-pca",
            Command::Transform => "transform",
            Command::BuildIndex => "build-index",
            Command::Query { .. } => "query",
            Command::Links => "links",
            Command::Graph { .. } => "graph",
            Command::EvalSample { .. } => "eval-sample",
            Command::EvalScore { .. } => "eval-score",
        }
    }
}

/// Outcome of a subcommand that ran to completion.
struct Outcome {
    summary: Value,
    clean: bool,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Self { summary, clean: true }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::MissingInput(_) => EXIT_MISSING_INPUT,
        Error::Io { .. } => EXIT_IO,
        Error::Manifest { .. } | Error::Format { .. } | Error::Csv { .. } | Error::Corpus(_) => EXIT_INVALID_DATA,
        Error::Nn(vlink_core::NnError::Validation(_)) => EXIT_INVALID_DATA,
        Error::Pca(_) | Error::Nn(_) | Error::Graph(_) | Error::Eval(_) => EXIT_COMPUTE,
    }
}

fn init_logging() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parses `args` (program name first) and runs the subcommand. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_INVALID_DATA,
        Err(e) => {
            log::error!("{}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let file = match &cli.global.config {
        Some(path) if !path.exists() => return Err(Error::MissingInput(path.clone())),
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let config = PipelineConfig::resolve(file.merge(cli.global.overrides()))?;
    fs::create_dir_all(&config.output_dir).map_err(Error::io(&config.output_dir))?;

    let outcome = match &cli.command {
        Command::Validate => validate(&config)?,
        Command::FitPca => fit_pca(&config)?,
        Command::Transform => transform(&config)?,
        Command::BuildIndex => build_index(&config)?,
        Command::Query { painting, k, include_same_artist } => query(&config, painting, *k, !include_same_artist)?,
        Command::Links => links(&config)?,
        Command::Graph { formats } => graph(&config, formats)?,
        Command::EvalSample { pairs } => eval_sample(&config, *pairs)?,
        Command::EvalScore { judgments, sample } => eval_score(judgments, sample.as_deref())?,
    };
    let mut summary = outcome.summary;
    summary["subcommand"] = json!(cli.command.name());
    summary["clean"] = json!(outcome.clean);
    let path = config.artifact(&format!("{}.summary.json", cli.command.name().replace('-', "_")));
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::io(&path)(e.into()))?;
    text.push('\n');
    fs::write(&path, text).map_err(Error::io(&path))?;
    Ok(outcome.clean)
}

fn input(path: &Path) -> Result<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::MissingInput(path.to_path_buf()))
    }
}

fn load_corpus(config: &PipelineConfig) -> Result<Corpus> {
    let corpus = manifest::load_manifest(input(config.manifest()?)?)?;
    log::info!("loaded {} paintings by {} artists", corpus.len(), corpus.artists().len());
    Ok(corpus)
}

fn load_index(config: &PipelineConfig, corpus: &Corpus) -> Result<Index> {
    index_file::load_index(input(&config.index)?, corpus)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn validate(config: &PipelineConfig) -> Result<Outcome> {
    let corpus = load_corpus(config)?;
    let matrix = embeddings::read_embeddings_unchecked(input(config.embeddings()?)?)?;
    let report = corpus::validate(&corpus, &matrix);
    for issue in &report.issues {
        log::warn!("{issue}");
    }
    Ok(Outcome {
        summary: json!({
            "paintings": corpus.len(),
            "artists": corpus.artists().len(),
            "rows": matrix.n(),
            "columns": matrix.d(),
            "issues": report.issues.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
        clean: report.is_clean(),
    })
}

fn fit_pca(config: &PipelineConfig) -> Result<Outcome> {
    let matrix = embeddings::read_embeddings(input(config.embeddings()?)?, None, None)?;
    if config.manifest.is_some() {
        let corpus = load_corpus(config)?;
        if let Some(issue) = corpus::validate(&corpus, &matrix).issues.into_iter().next() {
            return Err(Error::format(config.embeddings()?, issue.to_string()));
        }
    }
    log::info!("fitting PCA with k = {} on {}x{}", config.pca_k, matrix.n(), matrix.d());
    let model = pca::fit(&matrix, config.pca_k)?;
    model_file::save_model(&model, &config.pca_model)?;
    let ratio: f64 = model.explained_variance_ratio().iter().sum();
    Ok(Outcome::ok(json!({
        "model": path_str(&config.pca_model),
        "input_dim": model.input_dim(),
        "components": model.n_components(),
        "explained_variance_ratio_total": ratio,
        "explained_variance_ratio": model.explained_variance_ratio(),
    })))
}

fn transform(config: &PipelineConfig) -> Result<Outcome> {
    let model = model_file::load_model(input(&config.pca_model)?)?;
    let matrix = embeddings::read_embeddings(input(config.embeddings()?)?, None, Some(model.input_dim()))?;
    let reduced = model.transform(&matrix)?;
    embeddings::write_embeddings(&reduced, &config.reduced_embeddings)?;
    Ok(Outcome::ok(json!({
        "reduced_embeddings": path_str(&config.reduced_embeddings),
        "rows": reduced.n(),
        "columns": reduced.d(),
    })))
}

fn strategy_name(index: &Index) -> Value {
    match index.strategy() {
        vlink_core::Strategy::Brute => json!({"kind": "brute"}),
        vlink_core::Strategy::Tree { leaf_size } => json!({"kind": "tree", "leaf_size": leaf_size}),
    }
}

fn build_index(config: &PipelineConfig) -> Result<Outcome> {
    let corpus = load_corpus(config)?;
    let points = embeddings::read_embeddings(input(&config.reduced_embeddings)?, Some(corpus.len()), None)?;
    let index = Index::build(&points, &corpus, config.strategy)?;
    index_file::save_index(&index, &config.index)?;
    Ok(Outcome::ok(json!({
        "index": path_str(&config.index),
        "points": index.len(),
        "dim": index.dim(),
        "strategy": strategy_name(&index),
    })))
}

fn query(config: &PipelineConfig, painting: &str, k: Option<usize>, exclude: bool) -> Result<Outcome> {
    let corpus = load_corpus(config)?;
    let index = load_index(config, &corpus)?;
    let k = k.unwrap_or(config.nn_k);
    let list = index.query(painting, k, exclude)?;
    let line = results::neighbor_list_line(&list);
    println!("{line}");
    let path = config.artifact("query.jsonl");
    results::write_lines(&[line], &path)?;
    Ok(Outcome::ok(json!({
        "query": painting,
        "k": k,
        "exclude_same_artist": exclude,
        "hits": list.hits.len(),
        "results": path_str(&path),
    })))
}

fn links(config: &PipelineConfig) -> Result<Outcome> {
    let corpus = load_corpus(config)?;
    let index = load_index(config, &corpus)?;
    let top1 = index.batch_top1_cross_artist();
    let lines: Vec<String> = top1.iter().map(|l| results::top1_line(&index, l)).collect();
    let links_path = config.artifact("links.jsonl");
    results::write_lines(&lines, &links_path)?;
    let ranked = rank_linked_artists(&top1, &corpus);
    let ranked_path = config.artifact("ranked_links.csv");
    fs::write(&ranked_path, export::ranked_links_csv(&ranked)).map_err(Error::io(&ranked_path))?;
    Ok(Outcome::ok(json!({
        "links": top1.len(),
        "links_file": path_str(&links_path),
        "ranked_links_file": path_str(&ranked_path),
    })))
}

fn graph(config: &PipelineConfig, formats: &[String]) -> Result<Outcome> {
    let formats: Vec<GraphFormat> = if formats.is_empty() {
        GraphFormat::ALL.to_vec()
    } else {
        formats.iter().map(|f| f.parse()).collect::<Result<_>>()?
    };
    let corpus = load_corpus(config)?;
    let index = load_index(config, &corpus)?;
    let top1 = index.batch_top1_cross_artist();
    let ranked = rank_linked_artists(&top1, &corpus);
    let graph = build_graph(&ranked);
    let report = graph.centrality_report();

    let mut files = Vec::new();
    for format in formats {
        let path = config.artifact(format.file_name());
        export::export_graph(&graph, &report, format, &path)?;
        files.push(path_str(&path));
    }
    let csv_path = config.artifact("centrality.csv");
    fs::write(&csv_path, export::centrality_csv(&report)).map_err(Error::io(&csv_path))?;
    files.push(path_str(&csv_path));

    let components: Vec<Vec<&str>> = graph
        .connected_components()
        .iter()
        .map(|c| c.iter().map(|&v| graph.nodes()[v].id.as_str()).collect())
        .collect();
    let top_by_degree: Vec<Value> = report
        .ranked_by_degree()
        .into_iter()
        .take(10)
        .map(|r| json!({"artist": r.artist_name, "degree": r.degree, "closeness": r.closeness, "betweenness": r.betweenness}))
        .collect();
    log::info!("influence graph: {} nodes, {} edges, {} components", graph.node_count(), graph.edges().len(), components.len());
    Ok(Outcome::ok(json!({
        "nodes": graph.node_count(),
        "edges": graph.edges().len(),
        "components": components,
        "unlinked": graph.unlinked().iter().map(|&v| graph.nodes()[v].id.as_str()).collect::<Vec<_>>(),
        "top_by_degree": top_by_degree,
        "files": files,
    })))
}

fn eval_sample(config: &PipelineConfig, pairs: usize) -> Result<Outcome> {
    let corpus = load_corpus(config)?;
    let index = load_index(config, &corpus)?;
    let sample = evalkit::sample_pairs(&index, pairs, config.nn_k, config.seed)?;
    let path = config.artifact("eval_sample.csv");
    evalio::write_sample(&sample, &corpus, &path)?;
    Ok(Outcome::ok(json!({
        "pairs": sample.pairs.len(),
        "k_pool": sample.k_pool,
        "seed": sample.seed,
        "sample": path_str(&path),
    })))
}

fn eval_score(judgments: &[PathBuf], sample: Option<&Path>) -> Result<Outcome> {
    let pair_count = match sample {
        Some(path) => Some(evalio::read_sample(input(path)?)?.len()),
        None => None,
    };
    let mut sets = Vec::with_capacity(judgments.len());
    for path in judgments {
        let count = pair_count.or_else(|| sets.first().map(|s: &vlink_core::JudgmentSet| s.verdicts().len()));
        sets.push(evalio::read_judgments(input(path)?, count)?);
    }
    let verdicts = evalkit::aggregate(&sets)?;
    let precision = evalkit::precision(&verdicts)?;
    let meaningful = verdicts.iter().filter(|v| **v == vlink_core::Verdict::Meaningful).count();
    println!("{precision}");
    log::info!("{meaningful} of {} pairs judged meaningful by majority of {} experts", verdicts.len(), sets.len());
    Ok(Outcome::ok(json!({
        "experts": sets.iter().map(|s| s.expert_id.as_str()).collect::<Vec<_>>(),
        "pairs": verdicts.len(),
        "meaningful": meaningful,
        "precision": precision,
    })))
}
