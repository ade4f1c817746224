//! `eigenthemes` command-line driver.
//!
//! Exit codes: 0 success, 1 other failure, 2 I/O error, 3 malformed input,
//! 4 invalid configuration.

mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eigenthemes::baselines::NameIndex;
use eigenthemes::catalog::load_edge_degrees;
use eigenthemes::context::{load_descriptions, DescriptionStore};
use eigenthemes::eval::{
    evaluate, mutilation, read_predictions, score_gap, write_predictions, MetricsDocument, MetricsReport,
    MutilationPoint, PredictionsMeta, BOOTSTRAP_RESAMPLES, FORMAT_VERSION,
};
use eigenthemes::link::{link_corpus, LinkSettings, Method, Resources};
use eigenthemes::synth::generate;
use eigenthemes::weighting::{TextResources, WeightKind, WeightScheme, DEFAULT_DELTA};
use eigenthemes::{
    load_catalog, load_dataset, load_embeddings, resolve_all, DocumentTask, EmbeddingStore, EntityCatalog, Error,
    InvertedIndex, Result, Scaling, DEFAULT_COMPONENTS, DEFAULT_MAX_CANDIDATES,
};
use serde::Serialize;

use crate::config::{exit_code, parse_synth_config, Limit, RunFile};

const PREDICTIONS_FILE: &str = "predictions.csv";
const METRICS_FILE: &str = "metrics.json";
const MUTILATION_FILE: &str = "mutilation.json";
const DEFAULT_FRACTIONS: [f64; 11] = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0];
const DEFAULT_REPEATS: usize = 10;

#[derive(Parser)]
#[command(name = "eigenthemes", version, about = "Unsupervised entity linking with document subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the token inverted index of a catalog.
    BuildIndex(BuildIndexArgs),
    /// Link a dataset and write predictions and metrics.
    Link(LinkArgs),
    /// Recompute metrics from a predictions file.
    Eval(EvalArgs),
    /// P@1 as easy mentions are removed.
    Mutilate(MutilateArgs),
    /// Generate a synthetic corpus with planted gold subspaces.
    Synth(SynthArgs),
}

#[derive(Args)]
struct BuildIndexArgs {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Undirected edge list (TSV) supplying degrees missing from the catalog.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Prebuilt index; built from the catalog when absent.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Entity embeddings.
    #[arg(long)]
    entities: Option<PathBuf>,
    /// Word embeddings, for context baselines and weightings.
    #[arg(long)]
    words: Option<PathBuf>,
    #[arg(long)]
    descriptions: Option<PathBuf>,
    /// eigen, avg, degree, namematch, local or global [default: eigen]
    #[arg(long)]
    method: Option<String>,
    /// Number of subspace components [default: 10]
    #[arg(long)]
    k: Option<usize>,
    /// Candidate list size, or "inf" [default: 20]
    #[arg(long = "T")]
    t: Option<Limit>,
    /// Reciprocal-rank weight exponent [default: 1]
    #[arg(long)]
    delta: Option<f64>,
    /// none, degree_rr, local_ctxt_rr or global_ctxt_rr [default: degree_rr]
    #[arg(long)]
    weighting: Option<String>,
    /// Local context half-width in tokens [default: 5]
    #[arg(long)]
    window: Option<usize>,
    /// strength or unit [default: strength]
    #[arg(long)]
    scaling: Option<String>,
    /// Let namematch compare against aliases as well.
    #[arg(long)]
    aliases: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [default: available cores]
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct LinkArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also report the gold vs non-gold score gap with a bootstrap interval.
    #[arg(long)]
    score_gap: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    predictions: PathBuf,
    /// Metrics file to write; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MutilateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated methods [default: eigen,degree]
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Comma-separated fractions of easy mentions kept [default: 1.0,0.9,...,0.0]
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    /// [default: 10]
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML file, or a key=value list such as "seed=3,docs=20".
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

/// Resolved inputs and settings, echoed into every output.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    catalog: PathBuf,
    edges: Option<PathBuf>,
    index: Option<PathBuf>,
    dataset: PathBuf,
    entities: Option<PathBuf>,
    words: Option<PathBuf>,
    descriptions: Option<PathBuf>,
    #[serde(rename = "T")]
    t: Limit,
    seed: u64,
    settings: LinkSettings,
    #[serde(skip)]
    jobs: usize,
}

fn required(flag: Option<PathBuf>, file: Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or(file)
        .ok_or_else(|| Error::Config(format!("--{name} is required (flag or config file)")))
}

fn resolve_run(args: &RunArgs) -> Result<(RunConfig, RunFile)> {
    let file = match &args.config {
        Some(p) => RunFile::load(p)?,
        None => RunFile::default(),
    };
    let method: Method = args.method.clone().or(file.method.clone()).unwrap_or_else(|| "eigen".into()).parse()?;
    let kind: WeightKind = match args.weighting.clone().or(file.weighting.clone()) {
        Some(s) => s.parse()?,
        None => WeightKind::DegreeRr,
    };
    let delta = args.delta.or(file.delta).unwrap_or(DEFAULT_DELTA);
    let scaling = match args.scaling.clone().or(file.scaling.clone()).as_deref() {
        None | Some("strength") => Scaling::Strength,
        Some("unit") => Scaling::Unit,
        Some(other) => return Err(Error::Config(format!("unknown scaling {other:?}"))),
    };
    let settings = LinkSettings {
        method,
        k: args.k.or(file.k).unwrap_or(DEFAULT_COMPONENTS),
        weighting: WeightScheme::new(kind, delta)?,
        window: args.window.or(file.window).unwrap_or(eigenthemes::context::DEFAULT_WINDOW),
        scaling,
        name_match_aliases: args.aliases || file.aliases.unwrap_or(false),
    };
    settings.validate()?;
    let jobs = match args.jobs {
        Some(0) => return Err(Error::Config("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let run = RunConfig {
        catalog: required(args.catalog.clone(), file.catalog.clone(), "catalog")?,
        edges: args.edges.clone().or(file.edges.clone()),
        index: args.index.clone().or(file.index.clone()),
        dataset: required(args.dataset.clone(), file.dataset.clone(), "dataset")?,
        entities: args.entities.clone().or(file.entities.clone()),
        words: args.words.clone().or(file.words.clone()),
        descriptions: args.descriptions.clone().or(file.descriptions.clone()),
        t: args.t.or(file.t).unwrap_or(Limit(DEFAULT_MAX_CANDIDATES)),
        seed: args.seed.or(file.seed).unwrap_or(0),
        settings,
        jobs,
    };
    Ok((run, file))
}

/// Everything loaded from disk for one run.
struct Loaded {
    catalog: EntityCatalog,
    tasks: Vec<DocumentTask>,
    entities: Option<EmbeddingStore>,
    words: Option<EmbeddingStore>,
    descriptions: Option<DescriptionStore>,
    names: Option<NameIndex>,
}

impl Loaded {
    fn load(run: &RunConfig, methods: &[LinkSettings]) -> Result<Self> {
        let mut catalog = load_catalog(&run.catalog)?;
        if let Some(edges) = &run.edges {
            let n = catalog.apply_degrees(&load_edge_degrees(edges)?);
            log::info!("filled {n} degree(s) from {}", edges.display());
        }
        let index = match &run.index {
            Some(p) => InvertedIndex::read(&catalog, p)?,
            None => InvertedIndex::build(&catalog),
        };
        let docs = load_dataset(&run.dataset)?;
        let tasks = resolve_all(&docs, &index, &catalog, run.t.0);
        let entities = run.entities.as_ref().map(load_embeddings).transpose()?;
        let words = run.words.as_ref().map(load_embeddings).transpose()?;
        let descriptions = match (&words, &run.descriptions) {
            (Some(w), Some(p)) => Some(DescriptionStore::from_records(&load_descriptions(p)?, w)),
            (None, Some(_)) => return Err(Error::Config("--descriptions needs --words".into())),
            _ => None,
        };
        let names = methods
            .iter()
            .find(|s| s.method == Method::NameMatch)
            .map(|s| NameIndex::build(&catalog, s.name_match_aliases));
        log::info!(
            "{} entities, {} documents, {} mentions",
            catalog.len(),
            tasks.len(),
            tasks.iter().map(|t| t.mentions.len()).sum::<usize>()
        );
        Ok(Self {
            catalog,
            tasks,
            entities,
            words,
            descriptions,
            names,
        })
    }

    fn resources(&self) -> Resources<'_> {
        Resources {
            catalog: &self.catalog,
            entities: self.entities.as_ref(),
            text: match (&self.words, &self.descriptions) {
                (Some(words), Some(descriptions)) => Some(TextResources { words, descriptions }),
                _ => None,
            },
            names: self.names.as_ref(),
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_owned(),
        source: e,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

fn build_index(args: &BuildIndexArgs) -> Result<()> {
    let catalog = load_catalog(&args.catalog)?;
    let index = InvertedIndex::build(&catalog);
    index.write(&catalog, &args.out)?;
    log::info!("{} tokens over {} entities", index.vocabulary_size(), catalog.len());
    Ok(())
}

fn link(args: &LinkArgs) -> Result<()> {
    let (run, _) = resolve_run(&args.run)?;
    let data = Loaded::load(&run, &[run.settings])?;
    let res = data.resources();
    res.check(&run.settings)?;
    let results = link_corpus(&data.tasks, &res, &run.settings, run.jobs)?;
    let eval = evaluate(&data.tasks, &results)?;
    let config = serde_json::to_value(&run).expect("config serializes");

    create_dir(&args.out)?;
    write_predictions(
        &eval.outcomes,
        &PredictionsMeta::new(config.clone(), run.seed),
        args.out.join(PREDICTIONS_FILE),
    )?;
    let mut doc = MetricsDocument::from_evaluation(config, run.seed, &eval);
    if args.score_gap {
        doc.score_gap = Some(score_gap(&eval.outcomes, run.seed, BOOTSTRAP_RESAMPLES)?);
    }
    doc.write(args.out.join(METRICS_FILE))?;
    log::info!(
        "{}: overall P@1 {:?}, MRR {:?} over {} mentions",
        run.settings.method,
        doc.metrics.overall.precision_at_1,
        doc.metrics.overall.mrr,
        doc.metrics.overall.count
    );
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let (meta, outcomes) = read_predictions(&args.predictions)?;
    let (config, seed) = match meta {
        Some(m) => (m.config, m.seed),
        None => (serde_json::Value::Null, 0),
    };
    let doc = MetricsDocument::new(config, seed, MetricsReport::from_outcomes(&outcomes), 0);
    match &args.out {
        Some(p) => doc.write(p),
        None => {
            let text = serde_json::to_string_pretty(&doc).expect("metrics serialize");
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                // A closed pipe (e.g. `| head`) is not a failure.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

#[derive(Serialize)]
struct MutilationDocument {
    format: &'static str,
    format_version: u32,
    seed: u64,
    repeats: usize,
    config: RunConfig,
    methods: Vec<LinkSettings>,
    points: Vec<MutilationPoint>,
}

fn mutilate(args: &MutilateArgs) -> Result<()> {
    let (run, file) = resolve_run(&args.run)?;
    let names = args
        .methods
        .clone()
        .or(file.methods)
        .unwrap_or_else(|| vec!["eigen".into(), "degree".into()]);
    let methods = names
        .iter()
        .map(|m| Ok(LinkSettings { method: m.trim().parse()?, ..run.settings }))
        .collect::<Result<Vec<_>>>()?;
    let fractions = args.fractions.clone().or(file.fractions).unwrap_or_else(|| DEFAULT_FRACTIONS.to_vec());
    let repeats = args.repeats.or(file.repeats).unwrap_or(DEFAULT_REPEATS);
    let data = Loaded::load(&run, &methods)?;
    let points = mutilation(&data.tasks, &fractions, run.seed, repeats, &methods, &data.resources(), run.jobs)?;
    for p in &points {
        log::info!("f={:.2}: {:?}", p.fraction, p.precision_at_1);
    }
    create_dir(&args.out)?;
    write_json(
        &args.out.join(MUTILATION_FILE),
        &MutilationDocument {
            format: "eigenthemes-mutilation",
            format_version: FORMAT_VERSION,
            seed: run.seed,
            repeats,
            config: run,
            methods,
            points,
        },
    )
}

fn synth(args: &SynthArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(spec) => parse_synth_config(spec)?,
        None => Default::default(),
    };
    let corpus = generate(&cfg)?;
    corpus.write_to(&args.out)?;
    let m = &corpus.manifest;
    log::info!(
        "{} entities, {} documents: {} easy, {} hard, {} not found",
        corpus.entities.len(),
        corpus.documents.len(),
        m.easy,
        m.hard,
        m.not_found
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::BuildIndex(a) => build_index(a),
        Command::Link(a) => link(a),
        Command::Eval(a) => eval(a),
        Command::Mutilate(a) => mutilate(a),
        Command::Synth(a) => synth(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
