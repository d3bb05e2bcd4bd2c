//! Subcommand front end over the `lingtree` library.
//!
//! Every command works file-to-file: inputs arrive through flags and config
//! files, artifacts land under `--output`, and each run drops a
//! `run_manifest.json` there recording inputs, outputs, versions, seed, and
//! timings. Timings live only in that manifest, never in artifacts, so
//! artifact bytes depend on nothing but the config and the seed.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 data validation, 5 internal.

use std::collections::BTreeMap;
use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lingtree::analysis::{count_phenomenon_windowed, Phenomenon, DEFAULT_WINDOW};
use lingtree::corpus::{chunk, load_manifest, read_corpus, TranslationStatus};
use lingtree::experiments::{
    build_trees, generate_synthetic, run_ot_classification, run_source_id, run_tree_experiment,
    ExperimentConfig, ExperimentReport, FeatureSet,
};
use lingtree::features::{extract, minmax_scale, FeatureVector, Lexicon, DEFAULT_TRIGRAM_K};
use lingtree::phylo::to_newick;
use lingtree::render::{render_ascii, render_svg};
use lingtree::treedist::{estimate_norm_constant, score, Mode, DEFAULT_NORM_SAMPLES};
use lingtree::Error;

#[derive(Parser)]
#[command(name = "lingtree", version, about = "Corpus-to-phylogeny toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct Common {
    /// Master seed; every random choice in the run derives from it.
    /// Defaults to the config's master_seed, or 0 without a config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,

    /// Directory for artifacts and the run manifest.
    #[arg(long, default_value = "out")]
    output: PathBuf,

    /// Artifact format; repeat the flag to select several. Each
    /// subcommand supports a subset and has its own default.
    #[arg(long = "format", value_enum)]
    formats: Vec<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the corpora a manifest lists and summarize them.
    Ingest {
        /// Corpus manifest (TOML, repeated [[corpus]] records).
        #[arg(long)]
        manifest: PathBuf,
        /// Token target for the chunk-count column.
        #[arg(long, default_value_t = 2000)]
        chunk_tokens: usize,
        #[command(flatten)]
        common: Common,
    },

    /// Chunk corpora and write one feature vector per chunk.
    Features {
        #[arg(long)]
        manifest: PathBuf,
        /// One of: pos-trigrams, function-words, cohesive-markers,
        /// pos-trigrams-fw.
        #[arg(long, default_value = "pos-trigrams")]
        feature_set: FeatureSet,
        /// Function-word lexicon, one entry per line.
        #[arg(long)]
        function_words: Option<PathBuf>,
        /// Cohesive-marker lexicon, one entry per line.
        #[arg(long)]
        cohesive_markers: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        chunk_tokens: usize,
        /// Trigram vocabulary size.
        #[arg(long, default_value_t = DEFAULT_TRIGRAM_K)]
        trigram_k: usize,
        /// Min-max scale each dimension over the emitted chunks.
        #[arg(long)]
        scale: bool,
        #[command(flatten)]
        common: Common,
    },

    /// Cross-validated classification from an experiment config.
    Classify {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// ot: originals vs. translations; source-id: which source
        /// language a translation came from.
        #[arg(long)]
        task: Task,
        #[command(flatten)]
        common: Common,
    },

    /// Cluster languages into a tree, one tree per feature set.
    ///
    /// Uses the same seed path as repetition 0 of the tree experiment,
    /// so these trees match the ones an `experiment` run records.
    Cluster {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },

    /// Score a reconstructed tree against a gold tree.
    ///
    /// Prints the normalized distance (0 identical, 1 at or beyond the
    /// random ceiling) on stdout.
    Evaluate {
        /// Reconstructed tree (Newick).
        #[arg(long)]
        tree: PathBuf,
        /// Gold tree (Newick).
        #[arg(long)]
        gold: PathBuf,
        /// weighted: path lengths; unweighted: edge counts.
        #[arg(long, default_value = "unweighted")]
        mode: Mode,
        /// Random trees drawn to estimate the normalization constant.
        #[arg(long, default_value_t = DEFAULT_NORM_SAMPLES)]
        norm_samples: usize,
        #[command(flatten)]
        common: Common,
    },

    /// Count interference phenomena per corpus.
    Analyze {
        #[arg(long)]
        manifest: PathBuf,
        /// Auxiliary window for the verb-pattern phenomena.
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[command(flatten)]
        common: Common,
    },

    /// Run the configured experiments end to end.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "all")]
        task: ExperimentTask,
        #[command(flatten)]
        common: Common,
    },

    /// Generate a synthetic corpus world with a planted gold tree.
    ///
    /// Writes tagged corpora, manifest.toml, gold.nwk, the generator's
    /// lexicons, and a ready-to-run experiment.toml into --output.
    Synth {
        /// Optional experiment config; its [synth] table sizes the
        /// world and the rest is echoed into experiment.toml.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Ingest { common, .. }
            | Command::Features { common, .. }
            | Command::Classify { common, .. }
            | Command::Cluster { common, .. }
            | Command::Evaluate { common, .. }
            | Command::Analyze { common, .. }
            | Command::Experiment { common, .. }
            | Command::Synth { common, .. } => common,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Task {
    Ot,
    SourceId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExperimentTask {
    All,
    Ot,
    SourceId,
    Trees,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Newick,
    Ascii,
    Svg,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Newick => "newick",
            Format::Ascii => "ascii",
            Format::Svg => "svg",
        })
    }
}

/// CLI-side error wrapper deciding the exit code. Library errors split
/// into I/O (3), data validation (4), and internal invariants (5);
/// flag-level problems are usage errors (2), matching what clap itself
/// exits with on unknown flags.
enum CliError {
    Usage(String),
    App(Error),
}

type CliResult<T> = Result<T, CliError>;

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::App(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::App(e) => match e {
                Error::Io(_) => "io",
                Error::Csv(c) if c.is_io_error() => "io",
                Error::Json(j) if j.is_io() => "io",
                Error::NoConvergence { .. }
                | Error::NoMergeHeights
                | Error::SpecMismatch(_)
                | Error::DimensionMismatch { .. } => "internal",
                _ => "data",
            },
        }
    }

    fn code(&self) -> i32 {
        match self.kind() {
            "usage" => 2,
            "io" => 3,
            "data" => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::App(e) => write!(f, "{e}"),
        }
    }
}

fn io_at(path: &Path, e: std::io::Error) -> CliError {
    CliError::App(Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    )))
}

/// Attaches the file path to I/O errors bubbling out of library loaders.
fn with_path<T>(path: &Path, r: lingtree::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        Error::Io(io) => io_at(path, io),
        other => CliError::App(other),
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| io_at(path, e))
}

#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    inputs: Vec<String>,
    outputs: Vec<String>,
    formats: Vec<Format>,
    seed: u64,
    jobs: Option<usize>,
    versions: BTreeMap<&'static str, &'static str>,
    timings_ms: BTreeMap<&'static str, u128>,
}

/// One run's output directory plus its manifest under construction.
struct Run {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

impl Run {
    fn new(
        command: &'static str,
        common: &Common,
        seed: u64,
        defaults: &[Format],
        allowed: &[Format],
    ) -> CliResult<Run> {
        let formats = if common.formats.is_empty() {
            defaults.to_vec()
        } else {
            common.formats.clone()
        };
        if let Some(bad) = formats.iter().find(|f| !allowed.contains(f)) {
            let options: Vec<String> = allowed.iter().map(ToString::to_string).collect();
            return Err(CliError::Usage(format!(
                "{command} does not support --format {bad}; supported: {}",
                options.join(", ")
            )));
        }
        std::fs::create_dir_all(&common.output).map_err(|e| io_at(&common.output, e))?;
        Ok(Run {
            dir: common.output.clone(),
            manifest: RunManifest {
                command,
                inputs: Vec::new(),
                outputs: Vec::new(),
                formats,
                seed,
                jobs: common.jobs,
                versions: BTreeMap::from([
                    ("lingtree", lingtree::VERSION),
                    ("lingtree-cli", env!("CARGO_PKG_VERSION")),
                ]),
                timings_ms: BTreeMap::new(),
            },
            started: Instant::now(),
        })
    }

    fn wants(&self, format: Format) -> bool {
        self.manifest.formats.contains(&format)
    }

    fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(path.display().to_string());
    }

    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| io_at(&path, e))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// Records a file some library routine already wrote into the
    /// output directory.
    fn note_output(&mut self, name: &str) {
        self.manifest.outputs.push(name.to_string());
    }

    fn time<T>(&mut self, label: &'static str, body: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let value = body();
        self.manifest.timings_ms.insert(label, start.elapsed().as_millis());
        value
    }

    fn finish(mut self) -> CliResult<()> {
        self.manifest
            .timings_ms
            .insert("total", self.started.elapsed().as_millis());
        let text = serde_json::to_string_pretty(&self.manifest).map_err(Error::from)? + "\n";
        let path = self.dir.join("run_manifest.json");
        std::fs::write(&path, text).map_err(|e| io_at(&path, e))
    }
}

fn main() {
    let cli = Cli::parse();
    // Internal failures surface as one structured stderr line; the
    // default panic banner would duplicate it.
    panic::set_hook(Box::new(|_| {}));
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| dispatch(cli)));
    let code = match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(err)) => {
            eprintln!("error[{}]: {err}", err.kind());
            err.code()
        }
        Err(cause) => {
            eprintln!("error[internal]: {}", panic_text(cause.as_ref()));
            5
        }
    };
    std::process::exit(code);
}

fn panic_text(cause: &(dyn std::any::Any + Send)) -> &str {
    if let Some(s) = cause.downcast_ref::<&str>() {
        s
    } else if let Some(s) = cause.downcast_ref::<String>() {
        s
    } else {
        "unexpected panic"
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if let Some(jobs) = cli.command.common().jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::App(Error::InvalidInput(format!("worker pool: {e}"))))?;
    }
    match cli.command {
        Command::Ingest { manifest, chunk_tokens, common } => cmd_ingest(manifest, chunk_tokens, common),
        Command::Features {
            manifest,
            feature_set,
            function_words,
            cohesive_markers,
            chunk_tokens,
            trigram_k,
            scale,
            common,
        } => cmd_features(
            manifest,
            feature_set,
            function_words,
            cohesive_markers,
            chunk_tokens,
            trigram_k,
            scale,
            common,
        ),
        Command::Classify { config, task, common } => cmd_classify(config, task, common),
        Command::Cluster { config, common } => cmd_cluster(config, common),
        Command::Evaluate { tree, gold, mode, norm_samples, common } => {
            cmd_evaluate(tree, gold, mode, norm_samples, common)
        }
        Command::Analyze { manifest, window, common } => cmd_analyze(manifest, window, common),
        Command::Experiment { config, task, common } => cmd_experiment(config, task, common),
        Command::Synth { config, common } => cmd_synth(config, common),
    }
}

fn status_str(status: TranslationStatus) -> &'static str {
    match status {
        TranslationStatus::Original => "original",
        TranslationStatus::TranslatedDirect => "translated-direct",
        TranslationStatus::TranslatedViaPivot => "translated-via-pivot",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Loads an experiment config and applies the --seed override, so the
/// echoed config inside every report carries the effective seed.
fn load_config(path: &Path, common: &Common) -> CliResult<ExperimentConfig> {
    let mut config = with_path(path, ExperimentConfig::load(path))?;
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    Ok(config)
}

fn cmd_ingest(manifest: PathBuf, chunk_tokens: usize, common: Common) -> CliResult<()> {
    if chunk_tokens == 0 {
        return Err(CliError::Usage("--chunk-tokens must be at least 1".into()));
    }
    let seed = common.seed.unwrap_or(0);
    let mut run = Run::new("ingest", &common, seed, &[Format::Csv], &[Format::Csv, Format::Json])?;
    run.input(&manifest);

    #[derive(Serialize)]
    struct Row {
        path: String,
        source_language: String,
        target_language: String,
        status: &'static str,
        sentences: usize,
        tokens: usize,
        chunks: usize,
    }

    let records = with_path(&manifest, load_manifest(&manifest))?;
    let mut rows = Vec::new();
    for record in &records {
        let corpus = with_path(&record.path, read_corpus(record))?;
        rows.push(Row {
            path: record.path.display().to_string(),
            source_language: record.source_language.to_string(),
            target_language: record.target_language.to_string(),
            status: status_str(record.status),
            sentences: corpus.sentences.len(),
            tokens: corpus.token_count(),
            chunks: chunk(&corpus, chunk_tokens).len(),
        });
    }

    if run.wants(Format::Csv) {
        let mut text =
            String::from("path,source_language,target_language,status,sentences,tokens,chunks\n");
        for r in &rows {
            text.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_field(&r.path),
                r.source_language,
                r.target_language,
                r.status,
                r.sentences,
                r.tokens,
                r.chunks
            ));
        }
        run.write("ingest.csv", &text)?;
    }
    if run.wants(Format::Json) {
        run.write("ingest.json", &(serde_json::to_string_pretty(&rows).map_err(Error::from)? + "\n"))?;
    }
    for r in &rows {
        println!(
            "{} [{} -> {}, {}]: {} tokens, {} sentences, {} chunks of >= {}",
            r.path, r.source_language, r.target_language, r.status, r.tokens, r.sentences, r.chunks, chunk_tokens
        );
    }
    run.finish()
}

#[allow(clippy::too_many_arguments)]
fn cmd_features(
    manifest: PathBuf,
    feature_set: FeatureSet,
    function_words: Option<PathBuf>,
    cohesive_markers: Option<PathBuf>,
    chunk_tokens: usize,
    trigram_k: usize,
    scale: bool,
    common: Common,
) -> CliResult<()> {
    if chunk_tokens == 0 || trigram_k == 0 {
        return Err(CliError::Usage("--chunk-tokens and --trigram-k must be at least 1".into()));
    }
    match feature_set {
        FeatureSet::FunctionWords | FeatureSet::TrigramsFunctionWords if function_words.is_none() => {
            return Err(Error::InvalidConfig(format!(
                "feature set {feature_set} needs --function-words"
            ))
            .into());
        }
        FeatureSet::CohesiveMarkers if cohesive_markers.is_none() => {
            return Err(Error::InvalidConfig(format!(
                "feature set {feature_set} needs --cohesive-markers"
            ))
            .into());
        }
        _ => {}
    }
    let seed = common.seed.unwrap_or(0);
    let mut run = Run::new("features", &common, seed, &[Format::Csv], &[Format::Csv, Format::Json])?;
    run.input(&manifest);
    let records = with_path(&manifest, load_manifest(&manifest))?;
    let fw = load_lexicon(&function_words, &mut run)?;
    let mk = load_lexicon(&cohesive_markers, &mut run)?;

    let mut ids: Vec<(String, String, &'static str)> = Vec::new();
    let mut chunks = Vec::new();
    for record in &records {
        let corpus = with_path(&record.path, read_corpus(record))?;
        for (i, c) in chunk(&corpus, chunk_tokens).into_iter().enumerate() {
            ids.push((
                format!("{}:{}:{}", record.source_language, status_str(record.status), i),
                record.source_language.to_string(),
                status_str(record.status),
            ));
            chunks.push(c);
        }
    }
    if chunks.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no chunk reached {chunk_tokens} tokens; corpora are too small"
        ))
        .into());
    }

    let spec = Arc::new(feature_set.build_spec(&chunks, trigram_k, &fw, &mk)?);
    let vectors: Vec<FeatureVector> = run.time("extract", || chunks.iter().map(|c| extract(c, &spec)).collect());
    let vectors = if scale {
        if vectors.len() < 2 {
            return Err(Error::InvalidInput("min-max scaling needs at least 2 chunks".into()).into());
        }
        minmax_scale(&vectors)?
    } else {
        vectors
    };

    if run.wants(Format::Csv) {
        let mut text = String::from("chunk,label,status");
        for dim in spec.dimensions() {
            text.push(',');
            text.push_str(&csv_field(dim));
        }
        text.push('\n');
        for ((id, label, status), v) in ids.iter().zip(&vectors) {
            text.push_str(&csv_field(id));
            text.push(',');
            text.push_str(label);
            text.push(',');
            text.push_str(status);
            for x in &v.values {
                text.push(',');
                text.push_str(&x.to_string());
            }
            text.push('\n');
        }
        run.write("features.csv", &text)?;
    }
    if run.wants(Format::Json) {
        #[derive(Serialize)]
        struct RowDoc<'a> {
            chunk: &'a str,
            label: &'a str,
            status: &'a str,
            values: &'a [f64],
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            feature_set: String,
            scaled: bool,
            dimensions: Vec<&'a str>,
            rows: Vec<RowDoc<'a>>,
        }
        let doc = Doc {
            feature_set: spec.name(),
            scaled: scale,
            dimensions: spec.dimensions().collect(),
            rows: ids
                .iter()
                .zip(&vectors)
                .map(|((id, label, status), v)| RowDoc {
                    chunk: id,
                    label,
                    status,
                    values: &v.values,
                })
                .collect(),
        };
        run.write("features.json", &(serde_json::to_string_pretty(&doc).map_err(Error::from)? + "\n"))?;
    }
    println!(
        "extracted {} vectors x {} dimensions ({})",
        vectors.len(),
        spec.dim_count(),
        spec.name()
    );
    run.finish()
}

fn load_lexicon(path: &Option<PathBuf>, run: &mut Run) -> CliResult<Lexicon> {
    match path {
        Some(p) => {
            run.input(p);
            with_path(p, Lexicon::load(p))
        }
        None => Ok(Lexicon { entries: Vec::new() }),
    }
}

fn cmd_classify(config: PathBuf, task: Task, common: Common) -> CliResult<()> {
    let cfg = load_config(&config, &common)?;
    let mut run = Run::new(
        "classify",
        &common,
        cfg.master_seed,
        &[Format::Json, Format::Csv],
        &[Format::Json, Format::Csv],
    )?;
    run.input(&config);
    let (prefix, report) = match task {
        Task::Ot => ("ot", run.time("classify", || run_ot_classification(&cfg))?),
        Task::SourceId => ("source_id", run.time("classify", || run_source_id(&cfg))?),
    };
    write_classification(&mut run, prefix, &report)?;
    run.finish()
}

/// Writes the report artifacts a classification experiment produces and
/// echoes the accuracy table on stdout.
fn write_classification(run: &mut Run, prefix: &str, report: &ExperimentReport) -> CliResult<()> {
    if run.wants(Format::Json) {
        run.write(&format!("{prefix}_report.json"), &report.to_json()?)?;
    }
    if run.wants(Format::Csv) {
        run.write(&format!("{prefix}_accuracy.csv"), &report.accuracy_csv())?;
    }
    for (set, acc) in &report.accuracies {
        match report.family_accuracies.get(set) {
            Some(fam) => println!("{prefix} {set}: accuracy {acc:.4}, family accuracy {fam:.4}"),
            None => println!("{prefix} {set}: accuracy {acc:.4}"),
        }
    }
    Ok(())
}

fn cmd_cluster(config: PathBuf, common: Common) -> CliResult<()> {
    let cfg = load_config(&config, &common)?;
    let mut run = Run::new(
        "cluster",
        &common,
        cfg.master_seed,
        &[Format::Newick],
        &[Format::Newick, Format::Ascii, Format::Svg],
    )?;
    run.input(&config);
    let trees = run.time("cluster", || build_trees(&cfg))?;
    for (set, tree) in &trees {
        if run.wants(Format::Newick) {
            run.write(&format!("tree_{set}.nwk"), &(to_newick(tree) + "\n"))?;
        }
        if run.wants(Format::Ascii) {
            run.write(&format!("tree_{set}.txt"), &render_ascii(tree))?;
        }
        if run.wants(Format::Svg) {
            run.write(&format!("tree_{set}.svg"), &render_svg(tree))?;
        }
        println!("{set}: {}", to_newick(tree));
    }
    run.finish()
}

fn cmd_evaluate(
    tree: PathBuf,
    gold: PathBuf,
    mode: Mode,
    norm_samples: usize,
    common: Common,
) -> CliResult<()> {
    if norm_samples == 0 {
        return Err(CliError::Usage("--norm-samples must be at least 1".into()));
    }
    let seed = common.seed.unwrap_or(0);
    let mut run = Run::new("evaluate", &common, seed, &[Format::Json], &[Format::Json, Format::Csv])?;
    run.input(&tree);
    run.input(&gold);
    let tau = lingtree::phylo::parse_newick(&read_text(&tree)?)?;
    let gold_tree = lingtree::phylo::parse_newick(&read_text(&gold)?)?;
    let norm = run.time("norm", || estimate_norm_constant(&gold_tree, mode, norm_samples, seed));
    if norm <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "normalization constant is zero: a gold tree with {} leaves admits no variation",
            gold_tree.leaf_count()
        ))
        .into());
    }
    let report = score(&tau, &gold_tree, mode, norm, seed)?;
    println!("{}", report.normalized);
    if run.wants(Format::Json) {
        run.write(
            "evaluation.json",
            &(serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n"),
        )?;
    }
    if run.wants(Format::Csv) {
        run.write(
            "evaluation.csv",
            &format!(
                "raw,normalized,mode,norm_constant,seed\n{},{},{},{},{}\n",
                report.raw, report.normalized, report.mode, report.norm_constant, report.seed
            ),
        )?;
    }
    run.finish()
}

fn cmd_analyze(manifest: PathBuf, window: usize, common: Common) -> CliResult<()> {
    if window == 0 {
        return Err(CliError::Usage("--window must be at least 1".into()));
    }
    let seed = common.seed.unwrap_or(0);
    let mut run = Run::new("analyze", &common, seed, &[Format::Csv], &[Format::Csv, Format::Json])?;
    run.input(&manifest);

    #[derive(Serialize)]
    struct Row {
        language: String,
        status: &'static str,
        phenomenon: &'static str,
        count: u64,
        tokens: usize,
        rate: f64,
        unit: f64,
    }

    let records = with_path(&manifest, load_manifest(&manifest))?;
    let mut rows = Vec::new();
    for record in &records {
        let corpus = with_path(&record.path, read_corpus(record))?;
        for &phenomenon in Phenomenon::ALL.iter() {
            let r = count_phenomenon_windowed(&corpus, phenomenon, window);
            rows.push(Row {
                language: record.source_language.to_string(),
                status: status_str(record.status),
                phenomenon: phenomenon.name(),
                count: r.count,
                tokens: r.tokens,
                rate: r.rate,
                unit: phenomenon.unit(),
            });
        }
    }

    if run.wants(Format::Csv) {
        let mut text = String::from("language,status,phenomenon,count,tokens,rate,unit\n");
        for r in &rows {
            text.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.language, r.status, r.phenomenon, r.count, r.tokens, r.rate, r.unit
            ));
        }
        run.write("analysis.csv", &text)?;
    }
    if run.wants(Format::Json) {
        run.write(
            "analysis.json",
            &(serde_json::to_string_pretty(&rows).map_err(Error::from)? + "\n"),
        )?;
    }
    println!("analyzed {} corpora x {} phenomena", records.len(), Phenomenon::ALL.len());
    run.finish()
}

fn cmd_experiment(config: PathBuf, task: ExperimentTask, common: Common) -> CliResult<()> {
    let cfg = load_config(&config, &common)?;
    let mut run = Run::new(
        "experiment",
        &common,
        cfg.master_seed,
        &[Format::Json, Format::Csv, Format::Newick],
        &[Format::Json, Format::Csv, Format::Newick],
    )?;
    run.input(&config);
    if matches!(task, ExperimentTask::All | ExperimentTask::Ot) {
        let report = run.time("ot", || run_ot_classification(&cfg))?;
        write_classification(&mut run, "ot", &report)?;
    }
    if matches!(task, ExperimentTask::All | ExperimentTask::SourceId) {
        let report = run.time("source_id", || run_source_id(&cfg))?;
        write_classification(&mut run, "source_id", &report)?;
    }
    if matches!(task, ExperimentTask::All | ExperimentTask::Trees) {
        let report = run.time("trees", || run_tree_experiment(&cfg))?;
        if run.wants(Format::Json) {
            run.write("tree_report.json", &report.to_json()?)?;
        }
        if run.wants(Format::Csv) {
            run.write("tree_distances.csv", &report.tree_csv())?;
        }
        if run.wants(Format::Newick) {
            for (set, newick) in &report.trees {
                run.write(&format!("tree_{set}.nwk"), &format!("{newick}\n"))?;
            }
        }
        for row in &report.tree_rows {
            println!(
                "trees {} {}: {:.4} +/- {:.4} (n={})",
                row.feature_set, row.mode, row.mean, row.std, row.n
            );
        }
    }
    run.finish()
}

fn cmd_synth(config: Option<PathBuf>, common: Common) -> CliResult<()> {
    if !common.formats.is_empty() {
        return Err(CliError::Usage(
            "synth writes a fixed corpus layout; --format does not apply".into(),
        ));
    }
    let base = match &config {
        Some(p) => Some(with_path(p, ExperimentConfig::load(p))?),
        None => None,
    };
    let seed = common
        .seed
        .or(base.as_ref().map(|c| c.master_seed))
        .unwrap_or(0);
    let mut run = Run::new("synth", &common, seed, &[], &[])?;
    if let Some(p) = &config {
        run.input(p);
    }
    let synth_cfg = base.as_ref().map(|c| c.synth.clone()).unwrap_or_default();
    let world = run.time("generate", || generate_synthetic(&synth_cfg, seed))?;
    let records = with_path(&common.output, world.save(&common.output))?;
    for record in &records {
        run.note_output(&record.path.display().to_string());
    }
    for name in ["manifest.toml", "gold.nwk", "function_words.txt", "cohesive_markers.txt"] {
        run.note_output(name);
    }

    // A ready-to-run config sits next to the data it references; paths
    // stay relative so the directory can move as a unit.
    let mut exp = base.unwrap_or_default();
    exp.master_seed = seed;
    exp.synth = synth_cfg.clone();
    exp.paths.manifest = Some("manifest.toml".into());
    exp.paths.function_words = Some("function_words.txt".into());
    exp.paths.cohesive_markers = Some("cohesive_markers.txt".into());
    exp.paths.gold_tree = Some("gold.nwk".into());
    exp.source_id.families = world.families.clone();
    let exp_path = common.output.join("experiment.toml");
    with_path(&exp_path, exp.save(&exp_path))?;
    run.note_output("experiment.toml");

    println!(
        "planted {} languages in {} families plus one original corpus (seed {seed})",
        world.corpora.len(),
        synth_cfg.families
    );
    println!(
        "wrote corpora, manifest.toml, gold.nwk, lexicons, and experiment.toml under {}",
        common.output.display()
    );
    run.finish()
}
