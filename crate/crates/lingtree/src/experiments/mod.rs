//! End-to-end experiment drivers: original-vs-translated classification,
//! source-language identification, and tree reconstruction, plus report
//! serialization. Every number in a report is reproducible from the
//! embedded config and master seed.

mod synth;

pub use synth::{generate_synthetic, SynthConfig, SyntheticWorld, TARGET_LANG};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{collapse_families, cross_validate_with, ConfusionMatrix, DEFAULT_C, DEFAULT_TOL};
use crate::corpus::{chunk, load_manifest, read_corpus, Chunk, Lang, SampleBudget, TaggedCorpus};
use crate::error::{Error, Result};
use crate::features::{
    build_trigram_spec, extract, minmax_scale, FeatureSpec, Lexicon, MinMaxScaler, DEFAULT_TRIGRAM_K,
};
use crate::phylo::{
    euclidean_distances, parse_newick, project_gold, to_newick, ward_cluster, PhyloTree,
};
use crate::seed;
use crate::treedist::{
    dist, estimate_norm_constant, mean_sample_std, random_baseline, Mode, DEFAULT_BASELINE_N,
    DEFAULT_NORM_SAMPLES,
};

/// The feature families compared throughout: each report carries one
/// row or table per selected set. The combined set pairs trigrams with
/// function words, the two interference-driven channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    PosTrigrams,
    FunctionWords,
    CohesiveMarkers,
    #[serde(rename = "pos-trigrams-fw")]
    TrigramsFunctionWords,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 4] = [
        FeatureSet::PosTrigrams,
        FeatureSet::FunctionWords,
        FeatureSet::CohesiveMarkers,
        FeatureSet::TrigramsFunctionWords,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::PosTrigrams => "pos-trigrams",
            FeatureSet::FunctionWords => "function-words",
            FeatureSet::CohesiveMarkers => "cohesive-markers",
            FeatureSet::TrigramsFunctionWords => "pos-trigrams-fw",
        }
    }

    fn needs_function_words(self) -> bool {
        matches!(self, FeatureSet::FunctionWords | FeatureSet::TrigramsFunctionWords)
    }

    fn needs_markers(self) -> bool {
        matches!(self, FeatureSet::CohesiveMarkers)
    }

    /// Builds the spec for this set, fitting the trigram vocabulary on
    /// `train` where one is needed.
    pub fn build_spec<'a, I>(self, train: I, k: usize, fw: &Lexicon, markers: &Lexicon) -> Result<FeatureSpec>
    where
        I: IntoIterator<Item = &'a Chunk>,
    {
        match self {
            FeatureSet::PosTrigrams => build_trigram_spec(train, k),
            FeatureSet::FunctionWords => Ok(FeatureSpec::function_words(fw.clone())),
            FeatureSet::CohesiveMarkers => Ok(FeatureSpec::cohesive_markers(markers.clone())),
            FeatureSet::TrigramsFunctionWords => Ok(FeatureSpec::combined(vec![
                build_trigram_spec(train, k)?,
                FeatureSpec::function_words(fw.clone()),
            ])),
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<FeatureSet> {
        FeatureSet::ALL
            .into_iter()
            .find(|set| set.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown feature set: {s}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub manifest: Option<PathBuf>,
    pub function_words: Option<PathBuf>,
    pub cohesive_markers: Option<PathBuf>,
    pub gold_tree: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OtConfig {
    pub chunk_tokens: usize,
    pub chunks_per_class: usize,
    pub folds: usize,
    pub c: f64,
    pub tol: f64,
}

impl Default for OtConfig {
    fn default() -> OtConfig {
        OtConfig { chunk_tokens: 2000, chunks_per_class: 200, folds: 10, c: DEFAULT_C, tol: DEFAULT_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceIdConfig {
    pub chunk_tokens: usize,
    pub chunks_per_language: usize,
    pub folds: usize,
    pub c: f64,
    pub tol: f64,
    /// Language code to family label; enables the collapsed table.
    pub families: BTreeMap<String, String>,
}

impl Default for SourceIdConfig {
    fn default() -> SourceIdConfig {
        SourceIdConfig {
            chunk_tokens: 1000,
            chunks_per_language: 100,
            folds: 10,
            c: DEFAULT_C,
            tol: DEFAULT_TOL,
            families: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    pub repetitions: usize,
    /// Fixed per-language sample budget; omitted means the largest
    /// budget every language can meet.
    pub tokens_per_language: Option<usize>,
    pub baseline_n: usize,
    pub norm_samples: usize,
}

impl Default for TreeConfig {
    fn default() -> TreeConfig {
        TreeConfig {
            repetitions: 50,
            tokens_per_language: None,
            baseline_n: DEFAULT_BASELINE_N,
            norm_samples: DEFAULT_NORM_SAMPLES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub feature_sets: Vec<FeatureSet>,
    pub trigram_k: usize,
    pub paths: PathsConfig,
    pub ot: OtConfig,
    pub source_id: SourceIdConfig,
    pub trees: TreeConfig,
    pub synth: SynthConfig,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            master_seed: 0,
            feature_sets: FeatureSet::ALL.to_vec(),
            trigram_k: DEFAULT_TRIGRAM_K,
            paths: PathsConfig::default(),
            ot: OtConfig::default(),
            source_id: SourceIdConfig::default(),
            trees: TreeConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Loads a TOML config; relative paths resolve against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        let mut config: ExperimentConfig = toml::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut config.paths.manifest,
            &mut config.paths.function_words,
            &mut config.paths.cohesive_markers,
            &mut config.paths.gold_tree,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&p);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("config serialization: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_sets.is_empty() {
            return Err(Error::InvalidConfig("feature_sets must not be empty".into()));
        }
        let positive: [(&str, usize); 7] = [
            ("trigram_k", self.trigram_k),
            ("ot.chunk_tokens", self.ot.chunk_tokens),
            ("ot.chunks_per_class", self.ot.chunks_per_class),
            ("source_id.chunk_tokens", self.source_id.chunk_tokens),
            ("source_id.chunks_per_language", self.source_id.chunks_per_language),
            ("trees.repetitions", self.trees.repetitions),
            ("trees.norm_samples", self.trees.norm_samples),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if let Some(0) = self.trees.tokens_per_language {
            return Err(Error::InvalidConfig("trees.tokens_per_language must be at least 1".into()));
        }
        if self.ot.folds < 2 || self.source_id.folds < 2 {
            return Err(Error::InvalidConfig("cross-validation needs at least 2 folds".into()));
        }
        if self.trees.baseline_n < 2 {
            return Err(Error::InvalidConfig("trees.baseline_n must be at least 2".into()));
        }
        for (name, value) in [("c", self.ot.c), ("tol", self.ot.tol), ("c", self.source_id.c), ("tol", self.source_id.tol)] {
            // value > 0.0 is false for NaN, which must fail validation too.
            let ok = value > 0.0;
            if !ok {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    fn require(&self, field: &str, value: &Option<PathBuf>) -> Result<PathBuf> {
        value
            .clone()
            .ok_or_else(|| Error::InvalidConfig(format!("paths.{field} is required for this experiment")))
    }
}

/// One mean/std row of a tree-reconstruction table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDistanceRow {
    pub feature_set: String,
    pub mode: Mode,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    pub norm_constant: f64,
}

/// Results of one experiment run. Collections are ordered maps and the
/// config is echoed, so serializing the report is deterministic and
/// re-running the config reproduces it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub master_seed: u64,
    pub accuracies: BTreeMap<String, f64>,
    pub family_accuracies: BTreeMap<String, f64>,
    pub chance_baseline: Option<f64>,
    pub confusions: BTreeMap<String, ConfusionMatrix>,
    pub family_confusions: BTreeMap<String, ConfusionMatrix>,
    pub tree_rows: Vec<TreeDistanceRow>,
    pub trees: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub config: ExperimentConfig,
}

impl ExperimentReport {
    fn new(experiment: &str, config: &ExperimentConfig) -> ExperimentReport {
        ExperimentReport {
            experiment: experiment.to_string(),
            master_seed: config.master_seed,
            accuracies: BTreeMap::new(),
            family_accuracies: BTreeMap::new(),
            chance_baseline: None,
            confusions: BTreeMap::new(),
            family_confusions: BTreeMap::new(),
            tree_rows: Vec::new(),
            trees: BTreeMap::new(),
            notes: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Accuracy table, one row per feature set; adds the collapsed
    /// column when family results exist.
    pub fn accuracy_csv(&self) -> String {
        let with_families = !self.family_accuracies.is_empty();
        let mut out = String::from(if with_families {
            "feature_set,accuracy,family_accuracy\n"
        } else {
            "feature_set,accuracy\n"
        });
        for (set, acc) in &self.accuracies {
            if with_families {
                out.push_str(&format!("{set},{acc:.6},{:.6}\n", self.family_accuracies[set]));
            } else {
                out.push_str(&format!("{set},{acc:.6}\n"));
            }
        }
        out
    }

    /// Distance table mirroring the tree experiment layout: one row per
    /// feature set and mode, plus the random-baseline rows.
    pub fn tree_csv(&self) -> String {
        let mut out = String::from("feature_set,mode,mean,std,n,norm_constant\n");
        for row in &self.tree_rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{},{:.6}\n",
                row.feature_set, row.mode, row.mean, row.std, row.n, row.norm_constant
            ));
        }
        out
    }
}

/// Keeps a seeded uniform subsample of `want` items, preserving input
/// order; returns everything when `want` is not reached.
fn subsample<T>(items: Vec<T>, want: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    if items.len() <= want {
        return items;
    }
    let mut indices: Vec<usize> = (0..items.len()).collect();
    indices.shuffle(rng);
    indices.truncate(want);
    let mut mask = vec![false; items.len()];
    for i in indices {
        mask[i] = true;
    }
    items
        .into_iter()
        .zip(mask)
        .filter_map(|(item, keep)| keep.then_some(item))
        .collect()
}

fn load_lexicons(config: &ExperimentConfig) -> Result<(Lexicon, Lexicon)> {
    let needs_fw = config.feature_sets.iter().any(|s| s.needs_function_words());
    let needs_mk = config.feature_sets.iter().any(|s| s.needs_markers());
    let fw = if needs_fw {
        Lexicon::load(&config.require("function_words", &config.paths.function_words)?)?
    } else {
        Lexicon { entries: Vec::new() }
    };
    let mk = if needs_mk {
        Lexicon::load(&config.require("cohesive_markers", &config.paths.cohesive_markers)?)?
    } else {
        Lexicon { entries: Vec::new() }
    };
    Ok((fw, mk))
}

fn manifest_corpora(config: &ExperimentConfig) -> Result<Vec<TaggedCorpus>> {
    let manifest = config.require("manifest", &config.paths.manifest)?;
    let records = load_manifest(&manifest)?;
    if records.is_empty() {
        return Err(Error::InvalidInput(format!(
            "manifest {} lists no corpora",
            manifest.display()
        )));
    }
    records.iter().map(read_corpus).collect()
}

/// Original-vs-translated classification: chunks both classes, keeps a
/// seeded subsample of `chunks_per_class` per class, and reports k-fold
/// cross-validated accuracy per feature set. Trigram vocabularies are
/// refit on the training folds of every split.
pub fn run_ot_classification(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let corpora = manifest_corpora(config)?;
    let (fw, mk) = load_lexicons(config)?;
    let mut original = Vec::new();
    let mut translated = Vec::new();
    for corpus in &corpora {
        let target = if corpus.meta.status.is_translated() { &mut translated } else { &mut original };
        target.extend(chunk(corpus, config.ot.chunk_tokens));
    }
    if original.is_empty() || translated.is_empty() {
        return Err(Error::InvalidInput(format!(
            "need chunks of both classes, got {} original and {} translated",
            original.len(),
            translated.len()
        )));
    }
    let want = config.ot.chunks_per_class;
    let original = subsample(original, want, &mut seed::stream(config.master_seed, "ot-sample:o", 0));
    let translated = subsample(translated, want, &mut seed::stream(config.master_seed, "ot-sample:t", 0));

    let mut report = ExperimentReport::new("ot-classification", config);
    report.chance_baseline = Some(0.5);
    report.notes.push(format!(
        "{} original and {} translated chunks of >= {} tokens, {}-fold cross-validation",
        original.len(),
        translated.len(),
        config.ot.chunk_tokens,
        config.ot.folds
    ));
    let mut y: Vec<String> = vec!["O".to_string(); original.len()];
    y.extend(vec!["T".to_string(); translated.len()]);
    let mut items = original;
    items.extend(translated);

    for &set in &config.feature_sets {
        let cv_seed = seed::mix(config.master_seed, &format!("ot:{set}"), 0);
        let k = config.trigram_k;
        let (accuracy, confusion) = cross_validate_with(
            &items,
            &y,
            config.ot.folds,
            config.ot.c,
            config.ot.tol,
            cv_seed,
            |train: &[usize]| {
                let spec = Arc::new(set.build_spec(train.iter().map(|&i| &items[i]), k, &fw, &mk)?);
                let fitted: Vec<_> = train.iter().map(|&i| extract(&items[i], &spec)).collect();
                let scaler = MinMaxScaler::fit(&fitted)?;
                Ok(move |chunk: &Chunk| scaler.apply(&extract(chunk, &spec)))
            },
        )?;
        report.accuracies.insert(set.name().to_string(), accuracy);
        report.confusions.insert(set.name().to_string(), confusion);
    }
    Ok(report)
}

/// Source-language identification over translated chunks, with the
/// family-collapsed view when a family map is configured. The chance
/// baseline 1/k is recorded alongside.
pub fn run_source_id(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let corpora = manifest_corpora(config)?;
    let (fw, mk) = load_lexicons(config)?;
    let mut by_lang: BTreeMap<Lang, Vec<Chunk>> = BTreeMap::new();
    for corpus in &corpora {
        if corpus.meta.status.is_translated() {
            by_lang
                .entry(corpus.meta.source_language)
                .or_default()
                .extend(chunk(corpus, config.source_id.chunk_tokens));
        }
    }
    let n_classes = by_lang.len();
    if n_classes < 2 {
        return Err(Error::InvalidInput(format!(
            "source identification needs translated corpora from >= 2 languages, got {n_classes}"
        )));
    }

    let mut items = Vec::new();
    let mut y = Vec::new();
    for (lang, chunks) in by_lang {
        let mut rng = seed::stream(config.master_seed, &format!("sid-sample:{lang}"), 0);
        for picked in subsample(chunks, config.source_id.chunks_per_language, &mut rng) {
            items.push(picked);
            y.push(lang.as_str().to_string());
        }
    }

    let mut report = ExperimentReport::new("source-id", config);
    report.chance_baseline = Some(1.0 / n_classes as f64);
    report.notes.push(format!(
        "{n_classes}-way identification, chance baseline {:.2}%",
        100.0 / n_classes as f64
    ));
    for &set in &config.feature_sets {
        let cv_seed = seed::mix(config.master_seed, &format!("source-id:{set}"), 0);
        let k = config.trigram_k;
        let (accuracy, confusion) = cross_validate_with(
            &items,
            &y,
            config.source_id.folds,
            config.source_id.c,
            config.source_id.tol,
            cv_seed,
            |train: &[usize]| {
                let spec = Arc::new(set.build_spec(train.iter().map(|&i| &items[i]), k, &fw, &mk)?);
                let fitted: Vec<_> = train.iter().map(|&i| extract(&items[i], &spec)).collect();
                let scaler = MinMaxScaler::fit(&fitted)?;
                Ok(move |chunk: &Chunk| scaler.apply(&extract(chunk, &spec)))
            },
        )?;
        if !config.source_id.families.is_empty() {
            let collapsed = collapse_families(&confusion, &config.source_id.families)?;
            report.family_accuracies.insert(set.name().to_string(), collapsed.accuracy());
            report.family_confusions.insert(set.name().to_string(), collapsed);
        }
        report.accuracies.insert(set.name().to_string(), accuracy);
        report.confusions.insert(set.name().to_string(), confusion);
    }
    Ok(report)
}

/// Groups translated corpora by source language; originals are skipped.
/// A language may appear only once and at least two are required.
fn translated_by_lang(corpora: Vec<TaggedCorpus>) -> Result<BTreeMap<Lang, TaggedCorpus>> {
    let mut by_lang: BTreeMap<Lang, TaggedCorpus> = BTreeMap::new();
    for corpus in corpora {
        if !corpus.meta.status.is_translated() {
            continue;
        }
        let lang = corpus.meta.source_language;
        if by_lang.insert(lang, corpus).is_some() {
            return Err(Error::InvalidInput(format!(
                "two corpora translated from {lang}; merge them before running"
            )));
        }
    }
    if by_lang.len() < 2 {
        return Err(Error::InvalidInput(
            "tree reconstruction needs translated corpora from >= 2 languages".into(),
        ));
    }
    Ok(by_lang)
}

/// One clustering draw per configured feature set, with no gold tree or
/// scoring involved: sample, extract, scale, cluster. Uses the same
/// seed path as repetition 0 of [`run_tree_experiment`], so the trees
/// returned here are exactly the ones that experiment records.
pub fn build_trees(config: &ExperimentConfig) -> Result<BTreeMap<String, PhyloTree>> {
    config.validate()?;
    let corpora = manifest_corpora(config)?;
    let (fw, mk) = load_lexicons(config)?;
    let by_lang = translated_by_lang(corpora)?;
    let budget = match config.trees.tokens_per_language {
        Some(n) => SampleBudget::Tokens(n),
        None => SampleBudget::MaxCommon,
    };
    let mut trees = BTreeMap::new();
    for &set in &config.feature_sets {
        let rep_seed = seed::mix(config.master_seed, &format!("tree:{set}"), 0);
        let sampled = crate::corpus::sample_equal(&by_lang, budget, rep_seed)?;
        let chunks: Vec<&Chunk> = sampled.values().collect();
        let spec = Arc::new(set.build_spec(chunks.iter().copied(), config.trigram_k, &fw, &mk)?);
        let vectors: Vec<_> = chunks.iter().map(|c| extract(c, &spec)).collect();
        let scaled = minmax_scale(&vectors)?;
        let matrix = euclidean_distances(&scaled)?;
        trees.insert(set.name().to_string(), ward_cluster(&matrix));
    }
    Ok(trees)
}

/// Tree reconstruction: per feature set and repetition, samples an
/// equal token budget per source language, runs extract, min-max
/// scaling, Euclidean distances, and minimal-variance clustering, and
/// scores the tree against gold in both modes. Reports mean and sample
/// standard deviation per set plus the random-baseline rows computed
/// with the same gold and normalization constants.
pub fn run_tree_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let corpora = manifest_corpora(config)?;
    let (fw, mk) = load_lexicons(config)?;
    let by_lang = translated_by_lang(corpora)?;
    let gold_path = config.require("gold_tree", &config.paths.gold_tree)?;
    let full_gold = parse_newick(&std::fs::read_to_string(&gold_path)?)?;
    let gold = resolve_gold(full_gold, &by_lang)?;
    let budget = match config.trees.tokens_per_language {
        Some(n) => SampleBudget::Tokens(n),
        None => SampleBudget::MaxCommon,
    };
    let modes = [Mode::Weighted, Mode::Unweighted];
    let norms: BTreeMap<Mode, f64> = modes
        .iter()
        .map(|&mode| {
            (mode, estimate_norm_constant(&gold, mode, config.trees.norm_samples, config.master_seed))
        })
        .collect();

    let mut report = ExperimentReport::new("tree-reconstruction", config);
    report.notes.push(format!(
        "{} repetitions per feature set, budget {:?}, norm constants weighted {:.6} / unweighted {:.6}",
        config.trees.repetitions, budget, norms[&Mode::Weighted], norms[&Mode::Unweighted]
    ));
    for &set in &config.feature_sets {
        let k = config.trigram_k;
        let reps: Result<Vec<(f64, f64, Option<String>)>> = (0..config.trees.repetitions)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = seed::mix(config.master_seed, &format!("tree:{set}"), rep as u64);
                let sampled = crate::corpus::sample_equal(&by_lang, budget, rep_seed)?;
                let chunks: Vec<&Chunk> = sampled.values().collect();
                let spec = Arc::new(set.build_spec(chunks.iter().copied(), k, &fw, &mk)?);
                let vectors: Vec<_> = chunks.iter().map(|c| extract(c, &spec)).collect();
                let scaled = minmax_scale(&vectors)?;
                let matrix = euclidean_distances(&scaled)?;
                let tree = ward_cluster(&matrix);
                let w = (dist(&tree, &gold, Mode::Weighted)? / norms[&Mode::Weighted]).min(1.0);
                let u = (dist(&tree, &gold, Mode::Unweighted)? / norms[&Mode::Unweighted]).min(1.0);
                Ok((w, u, (rep == 0).then(|| to_newick(&tree))))
            })
            .collect();
        let reps = reps?;
        let weighted: Vec<f64> = reps.iter().map(|r| r.0).collect();
        let unweighted: Vec<f64> = reps.iter().map(|r| r.1).collect();
        for (mode, scores) in [(Mode::Weighted, weighted), (Mode::Unweighted, unweighted)] {
            let (mean, std) = mean_sample_std(&scores);
            report.tree_rows.push(TreeDistanceRow {
                feature_set: set.name().to_string(),
                mode,
                mean,
                std,
                n: scores.len(),
                norm_constant: norms[&mode],
            });
        }
        report.trees.insert(set.name().to_string(), reps[0].2.clone().unwrap());
    }
    for mode in modes {
        let (mean, std) =
            random_baseline(&gold, mode, config.trees.baseline_n, config.master_seed, norms[&mode]);
        report.tree_rows.push(TreeDistanceRow {
            feature_set: "random-baseline".to_string(),
            mode,
            mean,
            std,
            n: config.trees.baseline_n,
            norm_constant: norms[&mode],
        });
    }
    Ok(report)
}

/// Aligns the gold tree with the corpus languages. A gold tree covering
/// extra languages is projected down to the corpus set; corpus languages
/// absent from the gold tree are an error.
fn resolve_gold(gold: PhyloTree, by_lang: &BTreeMap<Lang, TaggedCorpus>) -> Result<PhyloTree> {
    let mut gold_labels: Vec<String> = gold.leaf_labels().iter().map(|l| l.to_string()).collect();
    gold_labels.sort();
    let corpus_labels: Vec<String> = by_lang.keys().map(|l| l.to_string()).collect();
    if gold_labels == corpus_labels {
        return Ok(gold);
    }
    let only_right: Vec<String> =
        corpus_labels.iter().filter(|l| !gold_labels.contains(l)).cloned().collect();
    if !only_right.is_empty() {
        return Err(Error::LeafSetMismatch {
            only_left: gold_labels.iter().filter(|l| !corpus_labels.contains(l)).cloned().collect(),
            only_right,
        });
    }
    project_gold(&gold, &corpus_labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_world_config(dir: &Path, seed: u64) -> ExperimentConfig {
        let synth = SynthConfig {
            families: 2,
            languages_per_family: 2,
            tokens_per_language: 8_000,
            original_tokens: 8_000,
            ..SynthConfig::default()
        };
        let world = generate_synthetic(&synth, seed).unwrap();
        world.save(dir).unwrap();
        ExperimentConfig {
            master_seed: seed,
            feature_sets: vec![FeatureSet::PosTrigrams],
            trigram_k: 200,
            paths: PathsConfig {
                manifest: Some(dir.join("manifest.toml")),
                function_words: Some(dir.join("function_words.txt")),
                cohesive_markers: Some(dir.join("cohesive_markers.txt")),
                gold_tree: Some(dir.join("gold.nwk")),
            },
            ot: OtConfig { chunk_tokens: 400, chunks_per_class: 16, folds: 4, ..OtConfig::default() },
            source_id: SourceIdConfig {
                chunk_tokens: 400,
                chunks_per_language: 12,
                folds: 3,
                families: [
                    ("aa", "fam-a"),
                    ("ab", "fam-a"),
                    ("ba", "fam-b"),
                    ("bb", "fam-b"),
                ]
                .into_iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
                ..SourceIdConfig::default()
            },
            trees: TreeConfig {
                repetitions: 3,
                tokens_per_language: Some(4_000),
                baseline_n: 50,
                norm_samples: 200,
            },
            synth,
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let config = ExperimentConfig::default();
        let text = toml::to_string_pretty(&config).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn validate_rejects_zero_counts_and_unknown_keys() {
        let mut config = ExperimentConfig::default();
        config.trees.repetitions = 0;
        assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
        let mut config = ExperimentConfig::default();
        config.feature_sets.clear();
        assert!(config.validate().is_err());
        assert!(toml::from_str::<ExperimentConfig>("no_such_key = 1").is_err());
    }

    #[test]
    fn feature_set_names_round_trip() {
        for set in FeatureSet::ALL {
            assert_eq!(set.name().parse::<FeatureSet>().unwrap(), set);
        }
        assert!("pos trigrams".parse::<FeatureSet>().is_err());
    }

    #[test]
    fn subsample_preserves_order_and_is_seeded() {
        let mut rng = seed::stream(1, "test", 0);
        let picked = subsample((0..100).collect::<Vec<_>>(), 10, &mut rng);
        assert_eq!(picked.len(), 10);
        assert!(picked.windows(2).all(|w| w[0] < w[1]));
        let mut rng = seed::stream(1, "test", 0);
        assert_eq!(picked, subsample((0..100).collect::<Vec<_>>(), 10, &mut rng));
        let mut rng = seed::stream(1, "test", 0);
        assert_eq!(subsample(vec![7, 8], 5, &mut rng), vec![7, 8]);
    }

    #[test]
    fn ot_experiment_runs_and_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_world_config(dir.path(), 41);
        let a = run_ot_classification(&config).unwrap();
        let b = run_ot_classification(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let acc = a.accuracies["pos-trigrams"];
        assert!(acc > 0.8, "planted split should classify well, got {acc}");
        assert_eq!(a.confusions["pos-trigrams"].total(), 32);
        assert!(a.accuracy_csv().starts_with("feature_set,accuracy\n"));
    }

    #[test]
    fn source_id_collapses_families() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_world_config(dir.path(), 43);
        let report = run_source_id(&config).unwrap();
        let lang_acc = report.accuracies["pos-trigrams"];
        let fam_acc = report.family_accuracies["pos-trigrams"];
        assert!(fam_acc >= lang_acc, "collapse cannot lower accuracy: {fam_acc} vs {lang_acc}");
        assert_eq!(report.chance_baseline, Some(0.25));
        assert_eq!(report.family_confusions["pos-trigrams"].labels, vec!["fam-a", "fam-b"]);
        let csv = report.accuracy_csv();
        assert!(csv.starts_with("feature_set,accuracy,family_accuracy\n"));
    }

    #[test]
    fn tree_experiment_reports_rows_and_baseline() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_world_config(dir.path(), 47);
        let report = run_tree_experiment(&config).unwrap();
        // 1 feature set x 2 modes + 2 baseline rows.
        assert_eq!(report.tree_rows.len(), 4);
        for row in &report.tree_rows {
            assert!(row.std >= 0.0);
            assert!((0.0..=1.0).contains(&row.mean));
            assert!(row.norm_constant > 0.0);
            if row.feature_set == "random-baseline" {
                assert_eq!(row.n, 50);
            } else {
                assert_eq!(row.n, 3);
            }
        }
        let tree = parse_newick(&report.trees["pos-trigrams"]).unwrap();
        assert_eq!(tree.leaf_count(), 4);
        assert!(report.tree_csv().contains("random-baseline,"));
        let again = run_tree_experiment(&config).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn missing_paths_error_names_the_field() {
        let config = ExperimentConfig::default();
        match run_ot_classification(&config) {
            Err(Error::InvalidConfig(msg)) => assert!(msg.contains("paths.manifest")),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn tree_experiment_rejects_leaf_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_world_config(dir.path(), 53);
        std::fs::write(dir.path().join("gold.nwk"), "((aa:1,ab:1):1,(ba:1,xx:1):1);\n").unwrap();
        config.paths.gold_tree = Some(dir.path().join("gold.nwk"));
        match run_tree_experiment(&config) {
            Err(Error::LeafSetMismatch { only_left, only_right }) => {
                assert_eq!(only_left, vec!["xx"]);
                assert_eq!(only_right, vec!["bb"]);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn tree_experiment_projects_larger_gold() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_world_config(dir.path(), 59);
        // Gold covers two extra languages; the run should project them away
        // and score against the induced 4-leaf tree.
        std::fs::write(
            dir.path().join("gold-wide.nwk"),
            "(((aa:1,ab:1):1,xx:2):2,((ba:1,bb:1):1,yy:2):2);\n",
        )
        .unwrap();
        config.paths.gold_tree = Some(dir.path().join("gold-wide.nwk"));
        let wide = run_tree_experiment(&config).unwrap();
        config.paths.gold_tree = Some(dir.path().join("gold.nwk"));
        let exact = run_tree_experiment(&config).unwrap();
        // The projected gold ((aa,ab),(ba,bb)) matches the shipped gold's
        // topology, so the unweighted rows agree; norm constants differ
        // because edge lengths do.
        let row = |r: &ExperimentReport, set: &str| {
            r.tree_rows
                .iter()
                .find(|x| x.feature_set == set && x.mode == Mode::Unweighted)
                .unwrap()
                .clone()
        };
        assert_eq!(row(&wide, "pos-trigrams").n, 3);
        assert!((row(&wide, "pos-trigrams").mean - row(&exact, "pos-trigrams").mean).abs() < 1e-12);
    }
}
