//! Synthetic corpus generator with a planted language tree.
//!
//! Each source language owns an order-2 tag Markov chain. Chain
//! parameters start from a shared base and take a Gaussian random walk
//! down the planted binary tree, with per-branch variance proportional
//! to branch length, so the expected divergence between two languages
//! grows with their cophenetic distance. Translated text additionally
//! carries one shared parameter shift and a raised cohesive-marker
//! insertion rate; original text uses the unshifted base chain.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    save_manifest, to_tagged_text, CorpusMeta, Lang, ManifestRecord, TaggedCorpus, Token,
    TranslationStatus,
};
use crate::error::{Error, Result};
use crate::features::Lexicon;
use crate::phylo::{to_newick, PhyloTree};
use crate::seed;

/// Target language of every synthetic document, original or translated.
pub const TARGET_LANG: &str = "zz";

const TAGS: [&str; 9] = ["CC", "DT", "IN", "JJ", "MD", "NN", "PR", "RB", "VB"];
const N_TAGS: usize = TAGS.len();
/// Virtual predecessor for sentence-initial states.
const START: usize = N_TAGS;
const N_STATES: usize = N_TAGS + 1;
const TRANS_LEN: usize = N_STATES * N_STATES * N_TAGS;

/// Closed-class forms per tag; their per-language choice weights are
/// part of the walked parameter vector.
const FW_CC: [&str; 3] = ["and", "but", "or"];
const FW_DT: [&str; 4] = ["the", "a", "this", "these"];
const FW_IN: [&str; 6] = ["of", "in", "on", "with", "for", "at"];
const FW_MD: [&str; 5] = ["can", "may", "must", "will", "should"];
const FW_PR: [&str; 5] = ["it", "he", "she", "they", "we"];
const FW_LEN: usize = 23;
const PARAM_LEN: usize = TRANS_LEN + FW_LEN;

const CONTENT_FORMS_PER_TAG: usize = 20;
const SENTENCE_LEN: std::ops::RangeInclusive<usize> = 8..=24;

const MARKERS: [&[(&str, &str)]; 5] = [
    &[("however", "RB")],
    &[("moreover", "RB")],
    &[("in", "IN"), ("fact", "NN")],
    &[("for", "IN"), ("example", "NN")],
    &[("on", "IN"), ("the", "DT"), ("other", "JJ"), ("hand", "NN")],
];

/// Offset of a closed-class tag's weight block within the trailing
/// `FW_LEN` parameters, plus its form list.
fn fw_segment(tag: usize) -> Option<(usize, &'static [&'static str])> {
    match TAGS[tag] {
        "CC" => Some((0, &FW_CC)),
        "DT" => Some((3, &FW_DT)),
        "IN" => Some((7, &FW_IN)),
        "MD" => Some((13, &FW_MD)),
        "PR" => Some((18, &FW_PR)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub families: usize,
    pub languages_per_family: usize,
    /// Tokens per translated corpus (one corpus per source language).
    pub tokens_per_language: usize,
    /// Tokens in the original-text corpus of the target language.
    pub original_tokens: usize,
    /// Height of the last within-family merge in the planted tree.
    pub intra_height: f64,
    /// Height of the first between-family merge; must exceed
    /// `intra_height`.
    pub inter_height: f64,
    /// Random-walk standard deviation per unit of branch length.
    pub walk_std: f64,
    /// Shared parameter shift applied to every translated chain.
    pub translationese_std: f64,
    /// Per-sentence probability of a leading cohesive marker.
    pub marker_rate_original: f64,
    pub marker_rate_translated: f64,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            families: 3,
            languages_per_family: 4,
            tokens_per_language: 30_000,
            original_tokens: 30_000,
            intra_height: 1.0,
            inter_height: 3.0,
            walk_std: 0.6,
            translationese_std: 0.8,
            marker_rate_original: 0.05,
            marker_rate_translated: 0.15,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.families == 0 || self.languages_per_family == 0 {
            return Err(Error::InvalidConfig(
                "family and language counts must be at least 1".into(),
            ));
        }
        if self.families * self.languages_per_family < 2 {
            return Err(Error::InvalidConfig(
                "the planted tree needs at least 2 languages".into(),
            ));
        }
        if self.families > 25 || self.languages_per_family > 26 {
            return Err(Error::InvalidConfig(
                "at most 25 families of at most 26 languages (two-letter codes, 'z' reserved)"
                    .into(),
            ));
        }
        if self.tokens_per_language == 0 || self.original_tokens == 0 {
            return Err(Error::InvalidConfig("token budgets must be positive".into()));
        }
        if self.walk_std <= 0.0 {
            return Err(Error::InvalidInput(
                "zero divergence: walk_std must be positive".into(),
            ));
        }
        // Strict comparisons so NaN heights fail validation as well.
        let ordered = self.intra_height > 0.0 && self.inter_height > self.intra_height;
        if !ordered {
            return Err(Error::InvalidInput(format!(
                "invalid divergence ordering: need 0 < intra ({}) < inter ({})",
                self.intra_height, self.inter_height
            )));
        }
        if self.translationese_std < 0.0 {
            return Err(Error::InvalidConfig("translationese_std must be >= 0".into()));
        }
        for rate in [self.marker_rate_original, self.marker_rate_translated] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidConfig("marker rates must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Everything one seed plants: corpora, the gold tree, the family map,
/// and the lexicons matching the generator's vocabulary.
#[derive(Clone, Debug)]
pub struct SyntheticWorld {
    pub seed: u64,
    /// Translations into [`TARGET_LANG`], keyed by source language.
    pub corpora: BTreeMap<Lang, TaggedCorpus>,
    /// Original text in the target language.
    pub original: TaggedCorpus,
    pub gold: PhyloTree,
    pub gold_newick: String,
    /// Source language code to family label.
    pub families: BTreeMap<String, String>,
    pub function_words: Lexicon,
    pub cohesive_markers: Lexicon,
}

enum Planted {
    Leaf { lang: Lang },
    Node { height: f64, left: Box<Planted>, right: Box<Planted> },
}

impl Planted {
    fn height(&self) -> f64 {
        match self {
            Planted::Leaf { .. } => 0.0,
            Planted::Node { height, .. } => *height,
        }
    }
}

fn lang_code(family: usize, member: usize) -> Lang {
    let code = [b'a' + family as u8, b'a' + member as u8];
    Lang::new(std::str::from_utf8(&code).unwrap()).unwrap()
}

/// Chains members, then families, with strictly increasing merge
/// heights; every within-family merge sits below every between-family
/// merge. Returns the walk topology and the same tree as a `PhyloTree`.
fn build_planted(cfg: &SynthConfig) -> (Planted, PhyloTree) {
    let m = cfg.languages_per_family;
    let mut families = Vec::new();
    for f in 0..cfg.families {
        let mut acc_p = Planted::Leaf { lang: lang_code(f, 0) };
        let mut acc_t = PhyloTree::leaf(lang_code(f, 0).as_str());
        for j in 1..m {
            let h = cfg.intra_height * j as f64 / (m - 1) as f64;
            let prev_h = acc_p.height();
            acc_p = Planted::Node {
                height: h,
                left: Box::new(acc_p),
                right: Box::new(Planted::Leaf { lang: lang_code(f, j) }),
            };
            acc_t = PhyloTree::join_with_height(
                acc_t,
                h - prev_h,
                PhyloTree::leaf(lang_code(f, j).as_str()),
                h,
                h,
            );
        }
        families.push((acc_p, acc_t));
    }
    let mut iter = families.into_iter();
    let (mut acc_p, mut acc_t) = iter.next().unwrap();
    for (k, (fam_p, fam_t)) in iter.enumerate() {
        let h = cfg.inter_height * (1.0 + 0.5 * k as f64);
        let (ha, hb) = (acc_p.height(), fam_p.height());
        acc_p = Planted::Node { height: h, left: Box::new(acc_p), right: Box::new(fam_p) };
        acc_t = PhyloTree::join_with_height(acc_t, h - ha, fam_t, h - hb, h);
    }
    (acc_p, acc_t)
}

#[derive(Clone)]
struct ChainParams {
    logits: Vec<f64>,
}

impl ChainParams {
    fn base(rng: &mut ChaCha8Rng) -> ChainParams {
        ChainParams {
            logits: (0..PARAM_LEN).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        }
    }

    fn perturbed(&self, scale: f64, rng: &mut ChaCha8Rng) -> ChainParams {
        let mut out = self.clone();
        for v in &mut out.logits {
            *v += scale * rng.sample::<f64, _>(StandardNormal);
        }
        out
    }

    fn shifted(&self, shift: &[f64]) -> ChainParams {
        let mut out = self.clone();
        for (v, s) in out.logits.iter_mut().zip(shift) {
            *v += s;
        }
        out
    }
}

/// Pre-order walk: each branch adds N(0, walk_std^2 * length) noise.
fn walk(
    node: &Planted,
    params: ChainParams,
    walk_std: f64,
    rng: &mut ChaCha8Rng,
    out: &mut BTreeMap<Lang, ChainParams>,
) {
    match node {
        Planted::Leaf { lang } => {
            out.insert(*lang, params);
        }
        Planted::Node { height, left, right } => {
            for child in [left, right] {
                let branch = height - child.height();
                let child_params = params.perturbed(walk_std * branch.sqrt(), rng);
                walk(child, child_params, walk_std, rng, out);
            }
        }
    }
}

fn sample_weighted(logits: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

fn emit_corpus(
    params: &ChainParams,
    meta: CorpusMeta,
    tokens_wanted: usize,
    marker_rate: f64,
    rng: &mut ChaCha8Rng,
) -> TaggedCorpus {
    let mut sentences = Vec::new();
    let mut count = 0usize;
    while count < tokens_wanted {
        let mut sentence: Vec<Token> = Vec::new();
        if rng.random::<f64>() < marker_rate {
            let marker = MARKERS[rng.random_range(0..MARKERS.len())];
            sentence.extend(marker.iter().map(|&(form, tag)| Token::new(form, tag)));
        }
        let len = rng.random_range(SENTENCE_LEN);
        let (mut s1, mut s2) = (START, START);
        for _ in 0..len {
            let offset = (s1 * N_STATES + s2) * N_TAGS;
            let tag = sample_weighted(&params.logits[offset..offset + N_TAGS], rng);
            let form = match fw_segment(tag) {
                Some((fw_off, words)) => {
                    let block = &params.logits[TRANS_LEN + fw_off..TRANS_LEN + fw_off + words.len()];
                    words[sample_weighted(block, rng)].to_string()
                }
                None => format!(
                    "{}{:02}",
                    TAGS[tag].to_ascii_lowercase(),
                    rng.random_range(0..CONTENT_FORMS_PER_TAG)
                ),
            };
            sentence.push(Token::new(form, TAGS[tag]));
            s1 = s2;
            s2 = tag;
        }
        count += sentence.len();
        sentences.push(sentence);
    }
    TaggedCorpus::new(meta, sentences).expect("generated corpus is structurally valid")
}

fn function_word_lexicon() -> Lexicon {
    let mut text = String::new();
    for words in [&FW_CC[..], &FW_DT[..], &FW_IN[..], &FW_MD[..], &FW_PR[..]] {
        for w in words {
            text.push_str(w);
            text.push('\n');
        }
    }
    Lexicon::parse(&text)
}

fn marker_lexicon() -> Lexicon {
    let text: String = MARKERS
        .iter()
        .map(|m| m.iter().map(|(form, _)| *form).collect::<Vec<_>>().join(" ") + "\n")
        .collect();
    Lexicon::parse(&text)
}

/// Generates the full synthetic world for one seed. Identical seeds and
/// configs yield byte-identical corpora.
pub fn generate_synthetic(cfg: &SynthConfig, master_seed: u64) -> Result<SyntheticWorld> {
    cfg.validate()?;
    let (planted, gold) = build_planted(cfg);
    let base = ChainParams::base(&mut seed::stream(master_seed, "base", 0));
    let mut chains = BTreeMap::new();
    walk(&planted, base.clone(), cfg.walk_std, &mut seed::stream(master_seed, "walk", 0), &mut chains);
    let shift: Vec<f64> = {
        let mut rng = seed::stream(master_seed, "ot-shift", 0);
        (0..PARAM_LEN)
            .map(|_| cfg.translationese_std * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };

    let target = Lang::new(TARGET_LANG).unwrap();
    let mut corpora = BTreeMap::new();
    let mut families = BTreeMap::new();
    for (lang, params) in &chains {
        let meta = CorpusMeta {
            source_language: *lang,
            target_language: target,
            status: TranslationStatus::TranslatedDirect,
        };
        let mut rng = seed::stream(master_seed, &format!("emit:{lang}"), 0);
        let corpus = emit_corpus(
            &params.shifted(&shift),
            meta,
            cfg.tokens_per_language,
            cfg.marker_rate_translated,
            &mut rng,
        );
        corpora.insert(*lang, corpus);
        let family = lang.as_str().as_bytes()[0] as char;
        families.insert(lang.as_str().to_string(), format!("fam-{family}"));
    }
    let original = emit_corpus(
        &base,
        CorpusMeta {
            source_language: target,
            target_language: target,
            status: TranslationStatus::Original,
        },
        cfg.original_tokens,
        cfg.marker_rate_original,
        &mut seed::stream(master_seed, "emit:original", 0),
    );

    Ok(SyntheticWorld {
        seed: master_seed,
        corpora,
        original,
        gold_newick: to_newick(&gold),
        gold,
        families,
        function_words: function_word_lexicon(),
        cohesive_markers: marker_lexicon(),
    })
}

impl SyntheticWorld {
    /// Writes corpora, manifest, gold tree, and lexicons into `dir`.
    /// File names are stable; the manifest references them relatively.
    pub fn save(&self, dir: &Path) -> Result<Vec<ManifestRecord>> {
        std::fs::create_dir_all(dir)?;
        let mut records = Vec::new();
        for (lang, corpus) in &self.corpora {
            let name = format!("{lang}.tt");
            std::fs::write(dir.join(&name), to_tagged_text(corpus))?;
            records.push(ManifestRecord {
                path: name.into(),
                source_language: corpus.meta.source_language,
                target_language: corpus.meta.target_language,
                status: corpus.meta.status,
            });
        }
        let original_name = format!("{TARGET_LANG}-original.tt");
        std::fs::write(dir.join(&original_name), to_tagged_text(&self.original))?;
        records.push(ManifestRecord {
            path: original_name.into(),
            source_language: self.original.meta.source_language,
            target_language: self.original.meta.target_language,
            status: self.original.meta.status,
        });
        save_manifest(&dir.join("manifest.toml"), &records)?;
        std::fs::write(dir.join("gold.nwk"), format!("{}\n", self.gold_newick))?;
        std::fs::write(dir.join("function_words.txt"), self.function_words.entries.join("\n") + "\n")?;
        std::fs::write(
            dir.join("cohesive_markers.txt"),
            self.cohesive_markers.entries.join("\n") + "\n",
        )?;
        Ok(records)
    }
}
