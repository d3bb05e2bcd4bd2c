//! Pre-tagged corpus ingestion, chunking, and equal-size sampling.
//!
//! Tokenization and POS tagging happen outside this crate. Input is the
//! two-column format `token<TAB>tag`, one token per line, sentences
//! separated by a blank line. Corpus metadata travels in a TOML manifest
//! with one record per file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed;

/// Two-letter ISO 639-1 language code, stored lowercase.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lang([u8; 2]);

impl Lang {
    pub fn new(code: &str) -> Result<Lang> {
        let bytes = code.as_bytes();
        if bytes.len() != 2 || !bytes.iter().all(u8::is_ascii_alphabetic) {
            return Err(Error::InvalidLanguage(code.to_string()));
        }
        Ok(Lang([
            bytes[0].to_ascii_lowercase(),
            bytes[1].to_ascii_lowercase(),
        ]))
    }

    pub fn as_str(&self) -> &str {
        // Invariant: constructed from ASCII letters only.
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lang({})", self.as_str())
    }
}

impl FromStr for Lang {
    type Err = Error;

    fn from_str(s: &str) -> Result<Lang> {
        Lang::new(s)
    }
}

impl Serialize for Lang {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Lang {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Lang, D::Error> {
        let s = String::deserialize(deserializer)?;
        Lang::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Whether a text is original or a translation, and if so by which route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranslationStatus {
    Original,
    TranslatedDirect,
    /// Translated through an intermediate language before the final target.
    TranslatedViaPivot,
}

impl TranslationStatus {
    pub fn is_translated(&self) -> bool {
        !matches!(self, TranslationStatus::Original)
    }
}

/// Provenance of a corpus. For original text, source equals target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub source_language: Lang,
    pub target_language: Lang,
    pub status: TranslationStatus,
}

/// One token with its part-of-speech tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    pub tag: String,
}

impl Token {
    pub fn new(form: impl Into<String>, tag: impl Into<String>) -> Token {
        Token {
            form: form.into(),
            tag: tag.into(),
        }
    }
}

/// A tagged corpus: sentences of tokens plus provenance metadata.
///
/// Invariants: every sentence is non-empty, and no token form or tag is
/// the empty string. [`TaggedCorpus::new`] checks both.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedCorpus {
    pub meta: CorpusMeta,
    pub sentences: Vec<Vec<Token>>,
}

impl TaggedCorpus {
    pub fn new(meta: CorpusMeta, sentences: Vec<Vec<Token>>) -> Result<TaggedCorpus> {
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        for sentence in &sentences {
            if sentence.is_empty() {
                return Err(Error::CorpusParse {
                    line: 0,
                    message: "empty sentence".to_string(),
                });
            }
            for token in sentence {
                if token.form.is_empty() || token.tag.is_empty() {
                    return Err(Error::CorpusParse {
                        line: 0,
                        message: "empty token or tag".to_string(),
                    });
                }
            }
        }
        Ok(TaggedCorpus { meta, sentences })
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// A sentence-aligned slice of a corpus with at least the requested tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct Chunk {
    pub origin: CorpusMeta,
    pub sentences: Vec<Vec<Token>>,
    pub token_count: usize,
}

impl Chunk {
    /// Iterates tokens in order, ignoring sentence boundaries.
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }
}

/// Parses two-column tagged text into a corpus.
///
/// Blank lines end the current sentence; runs of blank lines are treated
/// as one separator. Lines must contain exactly one tab with non-empty
/// text on both sides. A trailing `\r` is tolerated for CRLF input.
pub fn parse_tagged_corpus(text: &str, meta: CorpusMeta) -> Result<TaggedCorpus> {
    let mut sentences: Vec<Vec<Token>> = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut cols = line.split('\t');
        let form = cols.next().unwrap_or("");
        let tag = cols.next().unwrap_or("");
        if tag.is_empty() || cols.next().is_some() {
            let found = line.split('\t').count();
            return Err(Error::CorpusParse {
                line: idx + 1,
                message: format!("expected `token<TAB>tag`, found {found} column(s)"),
            });
        }
        if form.is_empty() {
            return Err(Error::CorpusParse {
                line: idx + 1,
                message: "empty token".to_string(),
            });
        }
        current.push(Token::new(form, tag));
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    TaggedCorpus::new(meta, sentences)
}

/// Serializes a corpus back to the two-column text format.
pub fn to_tagged_text(corpus: &TaggedCorpus) -> String {
    let mut out = String::new();
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for token in sentence {
            out.push_str(&token.form);
            out.push('\t');
            out.push_str(&token.tag);
            out.push('\n');
        }
    }
    out
}

/// Splits a corpus into chunks of at least `target_tokens` tokens.
///
/// Greedy fill: sentences are appended in order until the running count
/// reaches the target, then the chunk is cut. The trailing partial chunk
/// is discarded, so a corpus shorter than the target yields no chunks.
pub fn chunk(corpus: &TaggedCorpus, target_tokens: usize) -> Vec<Chunk> {
    assert!(target_tokens >= 1, "target_tokens must be at least 1");
    let mut chunks = Vec::new();
    let mut current: Vec<Vec<Token>> = Vec::new();
    let mut count = 0;
    for sentence in &corpus.sentences {
        count += sentence.len();
        current.push(sentence.clone());
        if count >= target_tokens {
            chunks.push(Chunk {
                origin: corpus.meta,
                sentences: std::mem::take(&mut current),
                token_count: count,
            });
            count = 0;
        }
    }
    chunks
}

/// Token budget for [`sample_equal`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleBudget {
    /// A fixed number of tokens per language.
    Tokens(usize),
    /// The largest budget every language can meet: the minimum total token
    /// count over all corpora, rounded down to a multiple of 1000.
    MaxCommon,
}

/// Draws an equal-sized sample from each language's corpus.
///
/// Sentences are selected uniformly without replacement until the budget
/// is reached, then restored to corpus order, so each sample is a
/// subsequence of its corpus with `token_count >= budget`. Every language
/// draws from its own seed substream: adding or removing a language never
/// changes another language's sample.
pub fn sample_equal(
    corpora: &BTreeMap<Lang, TaggedCorpus>,
    budget: SampleBudget,
    master_seed: u64,
) -> Result<BTreeMap<Lang, Chunk>> {
    if corpora.is_empty() {
        return Err(Error::InvalidInput("sample_equal: no corpora".to_string()));
    }
    let tokens_per_language = match budget {
        SampleBudget::Tokens(n) => {
            assert!(n >= 1, "token budget must be at least 1");
            n
        }
        SampleBudget::MaxCommon => {
            let (lang, min_total) = corpora
                .iter()
                .map(|(lang, c)| (lang, c.token_count()))
                .min_by_key(|&(lang, total)| (total, *lang))
                .unwrap();
            let rounded = min_total / 1000 * 1000;
            if rounded == 0 {
                return Err(Error::InsufficientTokens {
                    language: lang.to_string(),
                    available: min_total,
                    required: 1000,
                });
            }
            rounded
        }
    };
    for (lang, corpus) in corpora {
        let total = corpus.token_count();
        if total < tokens_per_language {
            return Err(Error::InsufficientTokens {
                language: lang.to_string(),
                available: total,
                required: tokens_per_language,
            });
        }
    }

    let mut samples = BTreeMap::new();
    for (lang, corpus) in corpora {
        let mut rng = seed::stream(master_seed, lang.as_str(), 0);
        let mut order: Vec<usize> = (0..corpus.sentences.len()).collect();
        order.shuffle(&mut rng);
        let mut picked = Vec::new();
        let mut count = 0;
        for idx in order {
            picked.push(idx);
            count += corpus.sentences[idx].len();
            if count >= tokens_per_language {
                break;
            }
        }
        picked.sort_unstable();
        let sentences: Vec<Vec<Token>> =
            picked.iter().map(|&i| corpus.sentences[i].clone()).collect();
        samples.insert(
            *lang,
            Chunk {
                origin: corpus.meta,
                sentences,
                token_count: count,
            },
        );
    }
    Ok(samples)
}

/// One corpus file in a manifest. `path` is resolved against the
/// manifest's directory at load time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub path: PathBuf,
    pub source_language: Lang,
    pub target_language: Lang,
    pub status: TranslationStatus,
}

impl ManifestRecord {
    pub fn meta(&self) -> CorpusMeta {
        CorpusMeta {
            source_language: self.source_language,
            target_language: self.target_language,
            status: self.status,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    corpus: Vec<ManifestRecord>,
}

/// Loads a TOML manifest listing corpus files.
///
/// Expected shape: repeated `[[corpus]]` tables with `path`,
/// `source_language`, `target_language`, and `status` keys. Relative
/// paths are resolved against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let text = std::fs::read_to_string(path)?;
    let file: ManifestFile = toml::from_str(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut records = file.corpus;
    for record in &mut records {
        if record.path.is_relative() {
            record.path = base.join(&record.path);
        }
    }
    Ok(records)
}

/// Writes a manifest next to a set of corpus files.
pub fn save_manifest(path: &Path, records: &[ManifestRecord]) -> Result<()> {
    let file = ManifestFile {
        corpus: records.to_vec(),
    };
    let text = toml::to_string_pretty(&file)
        .map_err(|e| Error::InvalidConfig(format!("manifest serialization: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads and parses the corpus file a manifest record points to.
pub fn read_corpus(record: &ManifestRecord) -> Result<TaggedCorpus> {
    let text = std::fs::read_to_string(&record.path)?;
    parse_tagged_corpus(&text, record.meta())
}
