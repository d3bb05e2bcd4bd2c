//! Feature specifications and extraction.
//!
//! Three feature families, all content-light by design: POS-tag trigrams,
//! function words, and cohesive markers. A [`FeatureSpec`] freezes the
//! ordered dimension list (trigram vocabulary or lexicon entries) so that
//! every vector extracted against it is comparable; specs built on
//! training data are reused unchanged on held-out data.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use crate::corpus::Chunk;
use crate::error::{Error, Result};

/// Default size of the trigram vocabulary: the top 1,000 most frequent.
pub const DEFAULT_TRIGRAM_K: usize = 1000;

/// A word or phrase list loaded from a lexicon file.
///
/// Entries are lowercased, whitespace-normalized, and deduplicated,
/// preserving first-occurrence order. Entries may contain spaces
/// (multi-word markers).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lexicon {
    pub entries: Vec<String>,
}

impl Lexicon {
    /// Parses lexicon text: one entry per line, `#` lines are comments.
    pub fn parse(text: &str) -> Lexicon {
        let mut entries = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let entry = line
                .to_lowercase()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            if !entries.contains(&entry) {
                entries.push(entry);
            }
        }
        Lexicon { entries }
    }

    pub fn load(path: &Path) -> Result<Lexicon> {
        let text = std::fs::read_to_string(path)?;
        let lexicon = Lexicon::parse(&text);
        if lexicon.entries.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "lexicon {} has no entries",
                path.display()
            )));
        }
        Ok(lexicon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PartKind {
    PosTrigrams { k: usize },
    FunctionWords,
    CohesiveMarkers,
}

#[derive(Clone, Debug, PartialEq)]
struct SpecPart {
    kind: PartKind,
    dims: Vec<String>,
}

impl SpecPart {
    fn name(&self) -> String {
        match self.kind {
            PartKind::PosTrigrams { k } => format!("pos-trigrams({k})"),
            PartKind::FunctionWords => "function-words".to_string(),
            PartKind::CohesiveMarkers => "cohesive-markers".to_string(),
        }
    }
}

/// A frozen, ordered feature dimension list.
///
/// Simple specs have one part; combined specs concatenate the parts of
/// their components in order, so a combined vector is exactly the
/// concatenation of the component vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSpec {
    parts: Vec<SpecPart>,
}

impl FeatureSpec {
    /// Spec over a function-word lexicon; one dimension per entry.
    pub fn function_words(lexicon: Lexicon) -> FeatureSpec {
        FeatureSpec {
            parts: vec![SpecPart {
                kind: PartKind::FunctionWords,
                dims: lexicon.entries,
            }],
        }
    }

    /// Spec over a cohesive-marker lexicon; one dimension per entry.
    pub fn cohesive_markers(lexicon: Lexicon) -> FeatureSpec {
        FeatureSpec {
            parts: vec![SpecPart {
                kind: PartKind::CohesiveMarkers,
                dims: lexicon.entries,
            }],
        }
    }

    /// Concatenates several specs into one combined spec.
    pub fn combined(specs: Vec<FeatureSpec>) -> FeatureSpec {
        FeatureSpec {
            parts: specs.into_iter().flat_map(|s| s.parts).collect(),
        }
    }

    pub fn dim_count(&self) -> usize {
        self.parts.iter().map(|p| p.dims.len()).sum()
    }

    /// Feature names in vector order.
    pub fn dimensions(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().flat_map(|p| p.dims.iter().map(String::as_str))
    }

    /// Short description, e.g. `pos-trigrams(1000)+function-words`.
    pub fn name(&self) -> String {
        self.parts
            .iter()
            .map(SpecPart::name)
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Counts within-sentence tag trigrams over all chunks and keeps the `k`
/// most frequent as the vocabulary, ties broken by lexicographic trigram
/// order. No boundary padding: a sentence of n tokens contributes n-2
/// trigrams. Fails if no sentence has at least 3 tokens.
pub fn build_trigram_spec<'a, I>(chunks: I, k: usize) -> Result<FeatureSpec>
where
    I: IntoIterator<Item = &'a Chunk>,
{
    assert!(k >= 1, "trigram vocabulary size must be at least 1");
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut key = String::new();
    let mut seen_any = false;
    for chunk in chunks {
        seen_any = true;
        for sentence in &chunk.sentences {
            for window in sentence.windows(3) {
                trigram_key(&mut key, window.iter().map(|t| t.tag.as_str()));
                if let Some(n) = counts.get_mut(key.as_str()) {
                    *n += 1;
                } else {
                    counts.insert(key.clone(), 1);
                }
            }
        }
    }
    assert!(seen_any, "build_trigram_spec needs at least one chunk");
    if counts.is_empty() {
        return Err(Error::NoTrigrams);
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    Ok(FeatureSpec {
        parts: vec![SpecPart {
            kind: PartKind::PosTrigrams { k },
            dims: ranked.into_iter().map(|(t, _)| t).collect(),
        }],
    })
}

fn trigram_key<'a>(buf: &mut String, tags: impl Iterator<Item = &'a str>) {
    buf.clear();
    for (i, tag) in tags.enumerate() {
        if i > 0 {
            buf.push(' ');
        }
        buf.push_str(tag);
    }
}

/// A dense vector of per-token-normalized frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub spec: Arc<FeatureSpec>,
    pub values: Vec<f64>,
    /// Clustering or classification label; defaults to the chunk's source
    /// language and may be overwritten by the caller.
    pub label: String,
}

impl FeatureVector {
    pub fn with_label(mut self, label: impl Into<String>) -> FeatureVector {
        self.label = label.into();
        self
    }
}

/// Extracts the feature vector of one chunk under a frozen spec.
///
/// Every value is a raw count divided by the chunk's token count.
/// Out-of-vocabulary content contributes nothing; a chunk with no hits
/// yields the zero vector.
pub fn extract(chunk: &Chunk, spec: &Arc<FeatureSpec>) -> FeatureVector {
    let tokens = chunk.token_count as f64;
    let mut values = Vec::with_capacity(spec.dim_count());
    for part in &spec.parts {
        let counts = match part.kind {
            PartKind::PosTrigrams { .. } => count_trigrams(chunk, &part.dims),
            PartKind::FunctionWords | PartKind::CohesiveMarkers => {
                count_phrases(chunk, &part.dims)
            }
        };
        values.extend(counts.into_iter().map(|c| c as f64 / tokens));
    }
    FeatureVector {
        spec: Arc::clone(spec),
        values,
        label: chunk.origin.source_language.to_string(),
    }
}

fn count_trigrams(chunk: &Chunk, dims: &[String]) -> Vec<usize> {
    let index: HashMap<&str, usize> = dims
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let mut counts = vec![0usize; dims.len()];
    let mut key = String::new();
    for sentence in &chunk.sentences {
        for window in sentence.windows(3) {
            trigram_key(&mut key, window.iter().map(|t| t.tag.as_str()));
            if let Some(&i) = index.get(key.as_str()) {
                counts[i] += 1;
            }
        }
    }
    counts
}

/// Case-insensitive phrase counting, longest match first, no overlaps.
///
/// At each token position the longest entry matching there is counted and
/// the cursor jumps past it, so shorter entries inside an already-matched
/// phrase are not double-counted. Matches never cross sentence
/// boundaries. Single-word entries reduce to plain token counting.
fn count_phrases(chunk: &Chunk, dims: &[String]) -> Vec<usize> {
    let entries: Vec<Vec<&str>> = dims.iter().map(|d| d.split(' ').collect()).collect();
    // Candidate order: longer phrases first; equal-length distinct phrases
    // cannot match at the same position, so their relative order is moot.
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(entries[i].len()));

    let mut counts = vec![0usize; dims.len()];
    let mut lowered: Vec<String> = Vec::new();
    for sentence in &chunk.sentences {
        lowered.clear();
        lowered.extend(sentence.iter().map(|t| t.form.to_lowercase()));
        let mut pos = 0;
        while pos < lowered.len() {
            let mut advance = 1;
            for &idx in &order {
                let entry = &entries[idx];
                if pos + entry.len() <= lowered.len()
                    && entry.iter().zip(&lowered[pos..]).all(|(e, w)| e == w)
                {
                    counts[idx] += 1;
                    advance = entry.len();
                    break;
                }
            }
            pos += advance;
        }
    }
    counts
}

/// Per-dimension [0, 1] rescaling with separate fit and apply steps, so
/// cross-validation can fit bounds on training folds and apply them to
/// held-out data without leakage.
#[derive(Clone, Debug)]
pub struct MinMaxScaler {
    lo: Vec<f64>,
    span: Vec<f64>,
}

impl MinMaxScaler {
    /// Fits per-dimension bounds. All vectors must share one spec.
    pub fn fit(vectors: &[FeatureVector]) -> Result<MinMaxScaler> {
        assert!(!vectors.is_empty(), "MinMaxScaler::fit needs at least 1 vector");
        let spec = &vectors[0].spec;
        for v in &vectors[1..] {
            if !Arc::ptr_eq(&v.spec, spec) && v.spec != *spec {
                return Err(Error::SpecMismatch(format!(
                    "cannot scale {} against {}",
                    v.spec.name(),
                    spec.name()
                )));
            }
        }
        let dims = spec.dim_count();
        let mut lo = vec![f64::INFINITY; dims];
        let mut hi = vec![f64::NEG_INFINITY; dims];
        for v in vectors {
            for (d, &x) in v.values.iter().enumerate() {
                lo[d] = lo[d].min(x);
                hi[d] = hi[d].max(x);
            }
        }
        let span = lo.iter().zip(&hi).map(|(&l, &h)| h - l).collect();
        Ok(MinMaxScaler { lo, span })
    }

    /// Applies the fitted map: (v - min) / span, with dimensions that
    /// were constant at fit time mapping to 0. The map is affine, not
    /// clamping, so values outside the fitted range land outside [0, 1].
    pub fn apply(&self, v: &FeatureVector) -> FeatureVector {
        assert_eq!(v.values.len(), self.lo.len(), "scaler fitted on a different spec");
        let values = v
            .values
            .iter()
            .enumerate()
            .map(|(d, &x)| {
                if self.span[d] > 0.0 {
                    (x - self.lo[d]) / self.span[d]
                } else {
                    0.0
                }
            })
            .collect();
        FeatureVector {
            spec: Arc::clone(&v.spec),
            values,
            label: v.label.clone(),
        }
    }
}

/// Rescales each dimension to [0, 1] across a set of vectors.
///
/// Per dimension: (v - min) / (max - min); a constant dimension maps to 0.
/// All vectors must share one spec.
pub fn minmax_scale(vectors: &[FeatureVector]) -> Result<Vec<FeatureVector>> {
    assert!(vectors.len() >= 2, "minmax_scale needs at least 2 vectors");
    let scaler = MinMaxScaler::fit(vectors)?;
    Ok(vectors.iter().map(|v| scaler.apply(v)).collect())
}
