//! Counters for five grammatical phenomena whose frequencies shift under
//! source-language interference, measured on Penn-style tagged text.
//!
//! Each phenomenon has a conventional reporting unit (occurrences per 10,
//! 25, 100, 250, or 500 tokens) chosen so the rates land on a readable
//! scale. All patterns match within a single sentence.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Lang, TaggedCorpus, Token};
use crate::error::{Error, Result};

/// Default lookahead for the auxiliary + participle patterns: the
/// participle may sit up to 2 tokens after the auxiliary, with adverbs
/// filling the gap ("has clearly improved"). A window of 1 demands
/// immediate adjacency.
pub const DEFAULT_WINDOW: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phenomenon {
    /// "the" carrying a determiner tag; reported per 10 tokens.
    DefiniteArticle,
    /// Noun immediately followed by "of"; per 25 tokens.
    OfConstruction,
    /// Verb immediately followed by a particle; per 250 tokens.
    VerbParticle,
    /// Have-auxiliary followed by a past participle; per 100 tokens.
    Perfect,
    /// Be-form followed by a present participle; per 500 tokens.
    Progressive,
}

impl Phenomenon {
    pub const ALL: [Phenomenon; 5] = [
        Phenomenon::DefiniteArticle,
        Phenomenon::OfConstruction,
        Phenomenon::VerbParticle,
        Phenomenon::Perfect,
        Phenomenon::Progressive,
    ];

    /// Tokens per reported occurrence.
    pub fn unit(&self) -> f64 {
        match self {
            Phenomenon::DefiniteArticle => 10.0,
            Phenomenon::OfConstruction => 25.0,
            Phenomenon::VerbParticle => 250.0,
            Phenomenon::Perfect => 100.0,
            Phenomenon::Progressive => 500.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Phenomenon::DefiniteArticle => "definite-article",
            Phenomenon::OfConstruction => "of-construction",
            Phenomenon::VerbParticle => "verb-particle",
            Phenomenon::Perfect => "perfect",
            Phenomenon::Progressive => "progressive",
        }
    }
}

impl std::fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phenomenon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Phenomenon> {
        Phenomenon::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown phenomenon {s:?}")))
    }
}

/// A count with its normalization: rate = count * unit / tokens.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhenomenonRate {
    pub phenomenon: Phenomenon,
    pub count: u64,
    pub tokens: usize,
    pub rate: f64,
}

const HAVE_FORMS: [&str; 4] = ["have", "has", "had", "having"];
const BE_FORMS: [&str; 8] = ["am", "is", "are", "was", "were", "be", "been", "being"];

fn is_noun(tag: &str) -> bool {
    tag.starts_with("NN")
}

fn is_verb(tag: &str) -> bool {
    tag.starts_with("VB")
}

fn is_adverb(tag: &str) -> bool {
    tag.starts_with("RB")
}

fn form_in(token: &Token, forms: &[&str]) -> bool {
    forms.iter().any(|f| token.form.eq_ignore_ascii_case(f))
}

/// Looks for a tag within `window` tokens after position `i`, requiring
/// every intervening token to be an adverb.
fn aux_pattern(sentence: &[Token], i: usize, window: usize, participle: &str) -> bool {
    for d in 1..=window {
        let Some(next) = sentence.get(i + d) else {
            return false;
        };
        if next.tag == participle {
            return true;
        }
        if !is_adverb(&next.tag) {
            return false;
        }
    }
    false
}

fn count_in_sentence(sentence: &[Token], phenomenon: Phenomenon, window: usize) -> u64 {
    let mut count = 0;
    for (i, token) in sentence.iter().enumerate() {
        let hit = match phenomenon {
            Phenomenon::DefiniteArticle => {
                token.tag == "DT" && token.form.eq_ignore_ascii_case("the")
            }
            Phenomenon::OfConstruction => {
                is_noun(&token.tag)
                    && sentence
                        .get(i + 1)
                        .is_some_and(|n| n.form.eq_ignore_ascii_case("of"))
            }
            Phenomenon::VerbParticle => {
                is_verb(&token.tag) && sentence.get(i + 1).is_some_and(|n| n.tag == "RP")
            }
            Phenomenon::Perfect => {
                is_verb(&token.tag)
                    && form_in(token, &HAVE_FORMS)
                    && aux_pattern(sentence, i, window, "VBN")
            }
            Phenomenon::Progressive => {
                is_verb(&token.tag)
                    && form_in(token, &BE_FORMS)
                    && aux_pattern(sentence, i, window, "VBG")
            }
        };
        count += hit as u64;
    }
    count
}

/// Counts one phenomenon over a corpus with the default window.
pub fn count_phenomenon(corpus: &TaggedCorpus, phenomenon: Phenomenon) -> PhenomenonRate {
    count_phenomenon_windowed(corpus, phenomenon, DEFAULT_WINDOW)
}

/// Counts with an explicit auxiliary window (window = 1 reproduces the
/// strictly adjacent reading of the perfect and progressive patterns).
pub fn count_phenomenon_windowed(
    corpus: &TaggedCorpus,
    phenomenon: Phenomenon,
    window: usize,
) -> PhenomenonRate {
    assert!(window >= 1);
    let count: u64 = corpus
        .sentences
        .iter()
        .map(|s| count_in_sentence(s, phenomenon, window))
        .sum();
    let tokens = corpus.token_count();
    PhenomenonRate {
        phenomenon,
        count,
        tokens,
        rate: count as f64 * phenomenon.unit() / tokens as f64,
    }
}

/// Per-family unweighted means of per-language rates.
pub fn family_rates(
    corpora: &BTreeMap<Lang, TaggedCorpus>,
    phenomenon: Phenomenon,
    families: &BTreeMap<Lang, String>,
) -> Result<BTreeMap<String, f64>> {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (lang, corpus) in corpora {
        let family = families
            .get(lang)
            .ok_or_else(|| Error::UnmappedLabel(lang.to_string()))?;
        let rate = count_phenomenon(corpus, phenomenon).rate;
        let entry = sums.entry(family.clone()).or_insert((0.0, 0));
        entry.0 += rate;
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(family, (sum, n))| (family, sum / n as f64))
        .collect())
}

/// CSV table of per-family rates: one row per family, one column per
/// phenomenon in declaration order.
pub fn family_rates_csv(
    corpora: &BTreeMap<Lang, TaggedCorpus>,
    families: &BTreeMap<Lang, String>,
) -> Result<String> {
    let tables: Vec<BTreeMap<String, f64>> = Phenomenon::ALL
        .iter()
        .map(|&p| family_rates(corpora, p, families))
        .collect::<Result<_>>()?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["family".to_string()];
    header.extend(Phenomenon::ALL.iter().map(|p| p.name().to_string()));
    wtr.write_record(&header).unwrap();
    for family in tables[0].keys() {
        let mut record = vec![family.clone()];
        record.extend(tables.iter().map(|t| format!("{:.6}", t[family])));
        wtr.write_record(&record).unwrap();
    }
    Ok(String::from_utf8(wtr.into_inner().unwrap()).unwrap())
}
