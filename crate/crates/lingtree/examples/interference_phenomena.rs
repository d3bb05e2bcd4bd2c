//! Count the five interference phenomena in a tagged corpus and report
//! them as rates with their conventional units.
//!
//!     cargo run --example interference_phenomena

use lingtree::analysis::{count_phenomenon, Phenomenon};
use lingtree::corpus::{parse_tagged_corpus, CorpusMeta, Lang, TranslationStatus};

fn main() -> lingtree::Result<()> {
    // A short passage exercising each pattern: definite articles, the
    // perfect, the progressive, verb-particle constructions, and
    // cohesive markers.
    let text = [
        "The\tDT", "delegates\tNNS", "have\tVBP", "approved\tVBN", "the\tDT", "budget\tNN", ".\t.",
        "",
        "However\tRB", ",\t,", "the\tDT", "committee\tNN", "is\tVBZ", "holding\tVBG", "back\tRP", ".\t.",
        "",
        "They\tPRP", "set\tVBD", "up\tRP", "a\tDT", "working\tVBG", "group\tNN", ".\t.",
        "",
        "Therefore\tRB", "the\tDT", "decision\tNN", "has\tVBZ", "been\tVBN", "postponed\tVBN", ".\t.",
    ]
    .join("\n");
    let meta = CorpusMeta {
        source_language: Lang::new("fi")?,
        target_language: Lang::new("en")?,
        status: TranslationStatus::TranslatedDirect,
    };
    let corpus = parse_tagged_corpus(&text, meta)?;
    println!("{} tokens\n", corpus.token_count());

    println!("{:<28} {:>5} {:>10} {:>14}", "phenomenon", "count", "rate", "unit");
    for &phenomenon in Phenomenon::ALL.iter() {
        let r = count_phenomenon(&corpus, phenomenon);
        println!(
            "{:<28} {:>5} {:>10.4} per {} tokens",
            phenomenon.name(),
            r.count,
            r.rate,
            phenomenon.unit()
        );
    }

    // Rates, not counts, are what translated and original text get
    // compared on: count * unit / tokens.
    let articles = count_phenomenon(&corpus, Phenomenon::DefiniteArticle);
    println!(
        "\ndefinite articles: {} of {} tokens -> {:.4} per {} tokens",
        articles.count,
        articles.tokens,
        articles.rate,
        Phenomenon::DefiniteArticle.unit()
    );
    Ok(())
}
