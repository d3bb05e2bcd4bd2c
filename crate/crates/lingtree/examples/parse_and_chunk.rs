//! Parse the two-column tagged-text format and cut a corpus into
//! equal-size chunks.
//!
//!     cargo run --example parse_and_chunk

use lingtree::corpus::{chunk, parse_tagged_corpus, CorpusMeta, Lang, TranslationStatus};

fn main() -> lingtree::Result<()> {
    // One token per line as `form<TAB>tag`, sentences separated by a
    // blank line. Tokenization and tagging happen upstream; this crate
    // only consumes the result.
    let text = [
        "The\tDT", "committee\tNN", "approved\tVBD", "the\tDT", "report\tNN", ".\t.",
        "",
        "However\tRB", ",\t,", "several\tJJ", "members\tNNS", "abstained\tVBD", ".\t.",
        "",
        "The\tDT", "vote\tNN", "was\tVBD", "close\tJJ", ".\t.",
        "",
        "A\tDT", "second\tJJ", "reading\tNN", "follows\tVBZ", "next\tJJ", "week\tNN", ".\t.",
    ]
    .join("\n");

    let meta = CorpusMeta {
        source_language: Lang::new("fr")?,
        target_language: Lang::new("en")?,
        status: TranslationStatus::TranslatedDirect,
    };
    let corpus = parse_tagged_corpus(&text, meta)?;
    println!(
        "parsed {} sentences, {} tokens, translated from {}",
        corpus.sentences.len(),
        corpus.token_count(),
        corpus.meta.source_language
    );

    // Chunks are built greedily from whole sentences until each holds
    // at least `target` tokens; a short tail is dropped, never padded,
    // so every chunk is a comparable sample.
    for target in [6, 10] {
        let chunks = chunk(&corpus, target);
        println!("\ntarget {target} tokens -> {} chunks", chunks.len());
        for (i, c) in chunks.iter().enumerate() {
            let first = c.sentences[0]
                .iter()
                .map(|t| t.form.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            println!("  chunk {i}: {} tokens, starts {:?}", c.token_count, first);
        }
    }
    Ok(())
}
