//! Build feature specs and turn chunks into vectors: part-of-speech
//! trigrams, function words, and cohesive markers.
//!
//!     cargo run --example feature_vectors

use std::sync::Arc;

use lingtree::corpus::{chunk, parse_tagged_corpus, CorpusMeta, Lang, TranslationStatus};
use lingtree::features::{build_trigram_spec, extract, minmax_scale, FeatureSpec, Lexicon};

fn main() -> lingtree::Result<()> {
    let text = [
        "We\tPRP", "therefore\tRB", "support\tVBP", "the\tDT", "proposal\tNN", ".\t.",
        "",
        "However\tRB", ",\t,", "the\tDT", "costs\tNNS", "remain\tVBP", "high\tJJ", ".\t.",
        "",
        "The\tDT", "council\tNN", "will\tMD", "review\tVB", "them\tPRP", ".\t.",
        "",
        "Moreover\tRB", ",\t,", "a\tDT", "delay\tNN", "is\tVBZ", "likely\tJJ", ".\t.",
    ]
    .join("\n");
    let meta = CorpusMeta {
        source_language: Lang::new("de")?,
        target_language: Lang::new("en")?,
        status: TranslationStatus::TranslatedDirect,
    };
    let corpus = parse_tagged_corpus(&text, meta)?;
    let chunks = chunk(&corpus, 10);

    // The trigram vocabulary is fit on data: the K most frequent tag
    // trigrams across the given chunks, ties broken alphabetically.
    let trigrams = Arc::new(build_trigram_spec(&chunks, 8)?);
    println!("trigram spec: {} dimensions", trigrams.dim_count());
    for dim in trigrams.dimensions() {
        println!("  {dim}");
    }

    // Lexicon-backed specs have one dimension per entry, data-free.
    let fw = Lexicon::parse("the\na\nwe\nthem\nwill\nis\nhowever\ntherefore\nmoreover");
    let function_words = Arc::new(FeatureSpec::function_words(fw.clone()));
    let combined = Arc::new(FeatureSpec::combined(vec![
        build_trigram_spec(&chunks, 8)?,
        FeatureSpec::function_words(fw),
    ]));

    // Values are frequencies per chunk token, so chunks of different
    // sizes stay comparable.
    for (name, spec) in [("pos-trigrams", &trigrams), ("function-words", &function_words), ("combined", &combined)] {
        let vectors: Vec<_> = chunks.iter().map(|c| extract(c, spec)).collect();
        println!(
            "\n{name}: {} chunks x {} dims, first vector {:?}",
            vectors.len(),
            spec.dim_count(),
            &vectors[0].values[..vectors[0].values.len().min(4)]
        );
        // Min-max scaling maps each dimension to [0, 1] across the
        // set, the normalization used before clustering.
        let scaled = minmax_scale(&vectors)?;
        println!("  scaled first vector {:?}", &scaled[0].values[..scaled[0].values.len().min(4)]);
    }
    Ok(())
}
