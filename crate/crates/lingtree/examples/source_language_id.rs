//! Identify the source language of translated chunks, and collapse the
//! confusion matrix to language families.
//!
//!     cargo run --example source_language_id

use lingtree::experiments::{
    generate_synthetic, run_source_id, ExperimentConfig, FeatureSet, SourceIdConfig, SynthConfig,
};

fn main() -> lingtree::Result<()> {
    let dir = tempfile::tempdir()?;
    let synth = SynthConfig {
        families: 3,
        languages_per_family: 2,
        tokens_per_language: 15_000,
        ..SynthConfig::default()
    };
    let world = generate_synthetic(&synth, 11)?;
    world.save(dir.path())?;

    let mut config = ExperimentConfig {
        master_seed: 11,
        feature_sets: vec![FeatureSet::PosTrigrams, FeatureSet::TrigramsFunctionWords],
        source_id: SourceIdConfig {
            chunk_tokens: 1000,
            chunks_per_language: 12,
            folds: 6,
            // The family map turns 6-way mistakes into a 3-way view:
            // confusing siblings inside a family stops counting as an
            // error after the collapse.
            families: world.families.clone(),
            ..SourceIdConfig::default()
        },
        synth,
        ..ExperimentConfig::default()
    };
    config.paths.manifest = Some(dir.path().join("manifest.toml"));
    config.paths.function_words = Some(dir.path().join("function_words.txt"));

    let report = run_source_id(&config)?;
    for note in &report.notes {
        println!("{note}");
    }
    println!(
        "\n{:<20} {:>10} {:>10}   (chance {:.3})",
        "feature set",
        "language",
        "family",
        report.chance_baseline.unwrap()
    );
    for (set, accuracy) in &report.accuracies {
        println!("{set:<20} {accuracy:>10.4} {:>10.4}", report.family_accuracies[set]);
    }

    let confusion = &report.confusions["pos-trigrams"];
    println!("\nlanguage confusion for pos-trigrams (rows = true):");
    print!("{:>4}", "");
    for label in &confusion.labels {
        print!("{label:>4}");
    }
    println!();
    for (i, label) in confusion.labels.iter().enumerate() {
        print!("{label:>4}");
        for j in 0..confusion.labels.len() {
            print!("{:>4}", confusion.counts[i][j]);
        }
        println!();
    }
    Ok(())
}
