//! Classify chunks as originals vs. translations with cross-validated
//! linear SVMs over several feature sets.
//!
//!     cargo run --example ot_classification

use lingtree::experiments::{
    generate_synthetic, run_ot_classification, ExperimentConfig, FeatureSet, OtConfig, SynthConfig,
};

fn main() -> lingtree::Result<()> {
    // The experiment drivers are file-based by design, so this example
    // materializes a synthetic world in a scratch directory first.
    let dir = tempfile::tempdir()?;
    let synth = SynthConfig {
        families: 2,
        languages_per_family: 3,
        tokens_per_language: 12_000,
        original_tokens: 36_000,
        ..SynthConfig::default()
    };
    let world = generate_synthetic(&synth, 3)?;
    world.save(dir.path())?;

    let mut config = ExperimentConfig {
        master_seed: 3,
        feature_sets: vec![
            FeatureSet::PosTrigrams,
            FeatureSet::FunctionWords,
            FeatureSet::CohesiveMarkers,
            FeatureSet::TrigramsFunctionWords,
        ],
        ot: OtConfig { chunk_tokens: 1500, chunks_per_class: 24, folds: 10, ..OtConfig::default() },
        synth,
        ..ExperimentConfig::default()
    };
    config.paths.manifest = Some(dir.path().join("manifest.toml"));
    config.paths.function_words = Some(dir.path().join("function_words.txt"));
    config.paths.cohesive_markers = Some(dir.path().join("cohesive_markers.txt"));

    let report = run_ot_classification(&config)?;
    for note in &report.notes {
        println!("{note}");
    }
    println!("\n{:<20} accuracy (chance {:.2})", "feature set", report.chance_baseline.unwrap());
    for (set, accuracy) in &report.accuracies {
        println!("{set:<20} {accuracy:.4}");
    }

    // The confusion matrix orders labels alphabetically: O then T.
    let confusion = &report.confusions["pos-trigrams"];
    println!("\npos-trigrams confusion (rows = true, columns = predicted):");
    println!("{:>4} {:>4} {:>4}", "", "O", "T");
    for (i, label) in confusion.labels.iter().enumerate() {
        println!("{:>4} {:>4} {:>4}", label, confusion.counts[i][0], confusion.counts[i][1]);
    }
    Ok(())
}
