//! Reconstruct a language tree from monolingual translations: equal
//! token samples, trigram features, min-max scaling, Euclidean
//! distances, minimal-variance clustering.
//!
//!     cargo run --example build_language_tree

use std::sync::Arc;

use lingtree::corpus::{sample_equal, Chunk, SampleBudget};
use lingtree::experiments::{generate_synthetic, SynthConfig};
use lingtree::features::{build_trigram_spec, extract, minmax_scale};
use lingtree::phylo::{euclidean_distances, ward_cluster};
use lingtree::render::render_ascii;
use lingtree::treedist::{dist, Mode};

fn main() -> lingtree::Result<()> {
    let cfg = SynthConfig {
        families: 3,
        languages_per_family: 3,
        tokens_per_language: 20_000,
        ..SynthConfig::default()
    };
    let world = generate_synthetic(&cfg, 7)?;
    println!("planted tree:\n{}", render_ascii(&world.gold));

    // Every language contributes the same token budget, so distances
    // reflect usage differences rather than corpus size.
    let samples = sample_equal(&world.corpora, SampleBudget::MaxCommon, 7)?;
    let chunks: Vec<&Chunk> = samples.values().collect();

    let spec = Arc::new(build_trigram_spec(chunks.iter().copied(), 1000)?);
    let vectors: Vec<_> = chunks.iter().map(|c| extract(c, &spec)).collect();
    let scaled = minmax_scale(&vectors)?;
    let matrix = euclidean_distances(&scaled)?;
    let tree = ward_cluster(&matrix);

    println!("reconstructed tree:\n{}", render_ascii(&tree));
    println!(
        "raw distance to gold: weighted {:.4}, unweighted {}",
        dist(&tree, &world.gold, Mode::Weighted)?,
        dist(&tree, &world.gold, Mode::Unweighted)?
    );

    // The dendrogram cut at k = number of families should recover the
    // planted partition.
    println!("\n3-cluster cut of the reconstruction:");
    for group in tree.cut(3)? {
        println!("  {}", group.join(" "));
    }
    Ok(())
}
