//! Compare trees with the leaf-pair squared-distance metric, in both
//! weighted (path length) and unweighted (edge count) modes, and put
//! scores on the normalized zero-to-one scale.
//!
//!     cargo run --example score_against_gold

use lingtree::phylo::parse_newick;
use lingtree::treedist::{dist, estimate_norm_constant, random_baseline, score, Mode};

fn main() -> lingtree::Result<()> {
    let gold = parse_newick("(((en:1,de:1):1.5,(fr:1.2,es:1.2):1.3):2,ru:4.5);")?;
    // Same topology with every branch doubled, same topology with only
    // the ru branch stretched, and a tree with two leaves swapped.
    let rescaled = parse_newick("(((en:2,de:2):3,(fr:2.4,es:2.4):2.6):4,ru:9);")?;
    let stretched = parse_newick("(((en:1,de:1):1.5,(fr:1.2,es:1.2):1.3):2,ru:20);")?;
    let swapped = parse_newick("(((en:1,fr:1):1.5,(de:1.2,es:1.2):1.3):2,ru:4.5);")?;

    let cases = [
        ("gold itself", &gold),
        ("all branches doubled", &rescaled),
        ("ru branch stretched", &stretched),
        ("de/fr swapped", &swapped),
    ];
    for (name, tree) in cases {
        println!(
            "{name}: weighted {:.4}, unweighted {}",
            dist(tree, &gold, Mode::Weighted)?,
            dist(tree, &gold, Mode::Unweighted)?
        );
    }
    // Both modes ignore a uniform rescaling: unweighted counts edges,
    // and weighted divides each tree's path matrix by its own maximum,
    // since reconstructed merge heights and gold divergence times have
    // no common unit. Changing lengths *relative* to each other, as
    // the stretched ru branch does, registers only in weighted mode.

    // The normalization constant is the maximum distance seen over
    // random trees on the same leaves; dividing by it maps 0 to
    // "identical" and 1 to "as far as random trees get".
    let mode = Mode::Unweighted;
    let norm = estimate_norm_constant(&gold, mode, 10_000, 1);
    let report = score(&swapped, &gold, mode, norm, 1)?;
    println!(
        "\nswapped tree, unweighted: raw {}, normalized {:.4} (norm constant {})",
        report.raw, report.normalized, report.norm_constant
    );

    let (mean, std) = random_baseline(&gold, mode, 1000, 1, norm);
    println!("random-tree baseline: {mean:.4} +/- {std:.4}");
    Ok(())
}
