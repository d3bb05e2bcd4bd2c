//! Agglomerative clustering under the Ward variance-minimization
//! criterion, driven by the Lance-Williams recurrence on squared
//! distances.
//!
//! The squared Ward distance between clusters A and B is
//! 2|A||B|/(|A|+|B|) times the squared distance of their centroids;
//! for singletons it reduces to the squared input distance. After
//! merging A and B, the distance to any other cluster X follows from
//!
//! ```text
//! s(AB,X) = [ (|A|+|X|) s(A,X) + (|B|+|X|) s(B,X) - |X| s(A,B) ]
//!           / (|A|+|B|+|X|)
//! ```
//!
//! which equals the from-scratch value for any symmetric input, not just
//! Euclidean ones. Merge heights are the square roots of the criterion,
//! matching the convention of the common scientific implementations.

use super::{DistanceMatrix, PhyloTree};

/// Clusters the matrix bottom-up, always merging the active pair with
/// the minimal Ward criterion; exact ties go to the smallest (i, j)
/// position pair. The merged cluster takes over position min(i, j).
///
/// Edge lengths are merge-height differences (leaves sit at height 0),
/// so the output is an ultrametric dendrogram. Heights are non-
/// decreasing: because the merged pair is the global minimum, every
/// updated criterion is provably at least the merge value, and the
/// update clamps away any floating-point dust below it.
pub fn ward_cluster(m: &DistanceMatrix) -> PhyloTree {
    let n = m.len();
    assert!(n >= 2, "clustering needs at least 2 points");

    let mut s = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = m.get(i, j);
            s[i * n + j] = d * d;
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut height = vec![0.0f64; n];
    let mut trees: Vec<Option<PhyloTree>> = m
        .labels()
        .iter()
        .map(|l| Some(PhyloTree::leaf(l.clone())))
        .collect();

    for _ in 1..n {
        let mut bi = usize::MAX;
        let mut bj = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                // Strict < keeps the first, i.e. smallest, (i, j) on ties.
                if active[j] && s[i * n + j] < best {
                    best = s[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        let h = best.max(0.0).sqrt();

        for k in 0..n {
            if !active[k] || k == bi || k == bj {
                continue;
            }
            let total = (size[bi] + size[bj] + size[k]) as f64;
            let updated = ((size[bi] + size[k]) as f64 * s[bi * n + k]
                + (size[bj] + size[k]) as f64 * s[bj * n + k]
                - size[k] as f64 * best)
                / total;
            // The true value cannot drop below the merged minimum.
            let updated = updated.max(best);
            s[bi * n + k] = updated;
            s[k * n + bi] = updated;
        }

        let ta = trees[bi].take().unwrap();
        let tb = trees[bj].take().unwrap();
        trees[bi] = Some(PhyloTree::join_with_height(
            ta,
            h - height[bi],
            tb,
            h - height[bj],
            h,
        ));
        height[bi] = h;
        size[bi] += size[bj];
        active[bj] = false;
    }

    trees.into_iter().flatten().next().unwrap()
}
