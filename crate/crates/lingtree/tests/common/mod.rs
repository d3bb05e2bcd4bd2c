//! Shared helpers for the integration suites: an independent
//! minimal-variance clustering reference and random tree generators.

#![allow(dead_code)]

use lingtree::phylo::{DistanceMatrix, PhyloTree};
use rand::Rng;

/// From-scratch minimal-variance agglomeration, the reference the fast
/// recurrence-based implementation is checked against.
///
/// At every step the criterion for each active pair is recomputed from
/// the original squared distances. Writing S(X, Y) for the sum of
/// squared distances over all ordered pairs in X x Y, the squared gap
/// between the centroids of disjoint clusters A and B is
///
/// ```text
/// S(A,B)/(|A||B|) - S(A,A)/(2|A|^2) - S(B,B)/(2|B|^2)
/// ```
///
/// and the merge criterion is 2|A||B|/(|A|+|B|) times that gap. The
/// identity is algebraic, so it holds for any symmetric input, not just
/// Euclidean ones. Tie-breaking and position bookkeeping mirror the
/// implementation: strict improvement keeps the smallest (i, j), and
/// the merged cluster takes over position i.
pub fn ward_oracle(m: &DistanceMatrix) -> PhyloTree {
    let n = m.len();
    assert!(n >= 2, "clustering needs at least 2 points");
    let sq: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j) * m.get(i, j)).collect())
        .collect();

    struct Cluster {
        members: Vec<usize>,
        tree: PhyloTree,
        height: f64,
    }

    let pair_sum = |a: &[usize], b: &[usize]| -> f64 {
        a.iter()
            .map(|&i| b.iter().map(|&j| sq[i][j]).sum::<f64>())
            .sum()
    };
    let criterion = |a: &Cluster, b: &Cluster| -> f64 {
        let (na, nb) = (a.members.len() as f64, b.members.len() as f64);
        let gap = pair_sum(&a.members, &b.members) / (na * nb)
            - pair_sum(&a.members, &a.members) / (2.0 * na * na)
            - pair_sum(&b.members, &b.members) / (2.0 * nb * nb);
        2.0 * na * nb / (na + nb) * gap
    };

    let mut slots: Vec<Option<Cluster>> = m
        .labels()
        .iter()
        .enumerate()
        .map(|(i, label)| {
            Some(Cluster {
                members: vec![i],
                tree: PhyloTree::leaf(label.clone()),
                height: 0.0,
            })
        })
        .collect();

    for _ in 1..n {
        let mut best = f64::INFINITY;
        let (mut bi, mut bj) = (usize::MAX, usize::MAX);
        for i in 0..n {
            let Some(a) = &slots[i] else { continue };
            for (j, slot) in slots.iter().enumerate().skip(i + 1) {
                let Some(b) = slot else { continue };
                let w = criterion(a, b);
                if w < best {
                    best = w;
                    bi = i;
                    bj = j;
                }
            }
        }
        let a = slots[bi].take().unwrap();
        let b = slots[bj].take().unwrap();
        let h = best.max(0.0).sqrt();
        let mut members = a.members;
        members.extend(b.members);
        let tree = PhyloTree::join_with_height(
            a.tree,
            (h - a.height).max(0.0),
            b.tree,
            (h - b.height).max(0.0),
            h,
        );
        slots[bi] = Some(Cluster { members, tree, height: h });
    }
    slots.into_iter().flatten().next().unwrap().tree
}

/// Random binary topology over the given labels: repeatedly joins two
/// uniformly chosen subtrees with edge lengths drawn from [0.05, 8).
pub fn random_binary_tree<R: Rng + ?Sized>(labels: &[String], rng: &mut R) -> PhyloTree {
    assert!(labels.len() >= 2, "need at least 2 labels");
    let mut pool: Vec<PhyloTree> = labels.iter().map(PhyloTree::leaf).collect();
    while pool.len() > 1 {
        let a = pool.swap_remove(rng.random_range(0..pool.len()));
        let b = pool.swap_remove(rng.random_range(0..pool.len()));
        let ea = rng.random_range(0.05..8.0);
        let eb = rng.random_range(0.05..8.0);
        pool.push(PhyloTree::join(a, ea, b, eb));
    }
    pool.pop().unwrap()
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("L{i}")).collect()
}

/// Rebuilds a tree with every edge multiplied by `factor`.
pub fn scale_edges(t: &PhyloTree, factor: f64) -> PhyloTree {
    fn build(t: &PhyloTree, id: usize, factor: f64) -> PhyloTree {
        match t.children(id) {
            None => PhyloTree::leaf(t.label(id).unwrap()),
            Some([l, r]) => PhyloTree::join(
                build(t, l, factor),
                t.edge(l) * factor,
                build(t, r, factor),
                t.edge(r) * factor,
            ),
        }
    }
    build(t, t.root(), factor)
}

/// Rebuilds a tree with two leaf labels exchanged.
pub fn swap_leaves(t: &PhyloTree, a: &str, b: &str) -> PhyloTree {
    fn build(t: &PhyloTree, id: usize, a: &str, b: &str) -> PhyloTree {
        match t.children(id) {
            None => {
                let label = t.label(id).unwrap();
                let swapped = if label == a {
                    b
                } else if label == b {
                    a
                } else {
                    label
                };
                PhyloTree::leaf(swapped)
            }
            Some([l, r]) => PhyloTree::join(
                build(t, l, a, b),
                t.edge(l),
                build(t, r, a, b),
                t.edge(r),
            ),
        }
    }
    build(t, t.root(), a, b)
}
