//! Tree comparison by leaf-pair path distances.
//!
//! Two trees over the same leaf set are compared by summing, over all
//! unordered leaf pairs, the squared difference of their path distances.
//! Weighted mode sums edge lengths along each path; unweighted mode
//! counts edges. The raw score is normalized to [0, 1] against an
//! empirical "most distant tree" constant estimated from random trees.
//!
//! A convention note for cross-study comparisons: summing ordered pairs
//! instead of unordered ones doubles every raw score, and the factor
//! cancels after normalization as long as one convention is used
//! throughout. This crate uses unordered pairs everywhere.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phylo::{random_tree, to_newick, DistanceMatrix, PhyloTree};
use crate::seed;

/// Whether paths are measured by edge lengths or edge counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Weighted,
    Unweighted,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Weighted => "weighted",
            Mode::Unweighted => "unweighted",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "weighted" => Ok(Mode::Weighted),
            "unweighted" => Ok(Mode::Unweighted),
            other => Err(Error::InvalidInput(format!(
                "unknown mode {other:?}; expected weighted or unweighted"
            ))),
        }
    }
}

fn leaf_pair_rows(t: &PhyloTree, mode: Mode) -> (Vec<String>, Vec<Vec<f64>>) {
    let order = t.postorder();
    let mut depth = vec![0.0f64; t.node_count()];
    for &id in order.iter().rev() {
        if let Some(parent) = t.parent(id) {
            let w = match mode {
                Mode::Weighted => t.edge(id),
                Mode::Unweighted => 1.0,
            };
            depth[id] = depth[parent] + w;
        }
    }
    let leaves = t.leaves();
    let index: HashMap<usize, usize> = leaves.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let labels: Vec<String> = leaves
        .iter()
        .map(|&l| t.label(l).unwrap().to_string())
        .collect();
    let n = leaves.len();
    let mut rows = vec![vec![0.0f64; n]; n];
    let mut under: Vec<Vec<usize>> = vec![Vec::new(); t.node_count()];
    for &id in &order {
        match t.children(id) {
            None => under[id].push(id),
            Some([l, r]) => {
                for &a in &under[l] {
                    for &b in &under[r] {
                        let d = depth[a] + depth[b] - 2.0 * depth[id];
                        let (ia, ib) = (index[&a], index[&b]);
                        rows[ia][ib] = d;
                        rows[ib][ia] = d;
                    }
                }
                let mut merged = std::mem::take(&mut under[l]);
                merged.append(&mut under[r]);
                under[id] = merged;
            }
        }
    }
    (labels, rows)
}

/// All pairwise leaf-to-leaf path distances, labeled in the tree's
/// left-to-right leaf order.
pub fn leaf_pair_distances(t: &PhyloTree, mode: Mode) -> DistanceMatrix {
    assert!(t.leaf_count() >= 2, "need at least 2 leaves");
    let (labels, rows) = leaf_pair_rows(t, mode);
    DistanceMatrix::new(labels, rows).unwrap()
}

fn max_entry(rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Raw distance between two trees over the same leaf set: the sum over
/// unordered leaf pairs of squared path-distance differences.
///
/// In weighted mode each tree's leaf-pair matrix is first divided by its
/// own maximum entry. The two trees' length scales are incommensurable
/// in general (divergence years against cluster merge heights), and
/// per-tree max-normalization is the minimal scale-free alignment; it
/// makes weighted scores invariant to rescaling either tree's lengths.
pub fn dist(tau: &PhyloTree, gold: &PhyloTree, mode: Mode) -> Result<f64> {
    let mut tau_labels: Vec<&str> = tau.leaf_labels();
    let mut gold_labels: Vec<&str> = gold.leaf_labels();
    tau_labels.sort_unstable();
    gold_labels.sort_unstable();
    if tau_labels != gold_labels {
        let only_left: Vec<String> = tau_labels
            .iter()
            .filter(|l| gold_labels.binary_search(l).is_err())
            .map(|l| l.to_string())
            .collect();
        let only_right: Vec<String> = gold_labels
            .iter()
            .filter(|l| tau_labels.binary_search(l).is_err())
            .map(|l| l.to_string())
            .collect();
        return Err(Error::LeafSetMismatch {
            only_left,
            only_right,
        });
    }

    let (t_labels, mut t_rows) = leaf_pair_rows(tau, mode);
    let (g_labels, mut g_rows) = leaf_pair_rows(gold, mode);
    if mode == Mode::Weighted {
        for rows in [&mut t_rows, &mut g_rows] {
            let max = max_entry(rows);
            if max > 0.0 {
                for row in rows.iter_mut() {
                    for v in row.iter_mut() {
                        *v /= max;
                    }
                }
            }
        }
    }
    let t_index: HashMap<&str, usize> = t_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let n = g_labels.len();
    let mut raw = 0.0;
    for i in 0..n {
        let ti = t_index[g_labels[i].as_str()];
        for j in (i + 1)..n {
            let tj = t_index[g_labels[j].as_str()];
            let diff = t_rows[ti][tj] - g_rows[i][j];
            raw += diff * diff;
        }
    }
    Ok(raw)
}

/// Default number of random trees used to estimate the norm constant.
pub const DEFAULT_NORM_SAMPLES: usize = 10_000;

/// Default number of draws in the random baseline.
pub const DEFAULT_BASELINE_N: usize = 1000;

/// Estimates the "most distant tree" normalization constant: the maximum
/// raw distance to `gold` over `samples` random trees, floored at
/// machine epsilon so degenerate cases (a 2-leaf gold in unweighted
/// mode) still normalize cleanly.
///
/// Draw i uses its own substream of `seed`, so the result is
/// independent of thread count.
pub fn estimate_norm_constant(gold: &PhyloTree, mode: Mode, samples: usize, seed: u64) -> f64 {
    assert!(samples >= 1, "need at least one sample");
    let labels: Vec<String> = gold.leaf_labels().iter().map(|l| l.to_string()).collect();
    let max = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::stream(seed, "norm-constant", i);
            let tree = random_tree(&labels, &mut rng);
            dist(&tree, gold, mode).unwrap()
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    max.max(f64::EPSILON)
}

/// Memoizes [`estimate_norm_constant`] per (gold tree, mode, samples,
/// seed). The gold tree is keyed by its Newick serialization.
#[derive(Default)]
pub struct NormCache {
    map: Mutex<HashMap<(String, Mode, usize, u64), f64>>,
}

impl NormCache {
    pub fn new() -> NormCache {
        NormCache::default()
    }

    pub fn norm_constant(&self, gold: &PhyloTree, mode: Mode, samples: usize, seed: u64) -> f64 {
        let key = (to_newick(gold), mode, samples, seed);
        if let Some(&v) = self.map.lock().unwrap().get(&key) {
            return v;
        }
        let v = estimate_norm_constant(gold, mode, samples, seed);
        self.map.lock().unwrap().insert(key, v);
        v
    }
}

/// One scored comparison, ready for JSON serialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDistanceReport {
    pub raw: f64,
    pub normalized: f64,
    pub mode: Mode,
    pub norm_constant: f64,
    pub seed: u64,
}

/// Scores `tau` against `gold`: raw distance plus its normalization by
/// `norm_constant`, capped at 1. `seed` records the seed the constant
/// was estimated with.
pub fn score(
    tau: &PhyloTree,
    gold: &PhyloTree,
    mode: Mode,
    norm_constant: f64,
    seed: u64,
) -> Result<TreeDistanceReport> {
    assert!(norm_constant > 0.0, "norm constant must be positive");
    let raw = dist(tau, gold, mode)?;
    Ok(TreeDistanceReport {
        raw,
        normalized: (raw / norm_constant).min(1.0),
        mode,
        norm_constant,
        seed,
    })
}

/// Mean and sample standard deviation (n - 1 denominator).
pub fn mean_sample_std(xs: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty());
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Draws `n` random trees over the gold leaf set and returns the mean
/// and sample standard deviation of their normalized distances to gold.
pub fn random_baseline(
    gold: &PhyloTree,
    mode: Mode,
    n: usize,
    seed: u64,
    norm_constant: f64,
) -> (f64, f64) {
    assert!(n >= 2, "baseline needs at least 2 draws");
    assert!(norm_constant > 0.0);
    let labels: Vec<String> = gold.leaf_labels().iter().map(|l| l.to_string()).collect();
    let scores: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::stream(seed, "baseline", i);
            let tree = random_tree(&labels, &mut rng);
            (dist(&tree, gold, mode).unwrap() / norm_constant).min(1.0)
        })
        .collect();
    mean_sample_std(&scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phylo::parse_newick;

    fn three_leaf() -> PhyloTree {
        parse_newick("((A:1,B:1):2,C:3);").unwrap()
    }

    fn at(m: &DistanceMatrix, a: &str, b: &str) -> f64 {
        m.get(m.position(a).unwrap(), m.position(b).unwrap())
    }

    #[test]
    fn weighted_path_sums() {
        let d = leaf_pair_distances(&three_leaf(), Mode::Weighted);
        assert_eq!(at(&d, "A", "B"), 2.0);
        assert_eq!(at(&d, "A", "C"), 6.0);
        assert_eq!(at(&d, "B", "C"), 6.0);
    }

    #[test]
    fn unweighted_edge_counts() {
        let d = leaf_pair_distances(&three_leaf(), Mode::Unweighted);
        assert_eq!(at(&d, "A", "B"), 2.0);
        assert_eq!(at(&d, "A", "C"), 3.0);
        assert_eq!(at(&d, "B", "C"), 3.0);
    }

    #[test]
    fn two_leaf_weighted_path() {
        let t = parse_newick("(A:0.25,B:4);").unwrap();
        let d = leaf_pair_distances(&t, Mode::Weighted);
        assert_eq!(at(&d, "A", "B"), 4.25);
    }

    #[test]
    fn self_distance_is_zero() {
        let g = three_leaf();
        assert_eq!(dist(&g, &g, Mode::Weighted).unwrap(), 0.0);
        assert_eq!(dist(&g, &g, Mode::Unweighted).unwrap(), 0.0);
    }

    #[test]
    fn leaf_swap_unweighted_distance_is_two() {
        let gold = parse_newick("((A:1,B:1):1,C:1);").unwrap();
        let tau = parse_newick("((A:1,C:1):1,B:1);").unwrap();
        assert_eq!(dist(&tau, &gold, Mode::Unweighted).unwrap(), 2.0);
    }

    #[test]
    fn mismatched_leaves_are_reported() {
        let gold = parse_newick("((A:1,B:1):1,C:1);").unwrap();
        let tau = parse_newick("((A:1,B:1):1,D:1);").unwrap();
        match dist(&tau, &gold, Mode::Unweighted) {
            Err(Error::LeafSetMismatch {
                only_left,
                only_right,
            }) => {
                assert_eq!(only_left, ["D"]);
                assert_eq!(only_right, ["C"]);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn weighted_mode_is_scale_free() {
        let gold = parse_newick("((A:1,B:1):2,C:3);").unwrap();
        let tau = parse_newick("((A:10,C:10):20,B:30);").unwrap();
        let tau_scaled = parse_newick("((A:1,C:1):2,B:3);").unwrap();
        let a = dist(&tau, &gold, Mode::Weighted).unwrap();
        let b = dist(&tau_scaled, &gold, Mode::Weighted).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(a > 0.0);
    }

    #[test]
    fn norm_constant_of_single_sample() {
        let gold = three_leaf();
        let mut rng = seed::stream(99, "norm-constant", 0);
        let labels: Vec<String> = gold.leaf_labels().iter().map(|l| l.to_string()).collect();
        let tree = random_tree(&labels, &mut rng);
        let expected = dist(&tree, &gold, Mode::Unweighted).unwrap();
        let got = estimate_norm_constant(&gold, Mode::Unweighted, 1, 99);
        assert_eq!(got, expected.max(f64::EPSILON));
    }

    #[test]
    fn norm_constant_floors_degenerate_gold() {
        let gold = parse_newick("(A:1,B:2);").unwrap();
        let c = estimate_norm_constant(&gold, Mode::Unweighted, 50, 3);
        assert_eq!(c, f64::EPSILON);
        let report = score(&gold, &gold, Mode::Unweighted, c, 3).unwrap();
        assert_eq!(report.normalized, 0.0);
    }

    #[test]
    fn cache_returns_stable_values() {
        let gold = three_leaf();
        let cache = NormCache::new();
        let a = cache.norm_constant(&gold, Mode::Unweighted, 25, 7);
        let b = cache.norm_constant(&gold, Mode::Unweighted, 25, 7);
        assert_eq!(a, b);
        assert_eq!(a, estimate_norm_constant(&gold, Mode::Unweighted, 25, 7));
    }

    #[test]
    fn baseline_is_deterministic_and_in_range() {
        let gold = parse_newick("(((A:1,B:1):1,(C:1,D:1):1):1,(E:1,F:1):2);").unwrap();
        let c = estimate_norm_constant(&gold, Mode::Unweighted, 200, 5);
        let (m1, s1) = random_baseline(&gold, Mode::Unweighted, 100, 11, c);
        let (m2, s2) = random_baseline(&gold, Mode::Unweighted, 100, 11, c);
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
        assert!(m1 > 0.0 && m1 <= 1.0);
        assert!(s1 >= 0.0);
    }

    #[test]
    fn ordered_pair_sum_is_twice_unordered() {
        let gold = parse_newick("((A:1,B:1):1,(C:1,D:1):1);").unwrap();
        let tau = parse_newick("((A:1,C:1):1,(B:1,D:1):1);").unwrap();
        let unordered = dist(&tau, &gold, Mode::Unweighted).unwrap();
        let dt = leaf_pair_distances(&tau, Mode::Unweighted);
        let dg = leaf_pair_distances(&gold, Mode::Unweighted);
        let mut ordered = 0.0;
        for a in dg.labels() {
            for b in dg.labels() {
                let x = at(&dt, a, b) - at(&dg, a, b);
                ordered += x * x;
            }
        }
        assert!((ordered - 2.0 * unordered).abs() < 1e-12);
    }

    #[test]
    fn mean_std_hand_case() {
        let (m, s) = mean_sample_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
