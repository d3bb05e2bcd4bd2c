//! Phylogenetic trees: representation, Newick I/O, gold-tree projection,
//! Ward clustering, and random baselines.
//!
//! Trees are rooted and strictly binary. Nodes live in an arena `Vec`;
//! every node stores the length of the edge to its parent (0 for the
//! root). Internal nodes built by clustering also record their merge
//! height, which later drives dendrogram cuts and rendering.

mod newick;
mod ward;

pub use newick::{parse_newick, parse_newick_with, to_newick, NonBinaryPolicy};
pub use ward::ward_cluster;

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Index of a node in the tree arena.
pub type NodeId = usize;

#[derive(Clone, Debug)]
enum NodeKind {
    Leaf { label: String },
    Internal { children: [NodeId; 2] },
}

#[derive(Clone, Debug)]
struct Node {
    parent: Option<NodeId>,
    kind: NodeKind,
    /// Length of the edge to the parent; meaningless for the root.
    edge: f64,
    /// Merge height, set by clustering.
    height: Option<f64>,
}

/// A rooted binary tree with labeled leaves and non-negative edge lengths.
#[derive(Clone, Debug)]
pub struct PhyloTree {
    nodes: Vec<Node>,
    root: NodeId,
}

impl PhyloTree {
    /// A single-leaf tree.
    pub fn leaf(label: impl Into<String>) -> PhyloTree {
        PhyloTree {
            nodes: vec![Node {
                parent: None,
                kind: NodeKind::Leaf {
                    label: label.into(),
                },
                edge: 0.0,
                height: None,
            }],
            root: 0,
        }
    }

    /// Joins two trees under a fresh root with the given child edges.
    pub fn join(a: PhyloTree, edge_a: f64, b: PhyloTree, edge_b: f64) -> PhyloTree {
        Self::join_impl(a, edge_a, b, edge_b, None)
    }

    /// Like [`PhyloTree::join`], recording the merge height on the new root.
    pub fn join_with_height(
        a: PhyloTree,
        edge_a: f64,
        b: PhyloTree,
        edge_b: f64,
        height: f64,
    ) -> PhyloTree {
        Self::join_impl(a, edge_a, b, edge_b, Some(height))
    }

    fn join_impl(
        mut a: PhyloTree,
        edge_a: f64,
        b: PhyloTree,
        edge_b: f64,
        height: Option<f64>,
    ) -> PhyloTree {
        assert!(
            edge_a >= 0.0 && edge_b >= 0.0,
            "edge lengths must be non-negative"
        );
        let offset = a.nodes.len();
        let a_root = a.root;
        let b_root = b.root + offset;
        a.nodes.extend(b.nodes.into_iter().map(|mut n| {
            n.parent = n.parent.map(|p| p + offset);
            if let NodeKind::Internal { children } = &mut n.kind {
                children[0] += offset;
                children[1] += offset;
            }
            n
        }));
        let root = a.nodes.len();
        a.nodes[a_root].parent = Some(root);
        a.nodes[a_root].edge = edge_a;
        a.nodes[b_root].parent = Some(root);
        a.nodes[b_root].edge = edge_b;
        a.nodes.push(Node {
            parent: None,
            kind: NodeKind::Internal {
                children: [a_root, b_root],
            },
            edge: 0.0,
            height,
        });
        a.root = root;
        a
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.nodes[id].kind, NodeKind::Leaf { .. })
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        match &self.nodes[id].kind {
            NodeKind::Leaf { label } => Some(label),
            NodeKind::Internal { .. } => None,
        }
    }

    pub fn children(&self, id: NodeId) -> Option<[NodeId; 2]> {
        match self.nodes[id].kind {
            NodeKind::Internal { children } => Some(children),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Length of the edge from `id` up to its parent.
    pub fn edge(&self, id: NodeId) -> f64 {
        self.nodes[id].edge
    }

    pub fn height(&self, id: NodeId) -> Option<f64> {
        self.nodes[id].height
    }

    /// Leaf ids in left-to-right tree order.
    pub fn leaves(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match self.nodes[id].kind {
                NodeKind::Leaf { .. } => out.push(id),
                NodeKind::Internal { children } => {
                    stack.push(children[1]);
                    stack.push(children[0]);
                }
            }
        }
        out
    }

    pub fn leaf_labels(&self) -> Vec<&str> {
        self.leaves()
            .into_iter()
            .map(|id| self.label(id).unwrap())
            .collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.len().div_ceil(2)
    }

    /// All node ids, children before parents.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded || self.is_leaf(id) {
                out.push(id);
            } else if let Some([l, r]) = self.children(id) {
                stack.push((id, true));
                stack.push((r, false));
                stack.push((l, false));
            }
        }
        out
    }

    /// Structural equality with child order significant and edge lengths
    /// compared within `tol`.
    pub fn approx_eq(&self, other: &PhyloTree, tol: f64) -> bool {
        fn eq(a: &PhyloTree, ai: NodeId, b: &PhyloTree, bi: NodeId, tol: f64, root: bool) -> bool {
            if !root && (a.edge(ai) - b.edge(bi)).abs() > tol {
                return false;
            }
            match (a.children(ai), b.children(bi)) {
                (None, None) => a.label(ai) == b.label(bi),
                (Some([al, ar]), Some([bl, br])) => {
                    eq(a, al, b, bl, tol, false) && eq(a, ar, b, br, tol, false)
                }
                _ => false,
            }
        }
        eq(self, self.root, other, other.root, tol, true)
    }

    /// Splits the dendrogram into `k` clusters of leaf labels.
    ///
    /// Repeatedly splits the frontier node with the greatest merge height
    /// (ties by smaller node id), which on monotone clustering output
    /// undoes the last `k - 1` merges. Returns clusters with sorted
    /// members, ordered by first member. Requires clustering output:
    /// every internal node must carry a merge height.
    pub fn cut(&self, k: usize) -> Result<Vec<Vec<String>>> {
        let n_leaves = self.leaf_count();
        if k < 1 || k > n_leaves {
            return Err(Error::InvalidInput(format!(
                "cannot cut a {n_leaves}-leaf tree into {k} clusters"
            )));
        }
        let mut frontier = vec![self.root];
        while frontier.len() < k {
            let split = frontier
                .iter()
                .copied()
                .filter(|&id| !self.is_leaf(id))
                .min_by(|&a, &b| {
                    let ha = self.height(a).unwrap_or(0.0);
                    let hb = self.height(b).unwrap_or(0.0);
                    hb.partial_cmp(&ha).unwrap().then(a.cmp(&b))
                });
            let Some(split) = split else {
                // Unreachable while k <= leaf count.
                break;
            };
            if self.height(split).is_none() {
                return Err(Error::NoMergeHeights);
            }
            frontier.retain(|&id| id != split);
            frontier.extend(self.children(split).unwrap());
        }
        let mut clusters: Vec<Vec<String>> = frontier
            .into_iter()
            .map(|id| {
                let mut labels: Vec<String> = self
                    .leaves_under(id)
                    .into_iter()
                    .map(|l| self.label(l).unwrap().to_string())
                    .collect();
                labels.sort();
                labels
            })
            .collect();
        clusters.sort();
        Ok(clusters)
    }

    fn leaves_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            match self.nodes[id].kind {
                NodeKind::Leaf { .. } => out.push(id),
                NodeKind::Internal { children } => {
                    stack.push(children[1]);
                    stack.push(children[0]);
                }
            }
        }
        out
    }
}

/// Symmetric non-negative distance matrix over an ordered label list.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates and wraps a full square matrix.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<DistanceMatrix> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::InvalidInput(
                "distance matrix needs at least 2 labels".to_string(),
            ));
        }
        let mut seen = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate label {label:?} in distance matrix"
                )));
            }
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "distance matrix must be {n}x{n}"
            )));
        }
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "nonzero diagonal at index {i}"
                )));
            }
            for j in 0..n {
                let v = rows[i][j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "invalid distance {v} at ({i},{j})"
                    )));
                }
                if rows[j][i] != v {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric distances at ({i},{j})"
                    )));
                }
                d[i * n + j] = v;
            }
        }
        Ok(DistanceMatrix { labels, d })
    }

    /// Builds a symmetric matrix by calling `f(i, j)` once per pair i < j.
    #[allow(clippy::needless_range_loop)] // mirrored writes need both indices
    pub fn from_fn(
        labels: Vec<String>,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<DistanceMatrix> {
        let n = labels.len();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        DistanceMatrix::new(labels, rows)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.labels.len() + j]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Pairwise L2 distances between feature vectors, labeled by the vectors'
/// labels. All vectors must share one spec and carry distinct labels.
pub fn euclidean_distances(vectors: &[FeatureVector]) -> Result<DistanceMatrix> {
    assert!(vectors.len() >= 2, "need at least 2 vectors");
    let spec = &vectors[0].spec;
    for v in &vectors[1..] {
        if !std::sync::Arc::ptr_eq(&v.spec, spec) && v.spec != *spec {
            return Err(Error::SpecMismatch(format!(
                "cannot mix {} with {}",
                v.spec.name(),
                spec.name()
            )));
        }
    }
    let labels: Vec<String> = vectors.iter().map(|v| v.label.clone()).collect();
    DistanceMatrix::from_fn(labels, |i, j| {
        vectors[i]
            .values
            .iter()
            .zip(&vectors[j].values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

/// Removes all leaves outside `keep`, suppressing the resulting
/// degree-2 nodes by summing their two incident edge lengths. Pairwise
/// path lengths among kept leaves are preserved exactly.
pub fn project_gold(gold: &PhyloTree, keep: &[String]) -> Result<PhyloTree> {
    let keep_set: BTreeSet<&str> = keep.iter().map(String::as_str).collect();
    if keep_set.len() < 2 {
        return Err(Error::InvalidInput(
            "projection needs at least 2 distinct labels".to_string(),
        ));
    }
    let leaf_set: BTreeSet<&str> = gold.leaf_labels().into_iter().collect();
    for label in &keep_set {
        if !leaf_set.contains(label) {
            return Err(Error::UnknownLabel(label.to_string()));
        }
    }

    fn prune(tree: &PhyloTree, id: NodeId, keep: &BTreeSet<&str>) -> Option<(PhyloTree, f64)> {
        match tree.children(id) {
            None => {
                let label = tree.label(id).unwrap();
                keep.contains(label)
                    .then(|| (PhyloTree::leaf(label), tree.edge(id)))
            }
            Some([l, r]) => match (prune(tree, l, keep), prune(tree, r, keep)) {
                (Some((lt, le)), Some((rt, re))) => {
                    Some((PhyloTree::join(lt, le, rt, re), tree.edge(id)))
                }
                (Some((t, e)), None) | (None, Some((t, e))) => Some((t, e + tree.edge(id))),
                (None, None) => None,
            },
        }
    }

    // keep_set is non-empty and contained in the leaf set, so the root survives.
    let (tree, _stem) = prune(gold, gold.root(), &keep_set).unwrap();
    Ok(tree)
}

/// Clusters a fresh symmetric U(0,1) matrix over the given labels.
///
/// The baseline protocol: fill a random distance matrix, run Ward, keep
/// the tree. Entries are drawn row-major for i < j, so the result is a
/// pure function of the RNG state.
pub fn random_tree<R: Rng + ?Sized>(labels: &[String], rng: &mut R) -> PhyloTree {
    assert!(labels.len() >= 2, "need at least 2 labels");
    let m = DistanceMatrix::from_fn(labels.to_vec(), |_, _| rng.random()).unwrap();
    ward_cluster(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn join_builds_cherry() {
        let t = PhyloTree::join(PhyloTree::leaf("A"), 1.0, PhyloTree::leaf("B"), 2.0);
        assert_eq!(t.leaf_labels(), ["A", "B"]);
        let [l, r] = t.children(t.root()).unwrap();
        assert_eq!(t.edge(l), 1.0);
        assert_eq!(t.edge(r), 2.0);
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn project_identity_when_keeping_all() {
        let gold = parse_newick("((A:1,B:1):2,C:3);").unwrap();
        let kept = project_gold(
            &gold,
            &["A".to_string(), "B".to_string(), "C".to_string()],
        )
        .unwrap();
        assert!(kept.approx_eq(&gold, 0.0));
    }

    #[test]
    fn project_sums_suppressed_edges() {
        let gold = parse_newick("((A:1,B:1):2,C:3);").unwrap();
        let kept = project_gold(&gold, &["A".to_string(), "C".to_string()]).unwrap();
        // A keeps its 1 plus the suppressed 2; C keeps its 3. Path = 6.
        let expected = parse_newick("(A:3,C:3);").unwrap();
        assert!(kept.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn project_rejects_bad_input() {
        let gold = parse_newick("((A:1,B:1):2,C:3);").unwrap();
        assert!(matches!(
            project_gold(&gold, &["A".to_string(), "Z".to_string()]),
            Err(Error::UnknownLabel(_))
        ));
        assert!(project_gold(&gold, &["A".to_string()]).is_err());
        assert!(project_gold(&gold, &["A".to_string(), "A".to_string()]).is_err());
    }

    #[test]
    fn euclidean_hand_cases() {
        use crate::features::{FeatureSpec, FeatureVector, Lexicon};
        use std::sync::Arc;
        let spec = Arc::new(FeatureSpec::function_words(Lexicon::parse("a\nb\n")));
        let mk = |label: &str, values: Vec<f64>| FeatureVector {
            spec: Arc::clone(&spec),
            values,
            label: label.to_string(),
        };
        let m = euclidean_distances(&[
            mk("p", vec![0.0, 0.0]),
            mk("q", vec![3.0, 4.0]),
            mk("r", vec![0.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(1, 0), 5.0);
    }

    #[test]
    fn matrix_validation() {
        let bad = DistanceMatrix::new(
            vec!["a".to_string(), "b".to_string()],
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
        );
        assert!(bad.is_err());
        let neg = DistanceMatrix::new(
            vec!["a".to_string(), "b".to_string()],
            vec![vec![0.0, -1.0], vec![-1.0, 0.0]],
        );
        assert!(neg.is_err());
        let dup = DistanceMatrix::new(
            vec!["a".to_string(), "a".to_string()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn random_tree_is_deterministic() {
        let labels: Vec<String> = (0..6).map(|i| format!("L{i}")).collect();
        let a = random_tree(&labels, &mut seed::rng(11));
        let b = random_tree(&labels, &mut seed::rng(11));
        assert!(a.approx_eq(&b, 0.0));
        let c = random_tree(&labels, &mut seed::rng(12));
        assert!(!a.approx_eq(&c, 0.0) || to_newick(&a) == to_newick(&c));
    }

    #[test]
    fn two_label_random_tree_is_forced() {
        let labels = vec!["x".to_string(), "y".to_string()];
        let t = random_tree(&labels, &mut seed::rng(0));
        assert_eq!(t.leaf_count(), 2);
        let mut sorted = t.leaf_labels();
        sorted.sort();
        assert_eq!(sorted, ["x", "y"]);
    }

    #[test]
    fn cut_recovers_merge_structure() {
        // Heights force ((A,B),(C,D)) with the top merge last.
        let ab = PhyloTree::join_with_height(PhyloTree::leaf("A"), 1.0, PhyloTree::leaf("B"), 1.0, 1.0);
        let cd = PhyloTree::join_with_height(PhyloTree::leaf("C"), 2.0, PhyloTree::leaf("D"), 2.0, 2.0);
        let t = PhyloTree::join_with_height(ab, 4.0, cd, 3.0, 5.0);
        assert_eq!(t.cut(1).unwrap(), vec![vec!["A", "B", "C", "D"]]);
        assert_eq!(t.cut(2).unwrap(), vec![vec!["A", "B"], vec!["C", "D"]]);
        assert_eq!(
            t.cut(3).unwrap(),
            vec![vec!["A", "B"], vec!["C"], vec!["D"]]
        );
        assert_eq!(
            t.cut(4).unwrap(),
            vec![vec!["A"], vec!["B"], vec!["C"], vec!["D"]]
        );
        assert!(t.cut(0).is_err());
        assert!(t.cut(5).is_err());
    }

    #[test]
    fn cut_requires_heights() {
        let t = parse_newick("((A:1,B:1):1,C:2);").unwrap();
        assert!(matches!(t.cut(2), Err(Error::NoMergeHeights)));
        // k = 1 never splits, so it works even without heights.
        assert_eq!(t.cut(1).unwrap().len(), 1);
    }

    #[test]
    fn postorder_visits_children_first() {
        let t = parse_newick("((A:1,B:1):1,C:2);").unwrap();
        let order = t.postorder();
        assert_eq!(order.len(), 5);
        assert_eq!(*order.last().unwrap(), t.root());
        for (pos, &id) in order.iter().enumerate() {
            if let Some([l, r]) = t.children(id) {
                assert!(order.iter().position(|&x| x == l).unwrap() < pos);
                assert!(order.iter().position(|&x| x == r).unwrap() < pos);
            }
        }
    }
}
