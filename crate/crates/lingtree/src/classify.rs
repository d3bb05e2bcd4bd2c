//! Linear support-vector classification trained by sequential minimal
//! optimization, with one-vs-one multiclass reduction, stratified k-fold
//! cross-validation, and confusion-matrix reporting.
//!
//! The solver follows the classic two-loop scheme: an outer loop
//! alternating full sweeps with sweeps over non-bound multipliers, and
//! an inner working-set step that optimizes one pair of multipliers
//! analytically. The kernel is linear only, so the weight vector is
//! maintained incrementally and decision values cost one dot product.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::seed;

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-3;

/// Pair-selection tie-breaks use this fixed stream, making training a
/// pure function of the data.
const SMO_SEED: u64 = 0x51a3_0b6e;

/// Minimum multiplier change worth applying.
const STEP_EPS: f64 = 1e-8;

/// Outer-loop budget; reaching it means the problem is numerically stuck.
const MAX_EPOCHS: usize = 10_000;

/// A trained linear decision function f(x) = weights . x + bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub support_count: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Smo<'a> {
    x: &'a [FeatureVector],
    y: &'a [f64],
    c: f64,
    tol: f64,
    alpha: Vec<f64>,
    w: Vec<f64>,
    b: f64,
}

impl Smo<'_> {
    fn decision(&self, i: usize) -> f64 {
        dot(&self.w, &self.x[i].values) + self.b
    }

    fn error(&self, i: usize) -> f64 {
        self.decision(i) - self.y[i]
    }

    fn kernel(&self, i: usize, j: usize) -> f64 {
        dot(&self.x[i].values, &self.x[j].values)
    }

    fn is_non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.error(i1), self.error(i2));
        let s = y1 * y2;
        let (lo, hi) = if y1 != y2 {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a2 + a1 - self.c).max(0.0), (a2 + a1).min(self.c))
        };
        if lo >= hi {
            return false;
        }
        let k11 = self.kernel(i1, i1);
        let k12 = self.kernel(i1, i2);
        let k22 = self.kernel(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;
        let mut a2_new = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // Degenerate curvature: pick the boundary with the lower
            // objective. With f(x) = w.x + b, the part of the decision
            // value excluding points 1 and 2 is y_i (E_i - b) minus the
            // own-pair kernel terms.
            let f1 = y1 * (e1 - self.b) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 - self.b) - s * a1 * k12 - a2 * k22;
            let l1 = a1 + s * (a2 - lo);
            let h1 = a1 + s * (a2 - hi);
            let obj_lo =
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            let obj_hi =
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if obj_lo < obj_hi - STEP_EPS {
                lo
            } else if obj_lo > obj_hi + STEP_EPS {
                hi
            } else {
                a2
            }
        };
        // Snap to the box to keep bound bookkeeping exact.
        if a2_new < 1e-10 {
            a2_new = 0.0;
        } else if a2_new > self.c - 1e-10 {
            a2_new = self.c;
        }
        if (a2_new - a2).abs() < STEP_EPS * (a2_new + a2 + STEP_EPS) {
            return false;
        }
        let a1_new = a1 + s * (a2 - a2_new);
        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);
        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        self.b = if a1_new > 0.0 && a1_new < self.c {
            b1
        } else if a2_new > 0.0 && a2_new < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        for (w, (v1, v2)) in self
            .w
            .iter_mut()
            .zip(self.x[i1].values.iter().zip(&self.x[i2].values))
        {
            *w += d1 * v1 + d2 * v2;
        }
        self.alpha[i1] = a1_new;
        self.alpha[i2] = a2_new;
        true
    }

    fn examine(&mut self, i2: usize, rng: &mut impl Rng) -> bool {
        let y2 = self.y[i2];
        let a2 = self.alpha[i2];
        let e2 = self.error(i2);
        let r2 = e2 * y2;
        if !((r2 < -self.tol && a2 < self.c) || (r2 > self.tol && a2 > 0.0)) {
            return false;
        }
        let non_bound: Vec<usize> = (0..self.x.len()).filter(|&i| self.is_non_bound(i)).collect();
        if non_bound.len() > 1 {
            // Second-choice heuristic: the point whose error differs most
            // from e2 allows the largest step. Ties keep the lowest index.
            let mut best = non_bound[0];
            let mut best_gap = (self.error(best) - e2).abs();
            for &i in &non_bound[1..] {
                let gap = (self.error(i) - e2).abs();
                if gap > best_gap {
                    best = i;
                    best_gap = gap;
                }
            }
            if self.take_step(best, i2) {
                return true;
            }
        }
        if !non_bound.is_empty() {
            let start = rng.random_range(0..non_bound.len());
            for offset in 0..non_bound.len() {
                let i1 = non_bound[(start + offset) % non_bound.len()];
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        let n = self.x.len();
        let start = rng.random_range(0..n);
        for offset in 0..n {
            let i1 = (start + offset) % n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }
}

/// Trains a soft-margin linear SVM on ±1 labels.
///
/// Terminates when a full sweep finds no multiplier violating the KKT
/// conditions by more than `tol`. Training is deterministic: the only
/// randomness (working-set fallback rotation) runs on a fixed stream.
pub fn train_smo(x: &[FeatureVector], y: &[f64], c: f64, tol: f64) -> Result<BinaryModel> {
    assert_eq!(x.len(), y.len(), "X and y must have equal length");
    assert!(x.len() >= 2, "need at least 2 training points");
    assert!(c > 0.0 && tol > 0.0);
    let dim = x[0].values.len();
    for v in x {
        if v.values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.values.len(),
            });
        }
    }
    for &label in y {
        if label != 1.0 && label != -1.0 {
            return Err(Error::InvalidInput(format!(
                "labels must be +1 or -1, got {label}"
            )));
        }
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(Error::SingleClass);
    }

    let mut smo = Smo {
        x,
        y,
        c,
        tol,
        alpha: vec![0.0; x.len()],
        w: vec![0.0; dim],
        b: 0.0,
    };
    let mut rng = seed::rng(SMO_SEED);
    let mut num_changed = 0usize;
    let mut examine_all = true;
    let mut epochs = 0usize;
    while num_changed > 0 || examine_all {
        epochs += 1;
        if epochs > MAX_EPOCHS {
            return Err(Error::NoConvergence { passes: MAX_EPOCHS });
        }
        num_changed = 0;
        for i in 0..x.len() {
            if examine_all || smo.is_non_bound(i) {
                num_changed += smo.examine(i, &mut rng) as usize;
            }
        }
        if examine_all {
            examine_all = false;
        } else if num_changed == 0 {
            examine_all = true;
        }
    }
    Ok(BinaryModel {
        support_count: smo.alpha.iter().filter(|&&a| a > 0.0).count(),
        weights: smo.w,
        bias: smo.b,
        c,
    })
}

/// Raw decision value weights . x + bias.
pub fn decision_value(model: &BinaryModel, x: &FeatureVector) -> Result<f64> {
    if x.values.len() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            got: x.values.len(),
        });
    }
    Ok(dot(&model.weights, &x.values) + model.bias)
}

/// Predicted class: the sign of the decision value, with sign(0) = +1.
pub fn predict(model: &BinaryModel, x: &FeatureVector) -> Result<f64> {
    let v = decision_value(model, x)?;
    Ok(if v >= 0.0 { 1.0 } else { -1.0 })
}

/// One-vs-one reduction: k(k-1)/2 binary models over an ordered label
/// list, combined by majority vote.
#[derive(Clone, Debug)]
pub struct MulticlassModel {
    labels: Vec<String>,
    /// ((i, j), model) with i < j; the model's +1 class is labels[i].
    models: Vec<((usize, usize), BinaryModel)>,
}

impl MulticlassModel {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

fn sorted_unique_labels(y: &[String]) -> Vec<String> {
    let mut labels: Vec<String> = y.to_vec();
    labels.sort();
    labels.dedup();
    labels
}

/// Trains the one-vs-one ensemble. Class labels are ordered by sorting
/// the distinct values of `y`; at least two classes are required.
pub fn train_multiclass(
    x: &[FeatureVector],
    y: &[String],
    c: f64,
    tol: f64,
) -> Result<MulticlassModel> {
    assert_eq!(x.len(), y.len());
    let labels = sorted_unique_labels(y);
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    let pairs: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|i| ((i + 1)..labels.len()).map(move |j| (i, j)))
        .collect();
    let models: Result<Vec<((usize, usize), BinaryModel)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (v, label) in x.iter().zip(y) {
                if *label == labels[i] {
                    xs.push(v.clone());
                    ys.push(1.0);
                } else if *label == labels[j] {
                    xs.push(v.clone());
                    ys.push(-1.0);
                }
            }
            Ok(((i, j), train_smo(&xs, &ys, c, tol)?))
        })
        .collect();
    Ok(MulticlassModel {
        labels,
        models: models?,
    })
}

/// First index holding the maximal vote count; a tie therefore resolves
/// to the lowest label index.
fn argmax_vote(votes: &[usize]) -> usize {
    let mut best = 0;
    for (i, &v) in votes.iter().enumerate().skip(1) {
        if v > votes[best] {
            best = i;
        }
    }
    best
}

/// Majority vote over all pairwise models.
pub fn predict_multiclass(model: &MulticlassModel, x: &FeatureVector) -> Result<String> {
    let mut votes = vec![0usize; model.labels.len()];
    for ((i, j), binary) in &model.models {
        if predict(binary, x)? > 0.0 {
            votes[*i] += 1;
        } else {
            votes[*j] += 1;
        }
    }
    Ok(model.labels[argmax_vote(&votes)].clone())
}

/// Square count matrix over an ordered label list; rows are actual
/// classes, columns are predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> ConfusionMatrix {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn record(&mut self, actual: &str, predicted: &str) {
        let a = self.index_of(actual);
        let p = self.index_of(predicted);
        self.counts[a][p] += 1;
    }

    fn index_of(&self, label: &str) -> usize {
        self.labels
            .iter()
            .position(|l| l == label)
            .unwrap_or_else(|| panic!("label {label:?} not in confusion matrix"))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.trace() as f64 / total as f64
    }

    /// CSV with a header row of predicted labels and one row per actual
    /// label. The corner cell reads `actual\predicted`.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["actual\\predicted".to_string()];
        header.extend(self.labels.iter().cloned());
        wtr.write_record(&header).unwrap();
        for (label, row) in self.labels.iter().zip(&self.counts) {
            let mut record = vec![label.clone()];
            record.extend(row.iter().map(u64::to_string));
            wtr.write_record(&record).unwrap();
        }
        String::from_utf8(wtr.into_inner().unwrap()).unwrap()
    }
}

/// Sums matrix cells by family blocks: cell (f, g) of the result is the
/// total count of actual-family-f items predicted as family g. Family
/// labels are ordered by sorting the distinct mapped values.
pub fn collapse_families(
    cm: &ConfusionMatrix,
    mapping: &BTreeMap<String, String>,
) -> Result<ConfusionMatrix> {
    for label in &cm.labels {
        if !mapping.contains_key(label) {
            return Err(Error::UnmappedLabel(label.clone()));
        }
    }
    let families = sorted_unique_labels(
        &cm.labels
            .iter()
            .map(|l| mapping[l].clone())
            .collect::<Vec<_>>(),
    );
    let family_index: BTreeMap<&str, usize> = families
        .iter()
        .enumerate()
        .map(|(i, f)| (f.as_str(), i))
        .collect();
    let mut out = ConfusionMatrix::new(families.clone());
    for (i, row) in cm.counts.iter().enumerate() {
        let fi = family_index[mapping[&cm.labels[i]].as_str()];
        for (j, &count) in row.iter().enumerate() {
            let fj = family_index[mapping[&cm.labels[j]].as_str()];
            out.counts[fi][fj] += count;
        }
    }
    Ok(out)
}

fn check_fold_preconditions(y: &[String], k_folds: usize) -> Result<Vec<String>> {
    assert!(k_folds >= 2, "need at least 2 folds");
    let labels = sorted_unique_labels(y);
    for label in &labels {
        let count = y.iter().filter(|l| *l == label).count();
        if count < k_folds {
            return Err(Error::ClassTooSmall {
                label: label.clone(),
                count,
                folds: k_folds,
            });
        }
    }
    Ok(labels)
}

/// Deals each class's (already ordered) indices round-robin into folds
/// after a per-class seeded shuffle.
fn assign_folds(
    class_indices: BTreeMap<String, Vec<usize>>,
    k_folds: usize,
    seed: u64,
    n: usize,
) -> Vec<usize> {
    let mut fold_of = vec![0usize; n];
    for (label, mut indices) in class_indices {
        let mut rng = crate::seed::stream(seed, &format!("cv:{label}"), 0);
        indices.shuffle(&mut rng);
        for (pos, idx) in indices.into_iter().enumerate() {
            fold_of[idx] = pos % k_folds;
        }
    }
    fold_of
}

#[allow(clippy::too_many_arguments)] // internal; mirrors the two CV signatures
fn run_folds<T: Sync, F, G>(
    items: &[T],
    y: &[String],
    labels: Vec<String>,
    fold_of: &[usize],
    order: &[usize],
    k_folds: usize,
    c: f64,
    tol: f64,
    featurize: F,
) -> Result<(f64, ConfusionMatrix)>
where
    F: Fn(&[usize]) -> Result<G> + Sync,
    G: Fn(&T) -> FeatureVector + Sync,
{
    let per_fold: Result<Vec<Vec<(usize, String)>>> = (0..k_folds)
        .into_par_iter()
        .map(|fold| {
            let train_idx: Vec<usize> =
                order.iter().copied().filter(|&i| fold_of[i] != fold).collect();
            let test_idx: Vec<usize> =
                order.iter().copied().filter(|&i| fold_of[i] == fold).collect();
            let extractor = featurize(&train_idx)?;
            let train_x: Vec<FeatureVector> =
                train_idx.iter().map(|&i| extractor(&items[i])).collect();
            let train_y: Vec<String> = train_idx.iter().map(|&i| y[i].clone()).collect();
            let model = train_multiclass(&train_x, &train_y, c, tol)?;
            test_idx
                .into_iter()
                .map(|i| {
                    let predicted = predict_multiclass(&model, &extractor(&items[i]))?;
                    Ok((i, predicted))
                })
                .collect()
        })
        .collect();
    let mut cm = ConfusionMatrix::new(labels);
    for fold in per_fold? {
        for (i, predicted) in fold {
            cm.record(&y[i], &predicted);
        }
    }
    Ok((cm.accuracy(), cm))
}

/// Stratified k-fold cross-validation over pre-extracted vectors.
///
/// Items are put into a canonical order (bytewise comparison of their
/// value patterns, then label) before fold assignment and training, so
/// neither the folds nor the solver's iteration sequence depend on input
/// order. Accuracy is pooled: the trace of the summed confusion matrix
/// over its total.
pub fn cross_validate(
    x: &[FeatureVector],
    y: &[String],
    k_folds: usize,
    c: f64,
    tol: f64,
    seed: u64,
) -> Result<(f64, ConfusionMatrix)> {
    assert_eq!(x.len(), y.len());
    let labels = check_fold_preconditions(y, k_folds)?;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = x[a]
            .values
            .iter()
            .zip(&x[b].values)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal);
        cmp.then_with(|| y[a].cmp(&y[b])).then(a.cmp(&b))
    });
    let mut class_indices: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for &i in &order {
        class_indices.entry(y[i].clone()).or_default().push(i);
    }
    let fold_of = assign_folds(class_indices, k_folds, seed, x.len());
    run_folds(x, y, labels, &fold_of, &order, k_folds, c, tol, |_train: &[usize]| {
        Ok(|v: &FeatureVector| v.clone())
    })
}

/// Cross-validation with per-fold featurization for leakage safety.
///
/// `featurize` receives the training indices of a fold and returns the
/// extractor applied to both training and held-out items, so anything
/// fitted to data (trigram vocabularies, scalers) sees training folds
/// only. Folds stratify over the input order of each class.
pub fn cross_validate_with<T, F, G>(
    items: &[T],
    y: &[String],
    k_folds: usize,
    c: f64,
    tol: f64,
    seed: u64,
    featurize: F,
) -> Result<(f64, ConfusionMatrix)>
where
    T: Sync,
    F: Fn(&[usize]) -> Result<G> + Sync,
    G: Fn(&T) -> FeatureVector + Sync,
{
    assert_eq!(items.len(), y.len());
    let labels = check_fold_preconditions(y, k_folds)?;
    let mut class_indices: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, label) in y.iter().enumerate() {
        class_indices.entry(label.clone()).or_default().push(i);
    }
    let fold_of = assign_folds(class_indices, k_folds, seed, items.len());
    let order: Vec<usize> = (0..items.len()).collect();
    run_folds(items, y, labels, &fold_of, &order, k_folds, c, tol, featurize)
}
