//! Random undersampling and stratified k-fold planning.

use rand::seq::{index, SliceRandom};
use serde::Serialize;

use crate::corpus::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng};

/// Drops majority-class reviews uniformly at random until both classes have
/// the same size. Minority reviews are all kept and survivors retain their
/// original relative order.
pub fn undersample(ds: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    let (pos, neg): (Vec<usize>, Vec<usize>) =
        (0..ds.len()).partition(|&i| ds.reviews()[i].explanation_need);
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid(format!(
            "undersampling needs both classes ({} positive, {} negative)",
            pos.len(),
            neg.len()
        )));
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut keep = minority;
    if majority.len() == keep.len() {
        keep.extend(majority);
    } else {
        let mut r = rng(seed);
        let chosen = index::sample(&mut r, majority.len(), keep.len());
        keep.extend(chosen.iter().map(|i| majority[i]));
    }
    keep.sort_unstable();
    Ok(ds.subset(ds.name(), &keep))
}

/// One train/test split of a repeated cross-validation run. Indices refer to
/// positions in the dataset the plan was made for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPlan {
    pub repeat: usize,
    pub fold: usize,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl FoldPlan {
    pub fn train_ids<'a>(&self, ds: &'a LabeledDataset) -> Vec<&'a str> {
        self.train.iter().map(|&i| ds.reviews()[i].review_id.as_str()).collect()
    }

    pub fn test_ids<'a>(&self, ds: &'a LabeledDataset) -> Vec<&'a str> {
        self.test.iter().map(|&i| ds.reviews()[i].review_id.as_str()).collect()
    }
}

/// Splits `ds` into `k` stratified folds.
///
/// Each class is shuffled with `seed`; positives then negatives are dealt
/// round-robin over the folds, so every fold's per-class count is within one
/// of perfect stratification and fold sizes differ by at most one.
///
/// Every class needs at least `k` members, except for leave-one-out
/// (`k == ds.len()`).
pub fn stratified_kfold(ds: &LabeledDataset, k: usize, seed: u64) -> Result<Vec<FoldPlan>> {
    stratified_kfold_labels(&labels_of(ds), k, seed, 0)
}

pub(crate) fn labels_of(ds: &LabeledDataset) -> Vec<bool> {
    ds.reviews().iter().map(|r| r.explanation_need).collect()
}

pub(crate) fn stratified_kfold_labels(
    labels: &[bool],
    k: usize,
    seed: u64,
    repeat: usize,
) -> Result<Vec<FoldPlan>> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    let n = labels.len();
    if k > n {
        return Err(Error::invalid(format!("{k} folds requested for {n} reviews")));
    }
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| labels[i]);
    if k != n {
        for (class, members) in [("positive", pos.len()), ("negative", neg.len())] {
            if members < k {
                return Err(Error::ClassTooSmall {
                    class,
                    members,
                    folds: k,
                });
            }
        }
    }
    let mut r = rng(seed);
    pos.shuffle(&mut r);
    neg.shuffle(&mut r);

    let mut fold_of = vec![0usize; n];
    for (slot, &i) in pos.iter().chain(neg.iter()).enumerate() {
        fold_of[i] = slot % k;
    }
    Ok((0..k)
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == fold);
            FoldPlan {
                repeat,
                fold,
                seed,
                train,
                test,
            }
        })
        .collect())
}

/// Fold plans for `repeats` independent repetitions; repeat `r` shuffles
/// with a seed derived from `(seed, r)`.
pub fn repeated_stratified_kfold(
    ds: &LabeledDataset,
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<FoldPlan>> {
    let labels = labels_of(ds);
    let mut plans = Vec::with_capacity(k * repeats);
    for r in 0..repeats {
        plans.extend(stratified_kfold_labels(&labels, k, derive_seed(seed, r as u64), r)?);
    }
    Ok(plans)
}
