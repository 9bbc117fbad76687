//! Exhaustive hyperparameter search by stratified cross-validation.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Algorithm, ClassifierSpec, Embedding, HyperValue, TrainedModel};
use crate::error::{Error, Result};
use crate::evaluation::metrics::ConfusionMatrix;
use crate::evaluation::sampling::stratified_kfold_labels;
use crate::features::TokenStream;
use crate::seed::derive_seed;

/// Candidate values per hyperparameter. Points are enumerated embedding by
/// embedding in declared order; within an embedding, keys vary like an
/// odometer in sorted key order with the last key changing fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub params: BTreeMap<String, Vec<HyperValue>>,
    pub embeddings: Vec<Embedding>,
}

impl HyperGrid {
    pub fn new(algorithm: Algorithm, embeddings: Vec<Embedding>) -> Self {
        HyperGrid {
            algorithm,
            params: BTreeMap::new(),
            embeddings,
        }
    }

    pub fn with(mut self, key: &str, values: Vec<HyperValue>) -> Self {
        self.params.insert(key.to_string(), values);
        self
    }

    pub fn points(&self) -> Result<Vec<ClassifierSpec>> {
        if self.embeddings.is_empty() {
            return Err(Error::invalid("grid lists no embeddings"));
        }
        if let Some((k, _)) = self.params.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::invalid(format!("grid key \"{k}\" has no candidate values")));
        }
        let total: usize = self.params.values().map(Vec::len).product();
        let mut out = Vec::with_capacity(total * self.embeddings.len());
        for &embedding in &self.embeddings {
            for n in 0..total {
                let mut spec = ClassifierSpec::new(self.algorithm, embedding);
                let mut rest = n;
                for (key, values) in self.params.iter().rev() {
                    spec.hyperparameters
                        .insert(key.clone(), values[rest % values.len()].clone());
                    rest /= values.len();
                }
                out.push(spec);
            }
        }
        Ok(out)
    }
}

/// Validation metric maximized by [`grid_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum SelectionMetric {
    MacroFBeta { beta: f64 },
    PositiveFBeta { beta: f64 },
    Accuracy,
}

impl SelectionMetric {
    pub fn evaluate(&self, m: &ConfusionMatrix) -> f64 {
        match *self {
            SelectionMetric::MacroFBeta { beta } => (m.positive(beta).f_beta + m.negative(beta).f_beta) / 2.0,
            SelectionMetric::PositiveFBeta { beta } => m.positive(beta).f_beta,
            SelectionMetric::Accuracy => {
                if m.total() == 0 {
                    0.0
                } else {
                    (m.tp + m.tn) as f64 / m.total() as f64
                }
            }
        }
    }
}

impl fmt::Display for SelectionMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionMetric::MacroFBeta { beta } => write!(f, "macro_f_beta(beta={beta})"),
            SelectionMetric::PositiveFBeta { beta } => write!(f, "positive_f_beta(beta={beta})"),
            SelectionMetric::Accuracy => f.write_str("accuracy"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub spec: ClassifierSpec,
    /// Mean validation metric, or `None` if the point failed to fit.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: ClassifierSpec,
    pub best_score: f64,
    pub metric: SelectionMetric,
    pub points: Vec<GridPoint>,
}

fn fold_score(
    spec: &ClassifierSpec,
    docs: &[TokenStream],
    y: &[bool],
    train: &[usize],
    test: &[usize],
    metric: SelectionMetric,
    seed: u64,
) -> Result<f64> {
    let train_docs: Vec<TokenStream> = train.iter().map(|&i| docs[i].clone()).collect();
    let train_y: Vec<bool> = train.iter().map(|&i| y[i]).collect();
    let model = TrainedModel::fit_tokens(spec, &train_docs, &train_y, seed)?;
    let cm = ConfusionMatrix::from_pairs(test.iter().map(|&i| (y[i], model.predict_tokens(&docs[i]).label)));
    Ok(metric.evaluate(&cm))
}

/// Returns the grid point with the highest mean validation metric over
/// `folds` stratified folds. Ties go to the earliest point. Points whose
/// hyperparameters are invalid or whose fit fails on any fold are skipped
/// with a warning.
pub fn grid_search(
    grid: &HyperGrid,
    docs: &[TokenStream],
    y: &[bool],
    folds: usize,
    metric: SelectionMetric,
    seed: u64,
) -> Result<GridResult> {
    if docs.len() != y.len() {
        return Err(Error::invalid(format!("{} documents but {} labels", docs.len(), y.len())));
    }
    let points = grid.points()?;
    let plans = stratified_kfold_labels(y, folds, seed, 0)?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..plans.len()).map(move |f| (p, f)))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(p, f)| {
            let plan = &plans[f];
            fold_score(
                &points[p],
                docs,
                y,
                &plan.train,
                &plan.test,
                metric,
                derive_seed(seed, f as u64),
            )
        })
        .collect();

    let mut scored = Vec::with_capacity(points.len());
    let mut best: Option<(usize, f64)> = None;
    for (p, spec) in points.into_iter().enumerate() {
        let per_fold = &results[p * plans.len()..(p + 1) * plans.len()];
        let score = match per_fold.iter().find_map(|r| r.as_ref().err()) {
            Some(e) => {
                log::warn!("grid point {spec} disqualified: {e}");
                None
            }
            None => {
                let s = per_fold.iter().map(|r| *r.as_ref().unwrap()).sum::<f64>() / plans.len() as f64;
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((p, s));
                }
                Some(s)
            }
        };
        scored.push(GridPoint { spec, score });
    }
    let (idx, best_score) = best.ok_or_else(|| Error::invalid("every grid point failed to fit"))?;
    Ok(GridResult {
        best: scored[idx].spec.clone(),
        best_score,
        metric,
        points: scored,
    })
}
