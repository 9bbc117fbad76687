//! Cross-validation and holdout evaluation of any detection method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::ConfusionMatrix;
use super::report::{Averaging, EvalReport, FoldRecord};
use super::sampling::repeated_stratified_kfold;
use crate::classifiers::{grid_search, ClassifierSpec, GridResult, HyperGrid, Prediction, SelectionMetric, TrainedModel};
use crate::corpus::{LabeledDataset, Review};
use crate::error::{Error, Result};
use crate::features::{tokenize, TokenStream};
use crate::rule_based::{classify_rule_based, rule_score};
use crate::seed::derive_seed;

/// Something that can be fitted on a training fold and then label reviews.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    RuleBased,
    Classifier {
        spec: ClassifierSpec,
    },
    /// Picks a spec by inner cross-validation on the training fold, then
    /// refits it on the whole training fold.
    GridSearch {
        grid: HyperGrid,
        inner_folds: usize,
        metric: SelectionMetric,
    },
    /// Echoes the gold label. Useful only as a harness check.
    GoldEcho,
    Constant {
        label: bool,
    },
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::RuleBased => "rule_based".into(),
            Method::Classifier { spec } => format!("{}/{}", spec.algorithm, spec.embedding),
            Method::GridSearch { grid, .. } => format!("grid:{}", grid.algorithm),
            Method::GoldEcho => "gold_echo".into(),
            Method::Constant { label } => format!("constant_{}", u8::from(*label)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum FittedMethod {
    RuleBased,
    Model {
        model: Box<TrainedModel>,
        selection: Option<Box<GridResult>>,
    },
    GoldEcho,
    Constant(bool),
}

impl FittedMethod {
    pub fn predict(&self, review: &Review) -> Prediction {
        match self {
            FittedMethod::RuleBased => {
                let p = classify_rule_based(&review.text);
                Prediction {
                    label: p.explanation_need,
                    score: rule_score(&p),
                }
            }
            FittedMethod::Model { model, .. } => model.predict_text(&review.text),
            FittedMethod::GoldEcho => Prediction {
                label: review.explanation_need,
                score: f64::from(u8::from(review.explanation_need)),
            },
            FittedMethod::Constant(label) => Prediction {
                label: *label,
                score: f64::from(u8::from(*label)),
            },
        }
    }

    pub fn model(&self) -> Option<&TrainedModel> {
        match self {
            FittedMethod::Model { model, .. } => Some(model),
            _ => None,
        }
    }

    fn converged(&self) -> bool {
        self.model().is_none_or(|m| m.learned().converged())
    }
}

/// Fits `method` on the reviews at `train`. The vocabulary, when there is
/// one, sees only those reviews.
pub fn fit_fold(method: &Method, ds: &LabeledDataset, train: &[usize], seed: u64) -> Result<FittedMethod> {
    let tokens = || -> (Vec<TokenStream>, Vec<bool>) {
        train
            .iter()
            .map(|&i| {
                let r = &ds.reviews()[i];
                (tokenize(&r.text), r.explanation_need)
            })
            .unzip()
    };
    Ok(match method {
        Method::RuleBased => FittedMethod::RuleBased,
        Method::GoldEcho => FittedMethod::GoldEcho,
        Method::Constant { label } => FittedMethod::Constant(*label),
        Method::Classifier { spec } => {
            let (docs, y) = tokens();
            FittedMethod::Model {
                model: Box::new(TrainedModel::fit_tokens(spec, &docs, &y, seed)?),
                selection: None,
            }
        }
        Method::GridSearch {
            grid,
            inner_folds,
            metric,
        } => {
            let (docs, y) = tokens();
            let selection = grid_search(grid, &docs, &y, *inner_folds, *metric, derive_seed(seed, 1))?;
            let model = TrainedModel::fit_tokens(&selection.best, &docs, &y, seed)?;
            FittedMethod::Model {
                model: Box::new(model),
                selection: Some(Box::new(selection)),
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub k: usize,
    pub repeats: usize,
    pub beta: f64,
    pub seed: u64,
    pub averaging: Averaging,
}

/// Repeated stratified k-fold cross-validation. Folds run in parallel and
/// are reported in (repeat, fold) order. A failing fold aborts the run with
/// its provenance attached.
pub fn cross_validate(method: &Method, ds: &LabeledDataset, opts: &CvOptions) -> Result<EvalReport> {
    let plans = repeated_stratified_kfold(ds, opts.k, opts.repeats, opts.seed)?;
    let records: Vec<Result<FoldRecord>> = plans
        .par_iter()
        .map(|plan| {
            let fold_seed = derive_seed(plan.seed, plan.fold as u64);
            let wrap = |e: Error| Error::Fold {
                repeat: plan.repeat,
                fold: plan.fold,
                source: Box::new(e),
            };
            let fitted = fit_fold(method, ds, &plan.train, fold_seed).map_err(wrap)?;
            let confusion = ConfusionMatrix::from_pairs(plan.test.iter().map(|&i| {
                let r = &ds.reviews()[i];
                (r.explanation_need, fitted.predict(r).label)
            }));
            let positive = confusion.positive(opts.beta);
            let negative = confusion.negative(opts.beta);
            let selected = match &fitted {
                FittedMethod::Model {
                    selection: Some(s), ..
                } => Some(s.best.clone()),
                _ => None,
            };
            Ok(FoldRecord {
                repeat: plan.repeat,
                fold: plan.fold,
                seed: fold_seed,
                confusion,
                positive,
                negative,
                macro_f_beta: (positive.f_beta + negative.f_beta) / 2.0,
                converged: fitted.converged(),
                selected,
            })
        })
        .collect();
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_folds(
        ds.name(),
        &method.name(),
        records,
        opts.beta,
        opts.averaging,
    ))
}

/// Labels every review of `ds`.
pub fn predict_dataset(fitted: &FittedMethod, ds: &LabeledDataset) -> Vec<Prediction> {
    ds.reviews().par_iter().map(|r| fitted.predict(r)).collect()
}

/// One report per app (in order of first appearance) when `group_by_app`,
/// followed by a `Total` report over everything.
pub fn evaluate_labels(
    ds: &LabeledDataset,
    predicted: &[bool],
    method: &str,
    beta: f64,
    group_by_app: bool,
) -> Result<Vec<EvalReport>> {
    if predicted.len() != ds.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} reviews",
            predicted.len(),
            ds.len()
        )));
    }
    let mut reports = Vec::new();
    if group_by_app {
        for app in ds.apps() {
            let cm = ConfusionMatrix::from_pairs(
                ds.reviews()
                    .iter()
                    .zip(predicted)
                    .filter(|(r, _)| r.app_name == app)
                    .map(|(r, &p)| (r.explanation_need, p)),
            );
            reports.push(EvalReport::from_confusion(&app, method, cm, beta));
        }
    }
    let total = ConfusionMatrix::from_pairs(ds.reviews().iter().zip(predicted).map(|(r, &p)| (r.explanation_need, p)));
    reports.push(EvalReport::from_confusion("Total", method, total, beta));
    Ok(reports)
}

/// Scores a fitted method on unseen reviews without any resampling.
pub fn evaluate_holdout(
    fitted: &FittedMethod,
    method: &str,
    test: &LabeledDataset,
    beta: f64,
    group_by_app: bool,
) -> Result<Vec<EvalReport>> {
    let predicted: Vec<bool> = predict_dataset(fitted, test).iter().map(|p| p.label).collect();
    evaluate_labels(test, &predicted, method, beta, group_by_app)
}
