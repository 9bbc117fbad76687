//! SAMME boosting over depth-1 decision trees.
//!
//! With two classes the estimator weight is `lr · ln((1 − ε)/ε)` and the
//! ensemble decides by the sign of `Σ α_m h_m(x)`, `h_m ∈ {−1, +1}`.

use serde::{Deserialize, Serialize};

use super::params::{HyperMap, ParamReader};
use super::tree::{DecisionTree, TreeParams};
use super::{sigmoid, Algorithm, Dataset};
use crate::error::Result;
use crate::features::SparseVector;
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams {
            n_estimators: 50,
            learning_rate: 1.0,
        }
    }
}

impl AdaBoostParams {
    pub(crate) fn from_map(map: &HyperMap) -> Result<Self> {
        let d = Self::default();
        let mut r = ParamReader::new(Algorithm::AdaBoost, map);
        r.choice_or("algorithm", &["SAMME"], "SAMME")?;
        let p = AdaBoostParams {
            n_estimators: r.positive_usize_or("n_estimators", d.n_estimators)?,
            learning_rate: r.positive_f64_or("learning_rate", d.learning_rate)?,
        };
        r.finish()?;
        Ok(p)
    }

    pub(crate) fn to_map(self) -> HyperMap {
        HyperMap::from([
            ("algorithm".into(), "SAMME".into()),
            ("n_estimators".into(), (self.n_estimators as i64).into()),
            ("learning_rate".into(), self.learning_rate.into()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    stumps: Vec<DecisionTree>,
    alphas: Vec<f64>,
    /// Weighted training error of each round, before reweighting.
    pub errors: Vec<f64>,
}

fn vote(stump: &DecisionTree, x: &SparseVector) -> f64 {
    if stump.score(x) >= 0.5 {
        1.0
    } else {
        -1.0
    }
}

impl AdaBoostModel {
    pub(crate) fn fit(params: &AdaBoostParams, data: &Dataset<'_>, seed: u64) -> Result<Self> {
        let n = data.x.len();
        let mut w = vec![1.0 / n as f64; n];
        let stump_params = TreeParams::stump();
        let mut model = AdaBoostModel {
            stumps: Vec::new(),
            alphas: Vec::new(),
            errors: Vec::new(),
        };
        for m in 0..params.n_estimators {
            let stump =
                DecisionTree::fit_weighted(&stump_params, data, &w, rng(derive_seed(seed, m as u64)));
            let miss: Vec<bool> = data
                .x
                .iter()
                .zip(data.y)
                .map(|(x, &y)| (vote(&stump, x) > 0.0) != y)
                .collect();
            let total: f64 = w.iter().sum();
            let err = miss.iter().zip(&w).filter(|(m, _)| **m).map(|(_, w)| w).sum::<f64>() / total;
            if err <= 0.0 {
                model.stumps.push(stump);
                model.alphas.push(1.0);
                model.errors.push(0.0);
                break;
            }
            if err >= 0.5 {
                if model.stumps.is_empty() {
                    // Nothing better than chance: keep the stump with a unit
                    // weight so the ensemble still predicts.
                    model.stumps.push(stump);
                    model.alphas.push(1.0);
                    model.errors.push(err);
                }
                log::debug!("adaboost stopped at round {m}: weighted error {err:.4}");
                break;
            }
            let alpha = params.learning_rate * ((1.0 - err) / err).ln();
            for (wi, &mi) in w.iter_mut().zip(&miss) {
                if mi {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= s);
            model.stumps.push(stump);
            model.alphas.push(alpha);
            model.errors.push(err);
        }
        Ok(model)
    }

    pub fn decision(&self, x: &SparseVector) -> f64 {
        self.stumps
            .iter()
            .zip(&self.alphas)
            .map(|(s, a)| a * vote(s, x))
            .sum()
    }

    /// `Σ α_m h_m(x)` after each round.
    pub fn staged_decision(&self, x: &SparseVector) -> Vec<f64> {
        let mut acc = 0.0;
        self.stumps
            .iter()
            .zip(&self.alphas)
            .map(|(s, a)| {
                acc += a * vote(s, x);
                acc
            })
            .collect()
    }

    /// Running product of `2·sqrt(ε_m (1 − ε_m))`, the classical upper bound
    /// on training error after `m` rounds.
    pub fn error_bounds(&self) -> Vec<f64> {
        let mut acc = 1.0;
        self.errors
            .iter()
            .map(|&e| {
                acc *= 2.0 * (e * (1.0 - e)).sqrt();
                acc
            })
            .collect()
    }

    pub fn n_rounds(&self) -> usize {
        self.stumps.len()
    }

    pub fn score(&self, x: &SparseVector) -> f64 {
        sigmoid(self.decision(x))
    }
}
