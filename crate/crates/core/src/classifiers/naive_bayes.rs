//! Multinomial naive Bayes with additive smoothing.

use serde::{Deserialize, Serialize};

use super::params::{HyperMap, ParamReader};
use super::{Algorithm, Dataset};
use crate::error::Result;
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    pub alpha: f64,
    /// Learn class priors from the data; otherwise use a uniform prior.
    pub fit_prior: bool,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams {
            alpha: 1.0,
            fit_prior: true,
        }
    }
}

impl NaiveBayesParams {
    pub(crate) fn from_map(map: &HyperMap) -> Result<Self> {
        let d = Self::default();
        let mut r = ParamReader::new(Algorithm::NaiveBayes, map);
        let p = NaiveBayesParams {
            alpha: r.positive_f64_or("alpha", d.alpha)?,
            fit_prior: r.bool_or("fit_prior", d.fit_prior)?,
        };
        r.finish()?;
        Ok(p)
    }

    pub(crate) fn to_map(self) -> HyperMap {
        HyperMap::from([
            ("alpha".into(), self.alpha.into()),
            ("fit_prior".into(), self.fit_prior.into()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    /// Index 0 = negative, 1 = positive.
    class_log_prior: [f64; 2],
    feature_log_prob: [Vec<f64>; 2],
}

impl NaiveBayesModel {
    pub(crate) fn fit(params: &NaiveBayesParams, data: &Dataset<'_>) -> Result<Self> {
        let dim = data.dim;
        let mut counts = [vec![0.0; dim], vec![0.0; dim]];
        let mut n_class = [0usize; 2];
        for (x, &y) in data.x.iter().zip(data.y) {
            let c = y as usize;
            n_class[c] += 1;
            for (j, v) in x.iter() {
                counts[c][j] += v;
            }
        }
        let n = (n_class[0] + n_class[1]) as f64;
        let class_log_prior = if params.fit_prior {
            [(n_class[0] as f64 / n).ln(), (n_class[1] as f64 / n).ln()]
        } else {
            [0.5f64.ln(); 2]
        };
        let feature_log_prob = counts.map(|fc| {
            let total: f64 = fc.iter().sum::<f64>() + params.alpha * dim as f64;
            fc.into_iter().map(|c| ((c + params.alpha) / total).ln()).collect()
        });
        Ok(NaiveBayesModel {
            class_log_prior,
            feature_log_prob,
        })
    }

    fn joint_log_likelihood(&self, x: &SparseVector) -> [f64; 2] {
        [0, 1].map(|c| self.class_log_prior[c] + x.dot_dense(&self.feature_log_prob[c]))
    }

    /// `[P(negative | x), P(positive | x)]`.
    pub fn class_posteriors(&self, x: &SparseVector) -> [f64; 2] {
        let [neg, pos] = self.joint_log_likelihood(x);
        let m = neg.max(pos);
        let (en, ep) = ((neg - m).exp(), (pos - m).exp());
        [en / (en + ep), ep / (en + ep)]
    }

    pub fn score(&self, x: &SparseVector) -> f64 {
        self.class_posteriors(x)[1]
    }
}
