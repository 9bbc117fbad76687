//! Exact k-nearest neighbours under Euclidean distance.

use serde::{Deserialize, Serialize};

use super::params::{HyperMap, ParamReader};
use super::{Algorithm, Dataset};
use crate::error::Result;
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    pub n_neighbors: usize,
    pub weights: Weighting,
    /// Index structure named in the configuration. Search is always exact,
    /// so this does not change results.
    pub algorithm: &'static str,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            n_neighbors: 5,
            weights: Weighting::Uniform,
            algorithm: "auto",
        }
    }
}

impl KnnParams {
    pub(crate) fn from_map(map: &HyperMap) -> Result<Self> {
        let d = Self::default();
        let mut r = ParamReader::new(Algorithm::Knn, map);
        let p = KnnParams {
            n_neighbors: r.positive_usize_or("n_neighbors", d.n_neighbors)?,
            weights: match r.choice_or("weights", &["uniform", "distance"], "uniform")? {
                "distance" => Weighting::Distance,
                _ => Weighting::Uniform,
            },
            algorithm: r.choice_or("algorithm", &["auto", "ball_tree", "kd_tree", "brute"], "auto")?,
        };
        r.finish()?;
        Ok(p)
    }

    pub(crate) fn to_map(self) -> HyperMap {
        HyperMap::from([
            ("n_neighbors".into(), (self.n_neighbors as i64).into()),
            (
                "weights".into(),
                match self.weights {
                    Weighting::Uniform => "uniform",
                    Weighting::Distance => "distance",
                }
                .into(),
            ),
            ("algorithm".into(), self.algorithm.into()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    weights: Weighting,
    x: Vec<SparseVector>,
    y: Vec<bool>,
}

impl KnnModel {
    /// `k` is capped at the training-set size.
    pub(crate) fn fit(params: &KnnParams, data: &Dataset<'_>) -> Result<Self> {
        Ok(KnnModel {
            k: params.n_neighbors.min(data.x.len()),
            weights: params.weights,
            x: data.x.to_vec(),
            y: data.y.to_vec(),
        })
    }

    /// Indices and distances of the `k` nearest training points, ordered by
    /// distance and then by training index.
    pub fn neighbors(&self, x: &SparseVector) -> Vec<(usize, f64)> {
        let mut d: Vec<(usize, f64)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, t)| (i, t.squared_distance_exact(x)))
            .collect();
        let by = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by);
            d.truncate(self.k);
        }
        d.sort_by(by);
        d.into_iter().map(|(i, s)| (i, s.sqrt())).collect()
    }

    /// Weighted share of positive neighbours. Under distance weighting, any
    /// neighbours at distance zero outvote all others.
    pub fn score(&self, x: &SparseVector) -> f64 {
        let nn = self.neighbors(x);
        let weighted: Vec<(bool, f64)> = match self.weights {
            Weighting::Uniform => nn.iter().map(|&(i, _)| (self.y[i], 1.0)).collect(),
            Weighting::Distance => {
                if nn.iter().any(|&(_, d)| d == 0.0) {
                    nn.iter()
                        .filter(|&&(_, d)| d == 0.0)
                        .map(|&(i, _)| (self.y[i], 1.0))
                        .collect()
                } else {
                    nn.iter().map(|&(i, d)| (self.y[i], 1.0 / d)).collect()
                }
            }
        };
        let total: f64 = weighted.iter().map(|w| w.1).sum();
        let pos: f64 = weighted.iter().filter(|w| w.0).map(|w| w.1).sum();
        pos / total
    }
}
