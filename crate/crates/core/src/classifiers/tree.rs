//! CART decision trees on sparse, weighted samples, and bagged random forests
//! of them.
//!
//! A split sends `x[f] <= threshold` left. Per node, `max_features` features
//! are drawn from the whole vocabulary; features that are constant within the
//! node are skipped, and if none of the drawn features can split, further
//! features are tried in random order until one can.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{HyperMap, MaxFeatures, ParamReader};
use super::{Algorithm, Dataset};
use crate::error::Result;
use crate::features::SparseVector;
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    fn impurity(self, pos: f64, total: f64) -> f64 {
        if total <= 0.0 {
            return 0.0;
        }
        let p = pos / total;
        let q = 1.0 - p;
        match self {
            Criterion::Gini => 1.0 - p * p - q * q,
            Criterion::Entropy => {
                let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
                h(p) + h(q)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    Best,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub splitter: Splitter,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            criterion: Criterion::Gini,
            splitter: Splitter::Best,
            max_features: MaxFeatures::All,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

fn read_criterion(r: &mut ParamReader<'_>) -> Result<Criterion> {
    Ok(match r.choice_or("criterion", &["gini", "entropy"], "gini")? {
        "entropy" => Criterion::Entropy,
        _ => Criterion::Gini,
    })
}

fn criterion_name(c: Criterion) -> &'static str {
    match c {
        Criterion::Gini => "gini",
        Criterion::Entropy => "entropy",
    }
}

impl TreeParams {
    pub(crate) fn from_map(map: &HyperMap) -> Result<Self> {
        let d = Self::default();
        let mut r = ParamReader::new(Algorithm::DecisionTree, map);
        let p = TreeParams {
            criterion: read_criterion(&mut r)?,
            splitter: match r.choice_or("splitter", &["best", "random"], "best")? {
                "random" => Splitter::Random,
                _ => Splitter::Best,
            },
            max_features: MaxFeatures::read(&mut r, d.max_features)?,
            max_depth: r.optional_usize("max_depth")?,
            min_samples_split: r.usize_or("min_samples_split", d.min_samples_split)?.max(2),
            min_samples_leaf: r.positive_usize_or("min_samples_leaf", d.min_samples_leaf)?,
        };
        r.finish()?;
        Ok(p)
    }

    pub(crate) fn to_map(self) -> HyperMap {
        HyperMap::from([
            ("criterion".into(), criterion_name(self.criterion).into()),
            (
                "splitter".into(),
                if self.splitter == Splitter::Best { "best" } else { "random" }.into(),
            ),
            ("max_features".into(), self.max_features.to_value()),
            (
                "max_depth".into(),
                self.max_depth.map_or("none".into(), |d| (d as i64).into()),
            ),
            ("min_samples_split".into(), (self.min_samples_split as i64).into()),
            ("min_samples_leaf".into(), (self.min_samples_leaf as i64).into()),
        ])
    }

    pub(crate) fn stump() -> Self {
        TreeParams {
            max_depth: Some(1),
            ..TreeParams::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub criterion: Criterion,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            criterion: Criterion::Gini,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            bootstrap: true,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

impl ForestParams {
    pub(crate) fn from_map(map: &HyperMap) -> Result<Self> {
        let d = Self::default();
        let mut r = ParamReader::new(Algorithm::RandomForest, map);
        let p = ForestParams {
            n_estimators: r.positive_usize_or("n_estimators", d.n_estimators)?,
            criterion: read_criterion(&mut r)?,
            max_features: MaxFeatures::read(&mut r, d.max_features)?,
            max_depth: r.optional_usize("max_depth")?,
            bootstrap: r.bool_or("bootstrap", d.bootstrap)?,
            min_samples_split: r.usize_or("min_samples_split", d.min_samples_split)?.max(2),
            min_samples_leaf: r.positive_usize_or("min_samples_leaf", d.min_samples_leaf)?,
        };
        r.finish()?;
        Ok(p)
    }

    pub(crate) fn to_map(self) -> HyperMap {
        HyperMap::from([
            ("n_estimators".into(), (self.n_estimators as i64).into()),
            ("criterion".into(), criterion_name(self.criterion).into()),
            ("max_features".into(), self.max_features.to_value()),
            (
                "max_depth".into(),
                self.max_depth.map_or("none".into(), |d| (d as i64).into()),
            ),
            ("bootstrap".into(), self.bootstrap.into()),
            ("min_samples_split".into(), (self.min_samples_split as i64).into()),
            ("min_samples_leaf".into(), (self.min_samples_leaf as i64).into()),
        ])
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            criterion: self.criterion,
            splitter: Splitter::Best,
            max_features: self.max_features,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Node {
    Leaf {
        p_pos: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Column-major copy of the training matrix restricted to weighted rows.
struct Columns {
    cols: Vec<Vec<(usize, f64)>>,
}

impl Columns {
    fn new(data: &Dataset<'_>, weights: &[f64]) -> Self {
        let mut cols = vec![Vec::new(); data.dim];
        for (i, x) in data.x.iter().enumerate() {
            if weights[i] > 0.0 {
                for (j, v) in x.iter() {
                    cols[j].push((i, v));
                }
            }
        }
        Columns { cols }
    }
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a> {
    data: &'a Dataset<'a>,
    weights: &'a [f64],
    params: TreeParams,
    columns: Columns,
    in_node: Vec<bool>,
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn class_weights(&self, samples: &[usize]) -> (f64, f64) {
        samples.iter().fold((0.0, 0.0), |(p, t), &i| {
            let w = self.weights[i];
            (p + if self.data.y[i] { w } else { 0.0 }, t + w)
        })
    }

    /// Best threshold on one feature for the samples marked in `in_node`.
    /// Returns `None` when the feature is constant in the node or no split
    /// satisfies `min_samples_leaf`.
    fn evaluate_feature(
        &mut self,
        feature: usize,
        samples: &[usize],
        node_pos: f64,
        node_total: f64,
        parent_impurity: f64,
    ) -> Option<SplitCandidate> {
        // (value, positive weight, total weight, count), zeros aggregated.
        let mut entries: Vec<(f64, f64, f64, usize)> = Vec::new();
        let (mut nz_pos, mut nz_total, mut nz_count) = (0.0, 0.0, 0usize);
        for &(i, v) in &self.columns.cols[feature] {
            if self.in_node[i] {
                let w = self.weights[i];
                let p = if self.data.y[i] { w } else { 0.0 };
                entries.push((v, p, w, 1));
                nz_pos += p;
                nz_total += w;
                nz_count += 1;
            }
        }
        let zero_count = samples.len() - nz_count;
        if zero_count > 0 {
            entries.push((0.0, node_pos - nz_pos, node_total - nz_total, zero_count));
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (lo, hi) = (entries.first()?.0, entries.last()?.0);
        if lo == hi {
            return None;
        }
        let min_leaf = self.params.min_samples_leaf;
        let criterion = self.params.criterion;
        let gain_at = |lp: f64, lt: f64| {
            let (rp, rt) = (node_pos - lp, node_total - lt);
            parent_impurity * node_total
                - lt * criterion.impurity(lp, lt)
                - rt * criterion.impurity(rp, rt)
        };

        if self.params.splitter == Splitter::Random {
            let mut threshold = self.rng.gen_range(lo..hi);
            if threshold >= hi {
                threshold = lo;
            }
            let (mut lp, mut lt, mut lc) = (0.0, 0.0, 0usize);
            for e in entries.iter().take_while(|e| e.0 <= threshold) {
                lp += e.1;
                lt += e.2;
                lc += e.3;
            }
            if lc < min_leaf || samples.len() - lc < min_leaf {
                return None;
            }
            return Some(SplitCandidate {
                feature,
                threshold,
                gain: gain_at(lp, lt),
            });
        }

        let mut best: Option<SplitCandidate> = None;
        let (mut lp, mut lt, mut lc) = (0.0, 0.0, 0usize);
        for k in 0..entries.len() - 1 {
            lp += entries[k].1;
            lt += entries[k].2;
            lc += entries[k].3;
            let next = entries[k + 1].0;
            if next == entries[k].0 {
                continue;
            }
            if lc < min_leaf || samples.len() - lc < min_leaf {
                continue;
            }
            let gain = gain_at(lp, lt);
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                let mut threshold = entries[k].0 / 2.0 + next / 2.0;
                if threshold >= next {
                    threshold = entries[k].0;
                }
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    fn features_in_node(&self, samples: &[usize]) -> Vec<usize> {
        let mut feats: Vec<usize> = samples
            .iter()
            .flat_map(|&i| self.data.x[i].indices().iter().copied())
            .collect();
        feats.sort_unstable();
        feats.dedup();
        feats
    }

    fn find_split(&mut self, samples: &[usize], pos: f64, total: f64) -> Option<SplitCandidate> {
        let parent = self.params.criterion.impurity(pos, total);
        let mut best: Option<SplitCandidate> = None;
        let consider = |b: &mut Builder<'_>, f: usize, best: &mut Option<SplitCandidate>| {
            let found = b.evaluate_feature(f, samples, pos, total, parent);
            let usable = found.is_some();
            if let Some(c) = found {
                if best.as_ref().is_none_or(|cur| c.gain > cur.gain) {
                    *best = Some(c);
                }
            }
            usable
        };

        let dim = self.data.dim;
        let drawn: Vec<usize> = if self.max_features >= dim {
            let mut f = self.features_in_node(samples);
            f.shuffle(&mut self.rng);
            f
        } else {
            index::sample(&mut self.rng, dim, self.max_features).into_vec()
        };
        let mut any_usable = false;
        for &f in &drawn {
            any_usable |= consider(self, f, &mut best);
        }
        if !any_usable && self.max_features < dim {
            let mut rest: Vec<usize> = self
                .features_in_node(samples)
                .into_iter()
                .filter(|f| !drawn.contains(f))
                .collect();
            rest.shuffle(&mut self.rng);
            for f in rest {
                if consider(self, f, &mut best) {
                    break;
                }
            }
        }
        best.filter(|b| b.gain > 1e-12 || self.params.splitter == Splitter::Random)
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let (pos, total) = self.class_weights(&samples);
        let id = self.nodes.len();
        let p_pos = if total > 0.0 { pos / total } else { 0.0 };
        self.nodes.push(Node::Leaf { p_pos });

        let pure = pos <= 0.0 || pos >= total;
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if pure || !depth_ok || samples.len() < self.params.min_samples_split {
            return id;
        }
        for &i in &samples {
            self.in_node[i] = true;
        }
        let split = self.find_split(&samples, pos, total);
        for &i in &samples {
            self.in_node[i] = false;
        }
        let Some(split) = split else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&i| self.data.x[i].get(split.feature) <= split.threshold);
        if left.is_empty() || right.is_empty() {
            return id;
        }
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }
}

impl DecisionTree {
    /// Grows a tree on the rows with positive weight.
    pub(crate) fn fit_weighted(
        params: &TreeParams,
        data: &Dataset<'_>,
        weights: &[f64],
        rng: ChaCha8Rng,
    ) -> DecisionTree {
        let samples: Vec<usize> = (0..data.x.len()).filter(|&i| weights[i] > 0.0).collect();
        let mut b = Builder {
            data,
            weights,
            params: *params,
            columns: Columns::new(data, weights),
            in_node: vec![false; data.x.len()],
            max_features: params.max_features.resolve(data.dim),
            rng,
            nodes: Vec::new(),
        };
        b.grow(samples, 0);
        DecisionTree { nodes: b.nodes }
    }

    pub(crate) fn fit(params: &TreeParams, data: &Dataset<'_>, seed: u64) -> Result<Self> {
        let weights = vec![1.0; data.x.len()];
        Ok(Self::fit_weighted(params, data, &weights, rng(derive_seed(seed, 0))))
    }

    /// Positive-class fraction of the leaf `x` falls into.
    pub fn score(&self, x: &SparseVector) -> f64 {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { p_pos } => return *p_pos,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if x.get(*feature) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` draws from the stream `derive_seed(seed, t)`, so a
    /// one-tree forest without bootstrap reproduces [`DecisionTree::fit`].
    pub(crate) fn fit(params: &ForestParams, data: &Dataset<'_>, seed: u64) -> Result<Self> {
        let tree_params = params.tree_params();
        let n = data.x.len();
        let trees = (0..params.n_estimators)
            .into_par_iter()
            .map(|t| {
                let mut r = rng(derive_seed(seed, t as u64));
                let weights = if params.bootstrap {
                    let mut w = vec![0.0; n];
                    for _ in 0..n {
                        w[r.gen_range(0..n)] += 1.0;
                    }
                    w
                } else {
                    vec![1.0; n]
                };
                DecisionTree::fit_weighted(&tree_params, data, &weights, r)
            })
            .collect();
        Ok(RandomForest { trees })
    }

    /// Mean of the trees' leaf probabilities.
    pub fn score(&self, x: &SparseVector) -> f64 {
        self.trees.iter().map(|t| t.score(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}
