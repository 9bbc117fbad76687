//! Supervised binary classifiers behind one fit/predict contract.
//!
//! Every model reports a score in `[0, 1]` and predicts positive when the
//! score is at least 0.5:
//!
//! | algorithm | score |
//! |---|---|
//! | `naive_bayes` | posterior probability of the positive class |
//! | `logistic_regression` | `σ(w·x + b)` |
//! | `svm` | `σ(margin)` |
//! | `decision_tree` | positive share of the training samples in the leaf |
//! | `random_forest` | mean of the trees' leaf shares |
//! | `adaboost` | `σ(Σ α_m h_m(x))` |
//! | `knn` | (distance-)weighted positive share of the neighbours |

pub mod adaboost;
pub mod grid;
pub mod knn;
pub mod logistic;
pub mod naive_bayes;
pub mod params;
pub mod svm;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{fit_vocabulary, tokenize, transform_bow, transform_tfidf, SparseVector, TokenStream, Vocabulary};

pub use adaboost::{AdaBoostModel, AdaBoostParams};
pub use grid::{grid_search, GridResult, HyperGrid, SelectionMetric};
pub use knn::{KnnModel, KnnParams, Weighting};
pub use logistic::{LogisticModel, LogisticParams, LogisticSolver};
pub use naive_bayes::{NaiveBayesModel, NaiveBayesParams};
pub use params::{HyperMap, HyperValue, MaxFeatures};
pub use svm::{Gamma, Kernel, SvmModel, SvmParams};
pub use tree::{Criterion, DecisionTree, ForestParams, RandomForest, Splitter, TreeParams};

/// Version written into saved model files.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    NaiveBayes,
    Svm,
    RandomForest,
    DecisionTree,
    LogisticRegression,
    #[serde(rename = "adaboost")]
    AdaBoost,
    Knn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::NaiveBayes,
        Algorithm::Svm,
        Algorithm::RandomForest,
        Algorithm::DecisionTree,
        Algorithm::LogisticRegression,
        Algorithm::AdaBoost,
        Algorithm::Knn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::NaiveBayes => "naive_bayes",
            Algorithm::Svm => "svm",
            Algorithm::RandomForest => "random_forest",
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::LogisticRegression => "logistic_regression",
            Algorithm::AdaBoost => "adaboost",
            Algorithm::Knn => "knn",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == key)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm \"{s}\"")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    Bow,
    Tfidf,
}

impl Embedding {
    pub fn as_str(self) -> &'static str {
        match self {
            Embedding::Bow => "bow",
            Embedding::Tfidf => "tfidf",
        }
    }

    pub fn transform(self, vocab: &Vocabulary, doc: &TokenStream) -> SparseVector {
        match self {
            Embedding::Bow => transform_bow(vocab, doc),
            Embedding::Tfidf => transform_tfidf(vocab, doc),
        }
    }
}

impl fmt::Display for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Embedding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "").as_str() {
            "bow" => Ok(Embedding::Bow),
            "tfidf" => Ok(Embedding::Tfidf),
            _ => Err(Error::invalid(format!("unknown embedding \"{s}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub hyperparameters: HyperMap,
    pub embedding: Embedding,
}

impl ClassifierSpec {
    pub fn new(algorithm: Algorithm, embedding: Embedding) -> Self {
        ClassifierSpec {
            algorithm,
            hyperparameters: HyperMap::new(),
            embedding,
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<HyperValue>) -> Self {
        self.hyperparameters.insert(key.to_string(), value.into());
        self
    }

    /// Validates the hyperparameters and returns them in typed form.
    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.hyperparameters;
        Ok(match self.algorithm {
            Algorithm::NaiveBayes => ModelParams::NaiveBayes(NaiveBayesParams::from_map(m)?),
            Algorithm::Svm => ModelParams::Svm(SvmParams::from_map(m)?),
            Algorithm::RandomForest => ModelParams::RandomForest(ForestParams::from_map(m)?),
            Algorithm::DecisionTree => ModelParams::DecisionTree(TreeParams::from_map(m)?),
            Algorithm::LogisticRegression => ModelParams::LogisticRegression(LogisticParams::from_map(m)?),
            Algorithm::AdaBoost => ModelParams::AdaBoost(AdaBoostParams::from_map(m)?),
            Algorithm::Knn => ModelParams::Knn(KnnParams::from_map(m)?),
        })
    }

    /// Same spec with every defaulted hyperparameter written out.
    pub fn resolved(&self) -> Result<ClassifierSpec> {
        Ok(ClassifierSpec {
            algorithm: self.algorithm,
            hyperparameters: self.params()?.to_map(),
            embedding: self.embedding,
        })
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.algorithm, self.embedding)?;
        let parts: Vec<String> = self
            .hyperparameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if !parts.is_empty() {
            write!(f, "({})", parts.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    NaiveBayes(NaiveBayesParams),
    Svm(SvmParams),
    RandomForest(ForestParams),
    DecisionTree(TreeParams),
    LogisticRegression(LogisticParams),
    AdaBoost(AdaBoostParams),
    Knn(KnnParams),
}

impl ModelParams {
    pub fn to_map(&self) -> HyperMap {
        match *self {
            ModelParams::NaiveBayes(p) => p.to_map(),
            ModelParams::Svm(p) => p.to_map(),
            ModelParams::RandomForest(p) => p.to_map(),
            ModelParams::DecisionTree(p) => p.to_map(),
            ModelParams::LogisticRegression(p) => p.to_map(),
            ModelParams::AdaBoost(p) => p.to_map(),
            ModelParams::Knn(p) => p.to_map(),
        }
    }
}

/// Training matrix borrowed by the individual learners.
pub(crate) struct Dataset<'a> {
    pub x: &'a [SparseVector],
    pub y: &'a [bool],
    pub dim: usize,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", content = "model", rename_all = "snake_case")]
pub enum Learned {
    NaiveBayes(NaiveBayesModel),
    Svm(SvmModel),
    RandomForest(RandomForest),
    DecisionTree(DecisionTree),
    LogisticRegression(LogisticModel),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostModel),
    Knn(KnnModel),
}

impl Learned {
    fn fit(params: &ModelParams, data: &Dataset<'_>, seed: u64) -> Result<Self> {
        Ok(match params {
            ModelParams::NaiveBayes(p) => Learned::NaiveBayes(NaiveBayesModel::fit(p, data)?),
            ModelParams::Svm(p) => Learned::Svm(SvmModel::fit(p, data)?),
            ModelParams::RandomForest(p) => Learned::RandomForest(RandomForest::fit(p, data, seed)?),
            ModelParams::DecisionTree(p) => Learned::DecisionTree(DecisionTree::fit(p, data, seed)?),
            ModelParams::LogisticRegression(p) => Learned::LogisticRegression(LogisticModel::fit(p, data)?),
            ModelParams::AdaBoost(p) => Learned::AdaBoost(AdaBoostModel::fit(p, data, seed)?),
            ModelParams::Knn(p) => Learned::Knn(KnnModel::fit(p, data)?),
        })
    }

    fn score(&self, x: &SparseVector) -> f64 {
        match self {
            Learned::NaiveBayes(m) => m.score(x),
            Learned::Svm(m) => m.score(x),
            Learned::RandomForest(m) => m.score(x),
            Learned::DecisionTree(m) => m.score(x),
            Learned::LogisticRegression(m) => m.score(x),
            Learned::AdaBoost(m) => m.score(x),
            Learned::Knn(m) => m.score(x),
        }
    }

    /// Whether an iterative solver stopped before meeting its tolerance.
    pub fn converged(&self) -> bool {
        match self {
            Learned::Svm(m) => m.converged,
            Learned::LogisticRegression(m) => m.converged,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: bool,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub negative: usize,
    pub positive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    format_version: u32,
    spec: ClassifierSpec,
    seed: u64,
    class_counts: ClassCounts,
    vocabulary: Vocabulary,
    learned: Learned,
}

impl TrainedModel {
    /// Fits on pre-computed vectors. `vocabulary` must be the one the
    /// vectors were built with.
    pub fn fit(
        spec: &ClassifierSpec,
        vocabulary: Vocabulary,
        x: &[SparseVector],
        y: &[bool],
        seed: u64,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "{} vectors but {} labels",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::invalid("training data is empty"));
        }
        let dim = vocabulary.len();
        if let Some(bad) = x.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        let positive = y.iter().filter(|&&b| b).count();
        if positive == 0 || positive == y.len() {
            return Err(Error::SingleClass);
        }
        let params = spec.params()?;
        let learned = Learned::fit(&params, &Dataset { x, y, dim }, seed)?;
        if !learned.converged() {
            log::warn!("{} did not converge", spec.algorithm);
        }
        Ok(TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            spec: ClassifierSpec {
                hyperparameters: params.to_map(),
                ..spec.clone()
            },
            seed,
            class_counts: ClassCounts {
                negative: y.len() - positive,
                positive,
            },
            vocabulary,
            learned,
        })
    }

    /// Fits the vocabulary on `docs` alone, embeds them and trains.
    pub fn fit_tokens(spec: &ClassifierSpec, docs: &[TokenStream], y: &[bool], seed: u64) -> Result<Self> {
        let vocabulary = fit_vocabulary(docs)?;
        let x: Vec<SparseVector> = docs
            .iter()
            .map(|d| spec.embedding.transform(&vocabulary, d))
            .collect();
        Self::fit(spec, vocabulary, &x, y, seed)
    }

    pub fn fit_texts<S: AsRef<str>>(spec: &ClassifierSpec, texts: &[S], y: &[bool], seed: u64) -> Result<Self> {
        let docs: Vec<TokenStream> = texts.iter().map(|t| tokenize(t.as_ref())).collect();
        Self::fit_tokens(spec, &docs, y, seed)
    }

    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn class_counts(&self) -> ClassCounts {
        self.class_counts
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn learned(&self) -> &Learned {
        &self.learned
    }

    pub fn embed(&self, doc: &TokenStream) -> SparseVector {
        self.spec.embedding.transform(&self.vocabulary, doc)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction> {
        if x.dim() != self.vocabulary.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vocabulary.len(),
                actual: x.dim(),
            });
        }
        let score = self.learned.score(x).clamp(0.0, 1.0);
        Ok(Prediction {
            label: score >= 0.5,
            score,
        })
    }

    pub fn predict_tokens(&self, doc: &TokenStream) -> Prediction {
        self.predict(&self.embed(doc)).expect("embedding matches vocabulary")
    }

    pub fn predict_text(&self, text: &str) -> Prediction {
        self.predict_tokens(&tokenize(text))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(json)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let model_err = |message: String| Error::Model {
            path: path.to_path_buf(),
            message,
        };
        let json = self.to_json().map_err(|e| model_err(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| model_err(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let model_err = |message: String| Error::Model {
            path: path.to_path_buf(),
            message,
        };
        let json = std::fs::read_to_string(path).map_err(|e| model_err(e.to_string()))?;
        Self::from_json(&json).map_err(|e| model_err(e.to_string()))
    }
}
