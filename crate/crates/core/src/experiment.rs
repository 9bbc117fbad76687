//! Experiment configuration files and the cross-validation run they drive.
//!
//! A configuration is a TOML file:
//!
//! ```toml
//! seed = 42
//! dataset = "crossval.csv"      # relative to the config file
//! holdout = "general.csv"       # optional: fit on all of `dataset`, score here
//! k = 10
//! repeats = 5
//! undersample = true
//! averaging = "per_fold"        # or "pooled"
//! beta = 19.52                  # or a [beta_derivation] table, not both
//!
//! [method]
//! kind = "classifier"           # rule_based | classifier | grid_search | gold_echo | constant
//! algorithm = "naive_bayes"
//! embedding = "tfidf"
//! hyperparameters = { alpha = 1.0, fit_prior = false }
//! ```
//!
//! `[beta_derivation]` takes `time_a`, `time_v` and either `lambda` or the
//! pair `relevant`/`total`. A grid search method takes `algorithm`,
//! `embeddings`, a `grid` table of candidate lists, `inner_folds` (default
//! 3) and `metric` (`macro_f_beta`, `positive_f_beta` or `accuracy`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{Algorithm, ClassifierSpec, Embedding, HyperGrid, HyperMap, HyperValue, SelectionMetric};
use crate::corpus::{load_dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::evaluation::{
    compute_lambda, cross_validate, evaluate_holdout, fit_fold, undersample, Averaging, BetaConfig, CvOptions,
    EvalReport, Method,
};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    #[default]
    MacroFBeta,
    PositiveFBeta,
    Accuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    RuleBased,
    Classifier {
        algorithm: Algorithm,
        embedding: Embedding,
        #[serde(default)]
        hyperparameters: HyperMap,
    },
    GridSearch {
        algorithm: Algorithm,
        embeddings: Vec<Embedding>,
        #[serde(default)]
        grid: BTreeMap<String, Vec<HyperValue>>,
        #[serde(default = "default_inner_folds")]
        inner_folds: usize,
        #[serde(default)]
        metric: MetricId,
    },
    GoldEcho,
    Constant {
        label: bool,
    },
}

fn default_inner_folds() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaDerivation {
    pub time_a: f64,
    pub time_v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevant: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dataset: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout: Option<PathBuf>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_true")]
    pub undersample: bool,
    #[serde(default)]
    pub averaging: Averaging,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_derivation: Option<BetaDerivation>,
    pub method: MethodConfig,
}

fn default_k() -> usize {
    10
}

fn default_repeats() -> usize {
    5
}

fn default_true() -> bool {
    true
}

/// The configuration with every default and derived value filled in. This is
/// what reports embed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub seed: u64,
    pub dataset: PathBuf,
    pub name: String,
    pub holdout: Option<PathBuf>,
    pub k: usize,
    pub repeats: usize,
    pub undersample: bool,
    pub averaging: Averaging,
    pub beta: f64,
    pub beta_derivation: Option<BetaConfig>,
    pub method: Method,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative dataset paths are taken relative to the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.dataset = base.join(&cfg.dataset);
        cfg.holdout = cfg.holdout.map(|h| base.join(h));
        Ok(cfg)
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let (beta, derivation) = match (&self.beta, &self.beta_derivation) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either beta or [beta_derivation], not both".into()))
            }
            (None, None) => return Err(Error::Config("missing beta or [beta_derivation]".into())),
            (Some(b), None) => {
                if !(b.is_finite() && *b >= 0.0) {
                    return Err(Error::Config(format!("beta must be non-negative, got {b}")));
                }
                (*b, None)
            }
            (None, Some(d)) => {
                let lambda = match (d.lambda, d.relevant, d.total) {
                    (Some(l), None, None) => l,
                    (None, Some(r), Some(t)) => compute_lambda(r, t)?,
                    _ => {
                        return Err(Error::Config(
                            "[beta_derivation] needs either lambda or both relevant and total".into(),
                        ))
                    }
                };
                let cfg = BetaConfig::new(d.time_a, d.time_v, lambda)?;
                (cfg.beta, Some(cfg))
            }
        };
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        let method = match &self.method {
            MethodConfig::RuleBased => Method::RuleBased,
            MethodConfig::GoldEcho => Method::GoldEcho,
            MethodConfig::Constant { label } => Method::Constant { label: *label },
            MethodConfig::Classifier {
                algorithm,
                embedding,
                hyperparameters,
            } => {
                let spec = ClassifierSpec {
                    algorithm: *algorithm,
                    hyperparameters: hyperparameters.clone(),
                    embedding: *embedding,
                };
                Method::Classifier { spec: spec.resolved()? }
            }
            MethodConfig::GridSearch {
                algorithm,
                embeddings,
                grid,
                inner_folds,
                metric,
            } => {
                let grid = HyperGrid {
                    algorithm: *algorithm,
                    params: grid.clone(),
                    embeddings: embeddings.clone(),
                };
                for point in grid.points()? {
                    point.params()?;
                }
                if *inner_folds < 2 {
                    return Err(Error::Config("inner_folds must be at least 2".into()));
                }
                Method::GridSearch {
                    grid,
                    inner_folds: *inner_folds,
                    metric: match metric {
                        MetricId::MacroFBeta => SelectionMetric::MacroFBeta { beta },
                        MetricId::PositiveFBeta => SelectionMetric::PositiveFBeta { beta },
                        MetricId::Accuracy => SelectionMetric::Accuracy,
                    },
                }
            }
        };
        Ok(ResolvedConfig {
            seed: self.seed,
            dataset: self.dataset.clone(),
            name: self.name.clone().unwrap_or_else(|| {
                self.dataset
                    .file_stem()
                    .map_or("dataset".into(), |s| s.to_string_lossy().into_owned())
            }),
            holdout: self.holdout.clone(),
            k: self.k,
            repeats: self.repeats,
            undersample: self.undersample,
            averaging: self.averaging,
            beta,
            beta_derivation: derivation,
            method,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub reviews: usize,
    pub positives: usize,
}

impl DatasetSummary {
    fn of(ds: &LabeledDataset) -> Self {
        DatasetSummary {
            name: ds.name().to_string(),
            reviews: ds.len(),
            positives: ds.positives(),
        }
    }
}

/// Everything a cross-validation run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub schema_version: u32,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub config: ResolvedConfig,
    pub input: DatasetSummary,
    pub evaluated: DatasetSummary,
    pub all_folds_converged: bool,
    pub cross_validation: EvalReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holdout: Vec<EvalReport>,
}

/// Loads the data, optionally undersamples it, cross-validates the method
/// and, when a holdout set is configured, scores a model fitted on all of
/// the (undersampled) training data against it.
pub fn run_experiment(cfg: &ResolvedConfig) -> Result<ExperimentOutcome> {
    let input = load_dataset(&cfg.dataset, &cfg.name)?;
    let data = if cfg.undersample {
        undersample(&input, derive_seed(cfg.seed, 0))?
    } else {
        input.clone()
    };
    let opts = CvOptions {
        k: cfg.k,
        repeats: cfg.repeats,
        beta: cfg.beta,
        seed: derive_seed(cfg.seed, 1),
        averaging: cfg.averaging,
    };
    log::info!(
        "cross-validating {} on {} ({} reviews, {} positive)",
        cfg.method.name(),
        data.name(),
        data.len(),
        data.positives()
    );
    let cv = cross_validate(&cfg.method, &data, &opts)?;
    let holdout = match &cfg.holdout {
        None => Vec::new(),
        Some(path) => {
            let test_name = path
                .file_stem()
                .map_or("holdout".into(), |s| s.to_string_lossy().into_owned());
            let test = load_dataset(path, &test_name)?;
            let all: Vec<usize> = (0..data.len()).collect();
            let fitted = fit_fold(&cfg.method, &data, &all, derive_seed(cfg.seed, 2))?;
            evaluate_holdout(&fitted, &cfg.method.name(), &test, cfg.beta, true)?
        }
    };
    Ok(ExperimentOutcome {
        schema_version: crate::evaluation::REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: None,
        config: cfg.clone(),
        input: DatasetSummary::of(&input),
        evaluated: DatasetSummary::of(&data),
        all_folds_converged: cv.folds.iter().all(|f| f.converged),
        cross_validation: cv,
        holdout,
    })
}
