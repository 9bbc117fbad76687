//! Undersampling, cross-validation, holdout evaluation and the recall-weighted
//! metrics they report.

pub mod harness;
pub mod metrics;
pub mod predictions;
pub mod report;
pub mod sampling;

pub use harness::{
    cross_validate, evaluate_holdout, evaluate_labels, fit_fold, predict_dataset, CvOptions, FittedMethod, Method,
};
pub use metrics::{compute_lambda, f_beta, BetaConfig, ClassMetrics, ConfusionMatrix, DEFAULT_BETA};
pub use predictions::{align_predictions, load_predictions, read_predictions, save_predictions, write_predictions, PredictionRow};
pub use report::{reports_to_markdown, Averaging, EvalReport, FoldRecord, REPORT_SCHEMA_VERSION};
pub use sampling::{repeated_stratified_kfold, stratified_kfold, undersample, FoldPlan};
