//! Evaluation reports and their JSON and Markdown renderings.

use serde::{Deserialize, Serialize};

use super::metrics::{ClassMetrics, ConfusionMatrix};
use crate::classifiers::ClassifierSpec;

/// Bumped whenever the JSON layout of [`EvalReport`] changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Metrics computed per fold, then averaged.
    #[default]
    PerFold,
    /// Metrics computed once from the summed confusion matrices.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub repeat: usize,
    pub fold: usize,
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
    pub macro_f_beta: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<ClassifierSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    /// Data slice the report covers, such as an app name or `Total`.
    pub name: String,
    pub method: String,
    pub beta: f64,
    pub averaging: Averaging,
    /// Metrics for the explanation-need class.
    pub positive: ClassMetrics,
    /// Metrics for the no-need class.
    pub negative: ClassMetrics,
    pub macro_f_beta: f64,
    /// Summed over all folds.
    pub confusion: ConfusionMatrix,
    /// True when the slice held no reviews.
    pub empty: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<FoldRecord>,
}

impl EvalReport {
    /// Report for a single set of predictions.
    pub fn from_confusion(name: &str, method: &str, confusion: ConfusionMatrix, beta: f64) -> Self {
        let positive = confusion.positive(beta);
        let negative = confusion.negative(beta);
        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            name: name.to_string(),
            method: method.to_string(),
            beta,
            averaging: Averaging::PerFold,
            macro_f_beta: (positive.f_beta + negative.f_beta) / 2.0,
            positive,
            negative,
            confusion,
            empty: confusion.total() == 0,
            folds: Vec::new(),
        }
    }

    /// Aggregates fold records. Per-fold averaging takes the mean of each
    /// metric; pooled averaging recomputes them from the summed counts.
    pub fn from_folds(name: &str, method: &str, folds: Vec<FoldRecord>, beta: f64, averaging: Averaging) -> Self {
        let mut confusion = ConfusionMatrix::default();
        for f in &folds {
            confusion.merge(&f.confusion);
        }
        let (positive, negative) = match averaging {
            Averaging::PerFold => {
                let pos: Vec<ClassMetrics> = folds.iter().map(|f| f.positive).collect();
                let neg: Vec<ClassMetrics> = folds.iter().map(|f| f.negative).collect();
                (ClassMetrics::mean(&pos), ClassMetrics::mean(&neg))
            }
            Averaging::Pooled => (confusion.positive(beta), confusion.negative(beta)),
        };
        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            name: name.to_string(),
            method: method.to_string(),
            beta,
            averaging,
            macro_f_beta: (positive.f_beta + negative.f_beta) / 2.0,
            positive,
            negative,
            confusion,
            empty: confusion.total() == 0,
            folds,
        }
    }
}

/// Markdown table with one row per report: recall, precision and F-beta for
/// the explanation-need class, the same for the other class, then macro
/// F-beta.
pub fn reports_to_markdown(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let beta = reports.first().map_or(0.0, |r| r.beta);
    out.push_str("| Data | Method | Need Rec | Need Pre | Need F_β | No-Need Rec | No-Need Pre | No-Need F_β | Mac-F_β |\n\
         |---|---|---|---|---|---|---|---|---|\n");
    for r in reports {
        let cell = |m: &ClassMetrics, v: f64| {
            if m.support == 0 && m.degenerate {
                "–".to_string()
            } else {
                format!("{v:.2}")
            }
        };
        out.push_str(&format!(
            "| {}{} | {} | {} | {} | {} | {} | {} | {} | {:.2} |\n",
            r.name,
            if r.empty { " (empty)" } else { "" },
            r.method,
            cell(&r.positive, r.positive.recall),
            cell(&r.positive, r.positive.precision),
            cell(&r.positive, r.positive.f_beta),
            cell(&r.negative, r.negative.recall),
            cell(&r.negative, r.negative.precision),
            cell(&r.negative, r.negative.f_beta),
            r.macro_f_beta,
        ));
    }
    out.push_str(&format!("\nβ = {beta}\n"));
    out
}
