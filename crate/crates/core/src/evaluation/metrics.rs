//! Recall-weighted F-measure and the confusion-matrix metrics built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default weight: inverse prevalence of explanation needs over the full
/// 5,564-review corpus (285 positives).
pub const DEFAULT_BETA: f64 = 19.52;

/// Average number of artifacts one reads to find a relevant one:
/// `total / relevant`.
pub fn compute_lambda(relevant: u64, total: u64) -> Result<f64> {
    if relevant == 0 {
        return Err(Error::invalid("lambda needs at least one relevant artifact"));
    }
    if relevant > total {
        return Err(Error::invalid(format!(
            "relevant count {relevant} exceeds total {total}"
        )));
    }
    Ok(total as f64 / relevant as f64)
}

/// Derivation of beta from the cost of manual assessment versus vetting a
/// tool's positive: `beta = time_a * lambda / time_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaConfig {
    pub time_a: f64,
    pub time_v: f64,
    pub lambda: f64,
    pub beta: f64,
}

impl BetaConfig {
    pub fn new(time_a: f64, time_v: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("time_a", time_a), ("time_v", time_v), ("lambda", lambda)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(BetaConfig {
            time_a,
            time_v,
            lambda,
            beta: time_a * lambda / time_v,
        })
    }
}

/// `(1 + β²)·P·R / (β²·P + R)`, defined as 0 when both inputs are 0.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        return 0.0;
    }
    (1.0 + b2) * precision * recall / denom
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn from_pairs<I: IntoIterator<Item = (bool, bool)>>(gold_pred: I) -> Self {
        let mut m = ConfusionMatrix::default();
        for (gold, pred) in gold_pred {
            m.record(gold, pred);
        }
        m
    }

    pub fn record(&mut self, gold: bool, predicted: bool) {
        match (gold, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Metrics for the positive (explanation need) class.
    pub fn positive(&self, beta: f64) -> ClassMetrics {
        ClassMetrics::from_counts(self.tp, self.fp, self.fn_, beta)
    }

    /// Metrics for the negative class, which treats true negatives as hits.
    pub fn negative(&self, beta: f64) -> ClassMetrics {
        ClassMetrics::from_counts(self.tn, self.fn_, self.fp, beta)
    }
}

/// Precision, recall and F-beta for one class. A zero denominator yields 0
/// and sets `degenerate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub support: u64,
    pub degenerate: bool,
}

impl ClassMetrics {
    pub fn from_counts(hits: u64, false_alarms: u64, misses: u64, beta: f64) -> Self {
        let predicted = hits + false_alarms;
        let support = hits + misses;
        let precision = if predicted == 0 { 0.0 } else { hits as f64 / predicted as f64 };
        let recall = if support == 0 { 0.0 } else { hits as f64 / support as f64 };
        ClassMetrics {
            precision,
            recall,
            f_beta: f_beta(precision, recall, beta),
            support,
            degenerate: predicted == 0 || support == 0,
        }
    }

    /// Arithmetic mean of per-fold metrics; supports are summed and the
    /// result is degenerate if any input was.
    pub fn mean(items: &[ClassMetrics]) -> ClassMetrics {
        let n = items.len().max(1) as f64;
        ClassMetrics {
            precision: items.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: items.iter().map(|m| m.recall).sum::<f64>() / n,
            f_beta: items.iter().map(|m| m.f_beta).sum::<f64>() / n,
            support: items.iter().map(|m| m.support).sum(),
            degenerate: items.iter().any(|m| m.degenerate),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn round2(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn lambda_values() {
        assert_abs_diff_eq!(compute_lambda(285, 5564).unwrap(), 19.52, epsilon = 0.01);
        assert_eq!(compute_lambda(7, 7).unwrap(), 1.0);
        assert_eq!(compute_lambda(24, 486).unwrap(), 20.25);
        assert!(compute_lambda(0, 10).is_err());
        assert!(compute_lambda(11, 10).is_err());
    }

    #[test]
    fn beta_equals_lambda_for_equal_times() {
        let lambda = compute_lambda(285, 5564).unwrap();
        let cfg = BetaConfig::new(30.0, 30.0, lambda).unwrap();
        assert_eq!(cfg.beta, lambda);
        let cfg = BetaConfig::new(60.0, 30.0, 2.0).unwrap();
        assert_eq!(cfg.beta, 4.0);
        assert!(BetaConfig::new(0.0, 1.0, 1.0).is_err());
        assert!(BetaConfig::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn f_beta_spot_checks() {
        assert_eq!(round2(f_beta(0.94, 0.92, DEFAULT_BETA)), 0.92);
        assert_eq!(round2(f_beta(0.37, 0.79, DEFAULT_BETA)), 0.79);
        assert_eq!(f_beta(0.0, 0.0, 3.0), 0.0);
        assert_abs_diff_eq!(f_beta(0.5, 0.5, 1.0), 0.5, epsilon = 1e-15);
        // Harmonic mean at beta = 1.
        assert_abs_diff_eq!(f_beta(0.25, 1.0, 1.0), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn f_beta_limits() {
        assert_eq!(f_beta(0.3, 0.8, 0.0), 0.3);
        assert_abs_diff_eq!(f_beta(0.3, 0.8, 1e6), 0.8, epsilon = 1e-3);
    }

    #[test]
    fn confusion_metrics() {
        let m = ConfusionMatrix::from_pairs([
            (true, true),
            (true, false),
            (false, true),
            (false, false),
            (false, false),
        ]);
        assert_eq!(m, ConfusionMatrix { tp: 1, fp: 1, fn_: 1, tn: 2 });
        let pos = m.positive(1.0);
        assert_eq!((pos.precision, pos.recall, pos.support), (0.5, 0.5, 2));
        let neg = m.negative(1.0);
        assert_abs_diff_eq!(neg.precision, 2.0 / 3.0);
        assert_abs_diff_eq!(neg.recall, 2.0 / 3.0);
        assert_eq!(neg.support, 3);
    }

    #[test]
    fn zero_division_is_flagged() {
        let all_negative = ConfusionMatrix { tp: 0, fp: 0, fn_: 0, tn: 5 };
        let pos = all_negative.positive(DEFAULT_BETA);
        assert!(pos.degenerate);
        assert_eq!((pos.precision, pos.recall, pos.f_beta, pos.support), (0.0, 0.0, 0.0, 0));
        let neg = all_negative.negative(DEFAULT_BETA);
        assert!(!neg.degenerate);
        assert_eq!(neg.recall, 1.0);
    }

    proptest! {
        #[test]
        fn f_beta_between_precision_and_recall(p in 0.001f64..=1.0, r in 0.001f64..=1.0, beta in 0.0f64..50.0) {
            let f = f_beta(p, r, beta);
            prop_assert!(f >= p.min(r) - 1e-12 && f <= p.max(r) + 1e-12);
        }

        #[test]
        fn f_beta_strictly_increasing(p in 0.01f64..0.99, r in 0.01f64..0.99, dp in 0.001f64..0.01, beta in 0.1f64..40.0) {
            let base = f_beta(p, r, beta);
            prop_assert!(f_beta(p + dp, r, beta) > base);
            prop_assert!(f_beta(p, r + dp, beta) > base);
        }

        #[test]
        fn f_beta_symmetric_point(x in 0.0f64..=1.0, beta in 0.0f64..100.0) {
            prop_assert!((f_beta(x, x, beta) - x).abs() < 1e-12);
        }
    }
}
