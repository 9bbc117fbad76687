//! Baseline detector: a review expresses an explanation need iff it contains a
//! question mark or the word "why".

use serde::{Deserialize, Serialize};

use crate::features::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    QuestionMark,
    Why,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulePrediction {
    pub explanation_need: bool,
    pub fired_rules: Vec<Rule>,
}

/// `?` anywhere in the raw text fires [`Rule::QuestionMark`]; the
/// case-insensitive token `why` (word boundaries from [`tokenize`]) fires
/// [`Rule::Why`]. `whyever` or `why's` do not fire.
pub fn classify_rule_based(text: &str) -> RulePrediction {
    let mut fired_rules = Vec::with_capacity(2);
    if text.contains('?') {
        fired_rules.push(Rule::QuestionMark);
    }
    if tokenize(text).contains("why") {
        fired_rules.push(Rule::Why);
    }
    RulePrediction {
        explanation_need: !fired_rules.is_empty(),
        fired_rules,
    }
}

/// Probability-like score for the shared prediction contract: 1 when a rule
/// fires, 0 otherwise.
pub fn rule_score(prediction: &RulePrediction) -> f64 {
    if prediction.explanation_need {
        1.0
    } else {
        0.0
    }
}
