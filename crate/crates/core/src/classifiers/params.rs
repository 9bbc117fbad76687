//! Hyperparameter values and their per-algorithm typed forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifiers::Algorithm;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl fmt::Display for HyperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperValue::Bool(b) => write!(f, "{b}"),
            HyperValue::Int(i) => write!(f, "{i}"),
            HyperValue::Float(x) => write!(f, "{x}"),
            HyperValue::Str(s) => f.write_str(s),
        }
    }
}

impl From<bool> for HyperValue {
    fn from(v: bool) -> Self {
        HyperValue::Bool(v)
    }
}
impl From<i64> for HyperValue {
    fn from(v: i64) -> Self {
        HyperValue::Int(v)
    }
}
impl From<f64> for HyperValue {
    fn from(v: f64) -> Self {
        HyperValue::Float(v)
    }
}
impl From<&str> for HyperValue {
    fn from(v: &str) -> Self {
        HyperValue::Str(v.to_string())
    }
}

pub type HyperMap = BTreeMap<String, HyperValue>;

/// Reads typed values out of a hyperparameter map and rejects keys nobody
/// asked for.
pub(crate) struct ParamReader<'a> {
    algorithm: Algorithm,
    map: &'a HyperMap,
    used: BTreeSet<&'static str>,
}

impl<'a> ParamReader<'a> {
    pub fn new(algorithm: Algorithm, map: &'a HyperMap) -> Self {
        ParamReader {
            algorithm,
            map,
            used: BTreeSet::new(),
        }
    }

    pub fn err(&self, message: impl Into<String>) -> Error {
        Error::Hyperparameter {
            algorithm: self.algorithm.as_str().to_string(),
            message: message.into(),
        }
    }

    fn get(&mut self, key: &'static str) -> Option<&'a HyperValue> {
        self.used.insert(key);
        self.map.get(key)
    }

    pub fn f64_or(&mut self, key: &'static str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(HyperValue::Float(x)) => Ok(*x),
            Some(HyperValue::Int(i)) => Ok(*i as f64),
            Some(other) => Err(self.err(format!("{key} must be a number, got {other}"))),
        }
    }

    pub fn positive_f64_or(&mut self, key: &'static str, default: f64) -> Result<f64> {
        let v = self.f64_or(key, default)?;
        if !(v.is_finite() && v > 0.0) {
            return Err(self.err(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn usize_or(&mut self, key: &'static str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(HyperValue::Int(i)) if *i >= 0 => Ok(*i as usize),
            Some(other) => Err(self.err(format!("{key} must be a non-negative integer, got {other}"))),
        }
    }

    pub fn positive_usize_or(&mut self, key: &'static str, default: usize) -> Result<usize> {
        let v = self.usize_or(key, default)?;
        if v == 0 {
            return Err(self.err(format!("{key} must be at least 1")));
        }
        Ok(v)
    }

    pub fn optional_usize(&mut self, key: &'static str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(HyperValue::Str(s)) if s.eq_ignore_ascii_case("none") => Ok(None),
            Some(HyperValue::Int(i)) if *i >= 1 => Ok(Some(*i as usize)),
            Some(other) => Err(self.err(format!("{key} must be a positive integer or \"none\", got {other}"))),
        }
    }

    pub fn bool_or(&mut self, key: &'static str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(HyperValue::Bool(b)) => Ok(*b),
            Some(other) => Err(self.err(format!("{key} must be true or false, got {other}"))),
        }
    }

    pub fn choice_or(
        &mut self,
        key: &'static str,
        allowed: &[&'static str],
        default: &'static str,
    ) -> Result<&'static str> {
        match self.get(key) {
            None => Ok(default),
            Some(HyperValue::Str(s)) => allowed
                .iter()
                .find(|a| a.eq_ignore_ascii_case(s))
                .copied()
                .ok_or_else(|| self.err(format!("{key} must be one of {allowed:?}, got \"{s}\""))),
            Some(other) => Err(self.err(format!("{key} must be one of {allowed:?}, got {other}"))),
        }
    }

    pub fn raw(&mut self, key: &'static str) -> Option<&'a HyperValue> {
        self.get(key)
    }

    /// Fails on any key that was never read.
    pub fn finish(self) -> Result<()> {
        let unknown: Vec<&String> = self
            .map
            .keys()
            .filter(|k| !self.used.contains(k.as_str()))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(self.err(format!(
                "unknown hyperparameter(s) {unknown:?}; accepted: {:?}",
                self.used
            )))
        }
    }
}

/// How many features to consider per split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `floor(sqrt(n_features))`; `auto` is an alias.
    Sqrt,
    /// `floor(log2(n_features))`.
    Log2,
    Count(usize),
    Fraction(f64),
}

impl MaxFeatures {
    pub(crate) fn read(r: &mut ParamReader<'_>, default: MaxFeatures) -> Result<Self> {
        match r.raw("max_features") {
            None => Ok(default),
            Some(HyperValue::Str(s)) => match s.to_ascii_lowercase().as_str() {
                "auto" | "sqrt" => Ok(MaxFeatures::Sqrt),
                "log2" => Ok(MaxFeatures::Log2),
                "none" | "all" => Ok(MaxFeatures::All),
                other => Err(r.err(format!("max_features: unknown value \"{other}\""))),
            },
            Some(HyperValue::Int(i)) if *i >= 1 => Ok(MaxFeatures::Count(*i as usize)),
            Some(HyperValue::Float(f)) if *f > 0.0 && *f <= 1.0 => Ok(MaxFeatures::Fraction(*f)),
            Some(other) => Err(r.err(format!("max_features: invalid value {other}"))),
        }
    }

    pub fn to_value(self) -> HyperValue {
        match self {
            MaxFeatures::All => "none".into(),
            MaxFeatures::Sqrt => "sqrt".into(),
            MaxFeatures::Log2 => "log2".into(),
            MaxFeatures::Count(n) => HyperValue::Int(n as i64),
            MaxFeatures::Fraction(f) => HyperValue::Float(f),
        }
    }

    /// Concrete feature count for a vocabulary of `n_features`, at least 1.
    pub fn resolve(self, n_features: usize) -> usize {
        let n = n_features.max(1);
        let m = match self {
            MaxFeatures::All => n,
            MaxFeatures::Sqrt => (n as f64).sqrt().floor() as usize,
            MaxFeatures::Log2 => (n as f64).log2().floor() as usize,
            MaxFeatures::Count(c) => c,
            MaxFeatures::Fraction(f) => (f * n as f64).floor() as usize,
        };
        m.clamp(1, n)
    }
}
