//! The predictions exchange file: `review_id,predicted,score`.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledDataset;
use crate::error::{Error, Result};

pub const PREDICTIONS_HEADER: [&str; 3] = ["review_id", "predicted", "score"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub review_id: String,
    pub predicted: bool,
    pub score: f64,
}

pub fn write_predictions<W: Write>(rows: &[PredictionRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PREDICTIONS_HEADER)?;
    for r in rows {
        w.write_record([
            r.review_id.as_str(),
            if r.predicted { "1" } else { "0" },
            &r.score.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<predictions>", e))?;
    Ok(())
}

pub fn save_predictions(rows: &[PredictionRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_predictions(rows, std::io::BufWriter::new(file))
}

pub fn read_predictions<R: Read>(reader: R, origin: &str) -> Result<Vec<PredictionRow>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Row {
            path: origin.to_string(),
            row: 1,
            violation: format!("missing column \"{name}\""),
        })
    };
    let (ci, cp, cs) = (column("review_id")?, column("predicted")?, column("score")?);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(i + 2, |p| p.line() as usize);
        let bad = |violation: String| Error::Row {
            path: origin.to_string(),
            row,
            violation,
        };
        let field = |c: usize, name: &str| {
            record
                .get(c)
                .map(str::trim)
                .ok_or_else(|| bad(format!("missing {name}")))
        };
        let review_id = field(ci, "review_id")?.to_string();
        if review_id.is_empty() {
            return Err(bad("empty review_id".into()));
        }
        let predicted = match field(cp, "predicted")? {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("predicted must be 0 or 1, got \"{other}\""))),
        };
        let raw = field(cs, "score")?;
        let score: f64 = raw
            .parse()
            .map_err(|_| bad(format!("score \"{raw}\" is not a number")))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(bad(format!("score {score} outside [0, 1]")));
        }
        rows.push(PredictionRow {
            review_id,
            predicted,
            score,
        });
    }
    Ok(rows)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictions(file, &path.display().to_string())
}

/// Predicted labels in the order of `gold`. Every gold review must appear
/// exactly once; ids unknown to `gold` are ignored with a warning.
pub fn align_predictions(gold: &LabeledDataset, rows: &[PredictionRow]) -> Result<Vec<bool>> {
    let mut by_id: HashMap<&str, Vec<bool>> = HashMap::new();
    for r in rows {
        by_id.entry(r.review_id.as_str()).or_default().push(r.predicted);
    }
    let mut missing = Vec::new();
    let mut duplicated = Vec::new();
    let mut labels = Vec::with_capacity(gold.len());
    for review in gold.reviews() {
        match by_id.get(review.review_id.as_str()).map(Vec::as_slice) {
            None | Some([]) => missing.push(review.review_id.clone()),
            Some([p]) => labels.push(*p),
            Some(_) => duplicated.push(review.review_id.clone()),
        }
    }
    if !missing.is_empty() || !duplicated.is_empty() {
        return Err(Error::invalid(format!(
            "predictions do not cover the gold set exactly once; missing ids {missing:?}; duplicated ids {duplicated:?}"
        )));
    }
    let gold_ids: HashSet<&str> = gold.reviews().iter().map(|r| r.review_id.as_str()).collect();
    let extra = by_id.keys().filter(|id| !gold_ids.contains(*id)).count();
    if extra > 0 {
        log::warn!("{extra} prediction id(s) are not in the gold dataset and were ignored");
    }
    Ok(labels)
}
