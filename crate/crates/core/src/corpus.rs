//! Labeled app-review datasets: the canonical CSV format, validation, and
//! summary statistics.
//!
//! The canonical file is UTF-8 CSV with the header
//! `review_id,app_name,source_store,review_text,explanation_need,category`.
//! `explanation_need` is `0` or `1`; `category` is one of `training`,
//! `interaction`, `business`, `dissatisfaction`, `errata` on positive rows and
//! empty on negative rows.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = [
    "review_id",
    "app_name",
    "source_store",
    "review_text",
    "explanation_need",
    "category",
];

/// Whether the knowledge gap is the user's only issue or rides on top of an
/// underlying deficiency of the app.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcernLevel {
    Primary,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaxonomyCategory {
    Training,
    Interaction,
    Business,
    Dissatisfaction,
    Errata,
}

impl TaxonomyCategory {
    pub const ALL: [TaxonomyCategory; 5] = [
        TaxonomyCategory::Training,
        TaxonomyCategory::Interaction,
        TaxonomyCategory::Business,
        TaxonomyCategory::Dissatisfaction,
        TaxonomyCategory::Errata,
    ];

    pub fn concern_level(self) -> ConcernLevel {
        match self {
            TaxonomyCategory::Training
            | TaxonomyCategory::Interaction
            | TaxonomyCategory::Business => ConcernLevel::Primary,
            TaxonomyCategory::Dissatisfaction | TaxonomyCategory::Errata => {
                ConcernLevel::Secondary
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaxonomyCategory::Training => "training",
            TaxonomyCategory::Interaction => "interaction",
            TaxonomyCategory::Business => "business",
            TaxonomyCategory::Dissatisfaction => "dissatisfaction",
            TaxonomyCategory::Errata => "errata",
        }
    }

    /// Three-letter column label used in tabular output.
    pub fn short_label(self) -> &'static str {
        match self {
            TaxonomyCategory::Training => "Tra",
            TaxonomyCategory::Interaction => "Int",
            TaxonomyCategory::Business => "Bus",
            TaxonomyCategory::Dissatisfaction => "Dis",
            TaxonomyCategory::Errata => "Err",
        }
    }

    /// Aspects grouped under each category. Documentation only; the data
    /// model carries labels at category granularity.
    pub fn aspects(self) -> &'static [&'static str] {
        match self {
            TaxonomyCategory::Training => &["Instruction", "Features Offered", "Effect-Of"],
            TaxonomyCategory::Interaction => &["Algorithm", "Design Decision", "Signification"],
            TaxonomyCategory::Business => &["Mission", "Purchase & Subscription", "Privacy"],
            TaxonomyCategory::Dissatisfaction => &["Change", "Feature Gap", "Compatibility"],
            TaxonomyCategory::Errata => &["Fix", "Cause", "Confusing Message"],
        }
    }
}

impl fmt::Display for TaxonomyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaxonomyCategory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        TaxonomyCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == lower)
            .ok_or_else(|| format!("unknown category '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceStore {
    Apple,
    Google,
    Unknown,
}

impl SourceStore {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceStore::Apple => "apple",
            SourceStore::Google => "google",
            SourceStore::Unknown => "unknown",
        }
    }
}

impl FromStr for SourceStore {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "apple" => Ok(SourceStore::Apple),
            "google" => Ok(SourceStore::Google),
            "unknown" => Ok(SourceStore::Unknown),
            other => Err(format!("unknown source_store '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub app_name: String,
    pub source_store: SourceStore,
    pub text: String,
    pub explanation_need: bool,
    pub category: Option<TaxonomyCategory>,
}

impl Review {
    /// Checks the per-review invariants, returning a description of the
    /// first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.review_id.trim().is_empty() {
            return Err("empty review_id".into());
        }
        if self.text.trim().is_empty() {
            return Err("empty review text".into());
        }
        match (self.explanation_need, self.category) {
            (false, Some(_)) => Err("category on negative row".into()),
            (true, None) => Err("missing category on positive row".into()),
            _ => Ok(()),
        }
    }
}

/// A validated, immutable collection of reviews.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledDataset {
    name: String,
    reviews: Vec<Review>,
}

impl LabeledDataset {
    /// Builds a dataset after checking every review invariant and id
    /// uniqueness. Violations are reported with 1-based positions.
    pub fn new(name: impl Into<String>, reviews: Vec<Review>) -> Result<Self> {
        let name = name.into();
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(reviews.len());
        for (i, r) in reviews.iter().enumerate() {
            let row = i + 1;
            if let Err(violation) = r.validate() {
                return Err(Error::Row {
                    path: name.clone(),
                    row,
                    violation,
                });
            }
            if let Some(first) = seen.insert(r.review_id.as_str(), row) {
                return Err(Error::Row {
                    path: name.clone(),
                    row,
                    violation: format!(
                        "duplicate review_id '{}' (first seen at row {first})",
                        r.review_id
                    ),
                });
            }
        }
        Ok(LabeledDataset { name, reviews })
    }

    pub(crate) fn from_validated(name: String, reviews: Vec<Review>) -> Self {
        LabeledDataset { name, reviews }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.reviews.iter().filter(|r| r.explanation_need).count()
    }

    /// Distinct app names in order of first appearance.
    pub fn apps(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for r in &self.reviews {
            if seen.insert(r.app_name.as_str()) {
                out.push(r.app_name.clone());
            }
        }
        out
    }

    /// Keeps the reviews at `indices` (in the given order) under a new name.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            name: name.into(),
            reviews: indices.iter().map(|&i| self.reviews[i].clone()).collect(),
        }
    }

    pub fn into_reviews(self) -> Vec<Review> {
        self.reviews
    }
}

fn parse_flag(raw: &str) -> std::result::Result<bool, String> {
    match raw.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("bad explanation_need value '{other}' (expected 0 or 1)")),
    }
}

/// Loads a canonical dataset CSV.
pub fn load_dataset(path: impl AsRef<Path>, name: &str) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, name, &path.display().to_string())
}

/// Reads a canonical dataset CSV from any reader; `origin` names the source
/// in error messages.
pub fn read_dataset<R: Read>(reader: R, name: &str, origin: &str) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let row_err = |row: usize, violation: String| Error::Row {
        path: origin.to_string(),
        row,
        violation,
    };

    let headers = rdr.headers()?.clone();
    let mut columns = [0usize; 6];
    for (slot, wanted) in columns.iter_mut().zip(CSV_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h.trim().trim_start_matches('\u{feff}') == wanted)
            .ok_or_else(|| row_err(1, format!("missing column '{wanted}' in header")))?;
    }

    let mut reviews = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(reviews.len() + 2, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(row_err(
                row,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let field = |i: usize| record.get(columns[i]).unwrap_or_default();

        let explanation_need = parse_flag(field(4)).map_err(|v| row_err(row, v))?;
        let category_raw = field(5).trim();
        let category = if category_raw.is_empty() {
            None
        } else {
            Some(category_raw.parse::<TaxonomyCategory>().map_err(|v| row_err(row, v))?)
        };
        let review = Review {
            review_id: field(0).trim().to_string(),
            app_name: field(1).trim().to_string(),
            source_store: field(2).parse().map_err(|v| row_err(row, v))?,
            text: field(3).to_string(),
            explanation_need,
            category,
        };
        review.validate().map_err(|v| row_err(row, v))?;
        if let Some(first) = seen.insert(review.review_id.clone(), row) {
            return Err(row_err(
                row,
                format!(
                    "duplicate review_id '{}' (first seen at row {first})",
                    review.review_id
                ),
            ));
        }
        reviews.push(review);
    }
    Ok(LabeledDataset::from_validated(name.to_string(), reviews))
}

/// Writes `ds` in the canonical CSV format.
pub fn write_dataset<W: Write>(ds: &LabeledDataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    for r in ds.reviews() {
        wtr.write_record([
            r.review_id.as_str(),
            r.app_name.as_str(),
            r.source_store.as_str(),
            r.text.as_str(),
            if r.explanation_need { "1" } else { "0" },
            r.category.map_or("", TaxonomyCategory::as_str),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<dataset writer>", e))?;
    Ok(())
}

pub fn save_dataset(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(ds, std::io::BufWriter::new(file))
}

/// Percentage in tenths of a percent, rounded half-up, computed on integers
/// so that table values like 4.45% never suffer float drift.
pub fn pct_tenths(part: usize, whole: usize) -> u64 {
    if whole == 0 {
        return 0;
    }
    let (part, whole) = (part as u128, whole as u128);
    ((2 * 1000 * part + whole) / (2 * whole)) as u64
}

/// `part/whole` as a one-decimal percentage string, e.g. `"5.1%"`.
pub fn format_pct(part: usize, whole: usize) -> String {
    let t = pct_tenths(part, whole);
    format!("{}.{}%", t / 10, t % 10)
}

fn ratio(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryShare {
    pub count: usize,
    /// Share of all explanation needs.
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppStats {
    pub total: usize,
    pub needs: usize,
    pub needs_pct: f64,
    pub per_category: BTreeMap<TaxonomyCategory, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub name: String,
    pub total: usize,
    pub needs: usize,
    pub needs_pct: f64,
    pub per_category: BTreeMap<TaxonomyCategory, CategoryShare>,
    pub per_app: BTreeMap<String, AppStats>,
    /// App names in order of first appearance, for table output.
    #[serde(skip)]
    pub app_order: Vec<String>,
}

impl DatasetStats {
    /// Share of explanation needs whose category is a primary concern.
    pub fn primary_concern_share(&self) -> f64 {
        let primary: usize = self
            .per_category
            .iter()
            .filter(|(c, _)| c.concern_level() == ConcernLevel::Primary)
            .map(|(_, s)| s.count)
            .sum();
        ratio(primary, self.needs)
    }

    /// Renders the overview table: one row per app plus a total row.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let cats = TaxonomyCategory::ALL;
        out.push_str("| App | Size | Expl. Needs |");
        for c in cats {
            out.push_str(&format!(" {} |", c.short_label()));
        }
        out.push_str("\n|---|---:|---:|");
        for _ in cats {
            out.push_str("---:|");
        }
        out.push('\n');
        for app in &self.app_order {
            let s = &self.per_app[app];
            out.push_str(&format!(
                "| {app} | {} | {} ({}) |",
                s.total,
                s.needs,
                format_pct(s.needs, s.total)
            ));
            for c in cats {
                match s.per_category.get(&c).copied().unwrap_or(0) {
                    0 => out.push_str("  |"),
                    n => out.push_str(&format!(" {n} |")),
                }
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "| **Total** | {} | {} ({}) |",
            self.total,
            self.needs,
            format_pct(self.needs, self.total)
        ));
        for c in cats {
            let n = self.per_category[&c].count;
            out.push_str(&format!(" {n} ({}) |", format_pct(n, self.needs)));
        }
        out.push('\n');
        out
    }
}

pub fn dataset_stats(ds: &LabeledDataset) -> DatasetStats {
    let mut cat_counts: BTreeMap<TaxonomyCategory, usize> =
        TaxonomyCategory::ALL.into_iter().map(|c| (c, 0)).collect();
    let mut per_app: BTreeMap<String, AppStats> = BTreeMap::new();
    let mut needs = 0;
    for r in ds.reviews() {
        let app = per_app.entry(r.app_name.clone()).or_insert_with(|| AppStats {
            total: 0,
            needs: 0,
            needs_pct: 0.0,
            per_category: BTreeMap::new(),
        });
        app.total += 1;
        if r.explanation_need {
            needs += 1;
            app.needs += 1;
            if let Some(c) = r.category {
                *cat_counts.entry(c).or_default() += 1;
                *app.per_category.entry(c).or_default() += 1;
            }
        }
    }
    for s in per_app.values_mut() {
        s.needs_pct = ratio(s.needs, s.total);
    }
    let per_category = cat_counts
        .into_iter()
        .map(|(c, count)| {
            (
                c,
                CategoryShare {
                    count,
                    pct: ratio(count, needs),
                },
            )
        })
        .collect();
    DatasetStats {
        name: ds.name().to_string(),
        total: ds.len(),
        needs,
        needs_pct: ratio(needs, ds.len()),
        per_category,
        per_app,
        app_order: ds.apps(),
    }
}

/// Keeps the reviews whose app is in `apps`, preserving order.
pub fn filter_by_apps<S: AsRef<str>>(ds: &LabeledDataset, apps: &[S]) -> Result<LabeledDataset> {
    if apps.is_empty() {
        return Err(Error::invalid("app filter must name at least one app"));
    }
    let available = ds.apps();
    let wanted: BTreeSet<&str> = apps.iter().map(AsRef::as_ref).collect();
    let unknown: Vec<String> = wanted
        .iter()
        .filter(|a| !available.iter().any(|x| x == *a))
        .map(|a| a.to_string())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownApps { unknown, available });
    }
    let reviews = ds
        .reviews()
        .iter()
        .filter(|r| wanted.contains(r.app_name.as_str()))
        .cloned()
        .collect();
    Ok(LabeledDataset::from_validated(ds.name().to_string(), reviews))
}
