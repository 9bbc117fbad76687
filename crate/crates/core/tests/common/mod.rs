//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use explneed::corpus::{save_dataset, LabeledDataset, Review, SourceStore, TaxonomyCategory};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One row of the dataset overview table: app, size, and explanation needs
/// per category (Training, Interaction, Business, Dissatisfaction, Errata).
pub struct OverviewRow {
    pub app: &'static str,
    pub size: usize,
    pub categories: [usize; 5],
}

impl OverviewRow {
    pub fn needs(&self) -> usize {
        self.categories.iter().sum()
    }
}

const fn row(app: &'static str, size: usize, categories: [usize; 5]) -> OverviewRow {
    OverviewRow { app, size, categories }
}

pub const TAX_ROWS: [OverviewRow; 8] = [
    row("Baby Tracker", 200, [3, 1, 1, 3, 0]),
    row("Experian Credit", 210, [0, 5, 1, 3, 1]),
    row("FollowMyHealth", 229, [4, 0, 1, 3, 3]),
    row("Stock Master", 226, [3, 2, 1, 3, 0]),
    row("Here We Go", 220, [1, 1, 1, 3, 3]),
    row("MiBand", 217, [2, 2, 1, 0, 4]),
    row("Waze", 221, [1, 0, 0, 4, 3]),
    row("Yazio", 207, [3, 2, 0, 7, 0]),
];

pub const CROSSVAL_EXTRA_ROWS: [OverviewRow; 10] = [
    row("Unkown Apps", 2449, [19, 19, 13, 41, 16]),
    row("Amazon Prime", 100, [0, 2, 3, 3, 2]),
    row("AutoSleep", 100, [1, 1, 0, 0, 0]),
    row("Disney+", 100, [1, 1, 3, 2, 2]),
    row("HotSchedules", 100, [3, 1, 5, 0, 3]),
    row("McDonald’s", 100, [0, 6, 4, 4, 1]),
    row("Procreate Pocket", 100, [5, 0, 0, 3, 0]),
    row("SkyView", 100, [3, 2, 1, 3, 0]),
    row("Workoutdoords", 100, [0, 0, 0, 0, 0]),
    row("YouTube", 99, [0, 3, 2, 6, 1]),
];

pub const GENERAL_ROWS: [OverviewRow; 4] = [
    row("WeChat", 125, [2, 9, 0, 3, 4]),
    row("Memrise", 122, [1, 0, 0, 0, 0]),
    row("Duolingo", 118, [0, 0, 0, 1, 1]),
    row("GitHub", 121, [1, 2, 0, 0, 0]),
];

/// Rule outcomes per General-DS app reconstructed from the published
/// rule-based holdout results: (true positives, false positives).
pub const GENERAL_RULE_OUTCOMES: [(usize, usize); 4] = [(12, 17), (1, 2), (1, 2), (2, 4)];

const NEED_FIRING: [&str; 4] = [
    "why does the app force portrait mode?",
    "how do I export my {w} notes?",
    "Why is the {w} button gone now",
    "what does the red {w} icon mean?",
];
const NEED_SILENT: [&str; 3] = [
    "I don't understand how the {w} sync works, please explain it.",
    "Would you please keep us updated on what's going on with {w}.",
    "no idea what the {w} setting is supposed to do",
];
const OTHER_FIRING: [&str; 3] = [
    "best {w} app ever? absolutely, five stars",
    "who needs anything else? {w} does it all",
    "love it, why would anyone use another {w} tracker",
];
const OTHER_SILENT: [&str; 4] = [
    "great app, love it",
    "works fine with my {w} every single day",
    "five stars, the {w} feature is excellent",
    "crashes a lot since the update, fix the {w} screen",
];
const FILLER: [&str; 12] = [
    "calendar", "photo", "login", "widget", "payment", "map", "timer", "profile", "music", "streak", "backup",
    "camera",
];

fn text(templates: &[&str], rng: &mut ChaCha8Rng) -> String {
    let t = templates[rng.gen_range(0..templates.len())];
    t.replace("{w}", FILLER[rng.gen_range(0..FILLER.len())])
}

/// Builds reviews for the table rows. Within each app, `firing[i]` gives how
/// many positives and negatives should trigger the question-mark / "why"
/// rule; without it nothing about firing is controlled beyond the templates.
pub fn corpus(
    name: &str,
    rows: &[OverviewRow],
    rule_outcomes: Option<&[(usize, usize)]>,
    seed: u64,
) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reviews = Vec::new();
    for (a, r) in rows.iter().enumerate() {
        let (tp, fp) = rule_outcomes.map_or((r.needs() / 2, 0), |o| o[a]);
        let mut labels: Vec<Option<TaxonomyCategory>> = Vec::new();
        for (c, &count) in r.categories.iter().enumerate() {
            labels.extend(std::iter::repeat_n(Some(TaxonomyCategory::ALL[c]), count));
        }
        labels.extend(std::iter::repeat_n(None, r.size - r.needs()));
        labels.shuffle(&mut rng);
        let (mut pos_seen, mut neg_seen) = (0, 0);
        for (i, category) in labels.into_iter().enumerate() {
            let need = category.is_some();
            let body = if need {
                pos_seen += 1;
                if pos_seen <= tp { text(&NEED_FIRING, &mut rng) } else { text(&NEED_SILENT, &mut rng) }
            } else {
                neg_seen += 1;
                if neg_seen <= fp { text(&OTHER_FIRING, &mut rng) } else { text(&OTHER_SILENT, &mut rng) }
            };
            reviews.push(Review {
                review_id: format!("{}-{a:02}-{i:04}", name),
                app_name: r.app.to_string(),
                source_store: if i % 2 == 0 { SourceStore::Google } else { SourceStore::Apple },
                text: body,
                explanation_need: need,
                category,
            });
        }
    }
    LabeledDataset::new(name, reviews).unwrap()
}

pub fn crossval_rows() -> Vec<&'static OverviewRow> {
    TAX_ROWS.iter().chain(CROSSVAL_EXTRA_ROWS.iter()).collect()
}

pub fn crossval_corpus(seed: u64) -> LabeledDataset {
    let rows: Vec<OverviewRow> = crossval_rows()
        .into_iter()
        .map(|r| OverviewRow { app: r.app, size: r.size, categories: r.categories })
        .collect();
    corpus("CrossVal-DS", &rows, None, seed)
}

pub fn general_corpus(seed: u64) -> LabeledDataset {
    corpus("General-DS", &GENERAL_ROWS, Some(&GENERAL_RULE_OUTCOMES), seed)
}

/// Balanced 261 + 261 corpus whose rule outcomes reconstruct the published
/// rule-based cross-validation row: 240 needs and 15 other reviews fire.
pub const BALANCED_RULE_OUTCOME: (usize, usize) = (240, 15);

pub fn balanced_corpus(seed: u64) -> LabeledDataset {
    let row = OverviewRow { app: "Balanced", size: 522, categories: [52, 52, 52, 52, 53] };
    corpus("Balanced", &[row], Some(&[BALANCED_RULE_OUTCOME]), seed)
}

pub fn full_corpus(seed: u64) -> LabeledDataset {
    let mut reviews = crossval_corpus(seed).into_reviews();
    reviews.extend(general_corpus(seed + 1).into_reviews());
    LabeledDataset::new("All", reviews).unwrap()
}

/// Small labeled corpus for classifier smoke tests: needs phrased as
/// questions, the rest as praise or complaints.
pub fn toy_corpus(n_pos: usize, n_neg: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<bool> = (0..n_pos + n_neg).map(|i| i < n_pos).collect();
    labels.shuffle(&mut rng);
    let mut reviews = Vec::new();
    for (i, need) in labels.into_iter().enumerate() {
        let body = if need {
            text(&[NEED_FIRING.as_slice(), NEED_SILENT.as_slice()].concat(), &mut rng)
        } else {
            text(&[OTHER_SILENT.as_slice(), OTHER_FIRING.as_slice()].concat(), &mut rng)
        };
        reviews.push(Review {
            review_id: format!("t{i:04}"),
            app_name: ["Alpha", "Beta", "Gamma"][i % 3].to_string(),
            source_store: SourceStore::Unknown,
            text: body,
            explanation_need: need,
            category: need.then_some(TaxonomyCategory::Interaction),
        });
    }
    LabeledDataset::new("toy", reviews).unwrap()
}

pub fn write(ds: &LabeledDataset, dir: &Path, file: &str) -> PathBuf {
    let p = dir.join(file);
    save_dataset(ds, &p).unwrap();
    p
}
