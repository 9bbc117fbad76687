//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if anything fails.
//!
//! Criteria that need the published corpora read canonical CSVs from
//! `EXPLNEED_CROSSVAL_CSV` and `EXPLNEED_GENERAL_CSV` and are skipped when
//! those are unset.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{crossval_corpus, toy_corpus};
use explneed::agreement::{cohens_kappa, gwets_ac1, percent_agreement, ContingencyTable2x2};
use explneed::classifiers::{Algorithm, ClassifierSpec, Embedding, Learned, TrainedModel};
use explneed::corpus::{load_dataset, LabeledDataset};
use explneed::evaluation::{
    compute_lambda, cross_validate, evaluate_holdout, f_beta, fit_fold, stratified_kfold, undersample, Averaging,
    BetaConfig, CvOptions, EvalReport, FittedMethod, Method, DEFAULT_BETA,
};
use explneed::features::{fit_vocabulary, tokenize, transform_tfidf, SparseVector, TokenStream};
use explneed::rule_based::classify_rule_based;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const AGREEMENT_TOL: f64 = 0.001;
const AGREEMENT_BUDGET: Duration = Duration::from_secs(1);
const LAMBDA_TOL: f64 = 0.01;
const PROPERTY_BUDGET: Duration = Duration::from_secs(120);
const PROPERTY_CASES: u32 = 64;
const ORACLE_TOL: f64 = 1e-9;
const RULE_TOL: f64 = 0.02;
const ML_TOL: f64 = 0.10;
const CV_FOLDS: usize = 10;
const CV_REPEATS: usize = 5;
const SEED: u64 = 20_230_601;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn verdict(check: Check) -> Verdict {
    match check {
        Ok(detail) => Verdict::Pass(detail),
        Err(detail) => Verdict::Fail(detail),
    }
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Check {
    if (got - want).abs() <= tol {
        Ok(format!("{label} {got:.4} vs {want}"))
    } else {
        Err(format!("{label} {got:.4} vs {want} (tol {tol})"))
    }
}

fn all(checks: Vec<Check>) -> Check {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for c in checks {
        match c {
            Ok(s) => ok.push(s),
            Err(s) => bad.push(s),
        }
    }
    if bad.is_empty() {
        Ok(ok.join("; "))
    } else {
        Err(bad.join("; "))
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    match result {
        Ok(s) if elapsed <= budget => Ok(format!("{s}; {elapsed:.2?}")),
        Ok(s) => Err(format!("{s}; took {elapsed:.2?}, budget {budget:?}")),
        Err(s) => Err(s),
    }
}

fn agreement_exactness() -> Verdict {
    verdict(timed(AGREEMENT_BUDGET, || {
        let t = ContingencyTable2x2::new(448, 17, 7, 13).map_err(|e| e.to_string())?;
        all(vec![
            within("agreement", percent_agreement(&t), 0.9505, AGREEMENT_TOL),
            within("kappa", cohens_kappa(&t).value, 0.495, AGREEMENT_TOL),
            within("ac1", gwets_ac1(&t).value, 0.945, AGREEMENT_TOL),
        ])
    }))
}

fn beta_derivation() -> Verdict {
    let check = || -> Check {
        let lambda = compute_lambda(285, 5564).map_err(|e| e.to_string())?;
        let cfg = BetaConfig::new(30.0, 30.0, lambda).map_err(|e| e.to_string())?;
        all(vec![
            within("lambda", lambda, 19.52, LAMBDA_TOL),
            within("beta with equal times", cfg.beta, lambda, 1e-12),
        ])
    };
    verdict(check())
}

fn f_beta_spot_checks() -> Verdict {
    let two_dp = |x: f64| (x * 100.0).round() / 100.0;
    let spot = |p: f64, r: f64, want: f64| -> Check {
        let got = two_dp(f_beta(p, r, DEFAULT_BETA));
        if got == want {
            Ok(format!("F({p},{r}) = {got:.2}"))
        } else {
            Err(format!("F({p},{r}) = {got:.2}, expected {want}"))
        }
    };
    verdict(all(vec![spot(0.94, 0.92, 0.92), spot(0.37, 0.79, 0.79)]))
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: PROPERTY_CASES,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn property<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check {
    runner()
        .run(&strategy, test)
        .map(|()| name.to_string())
        .map_err(|e| format!("{name}: {e}"))
}

fn f_beta_properties() -> Check {
    property(
        "f_beta monotone and limits",
        (0.01f64..=1.0, 0.01f64..=1.0, 0.0f64..0.5, 0.0f64..40.0),
        |(p, r, dp, beta)| {
            let f = f_beta(p, r, beta);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(f_beta((p + dp).min(1.0), r, beta) >= f - 1e-12);
            prop_assert!(f_beta(p, (r + dp).min(1.0), beta) >= f - 1e-12);
            prop_assert!((f_beta(p, r, 0.0) - p).abs() < 1e-12);
            prop_assert!((f_beta(p, r, 1e6) - r).abs() < 1e-6);
            Ok(())
        },
    )
}

fn undersampling_properties() -> Check {
    let ds = crossval_corpus(SEED);
    let balanced = undersample(&ds, SEED).map_err(|e| e.to_string())?;
    if (ds.len(), ds.positives(), balanced.len(), balanced.positives()) != (5078, 261, 522, 261) {
        return Err(format!(
            "undersampling {}/{} gave {}/{}",
            ds.len(),
            ds.positives(),
            balanced.len(),
            balanced.positives()
        ));
    }
    property(
        "undersampling balance",
        (1usize..40, 1usize..40, any::<u64>()),
        |(n_pos, n_neg, seed)| {
            let b = undersample(&toy_corpus(n_pos, n_neg, seed % 97), seed).unwrap();
            prop_assert_eq!(b.len(), 2 * n_pos.min(n_neg));
            prop_assert_eq!(b.positives(), n_pos.min(n_neg));
            Ok(())
        },
    )
    .map(|s| format!("{s} (5078/261 -> 522)"))
}

fn fold_properties() -> Check {
    property(
        "stratified folds",
        (2usize..30, 2usize..30, 2usize..6, any::<u64>()),
        |(n_pos, n_neg, k, seed)| {
            prop_assume!(n_pos >= k && n_neg >= k);
            let ds = toy_corpus(n_pos, n_neg, seed % 97);
            let plans = stratified_kfold(&ds, k, seed).unwrap();
            let mut seen = vec![0usize; ds.len()];
            for plan in &plans {
                let test: BTreeSet<usize> = plan.test.iter().copied().collect();
                prop_assert!(plan.train.iter().all(|i| !test.contains(i)));
                prop_assert_eq!(plan.train.len() + plan.test.len(), ds.len());
                plan.test.iter().for_each(|&i| seen[i] += 1);
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            for class in [true, false] {
                let counts: Vec<usize> = plans
                    .iter()
                    .map(|p| p.test.iter().filter(|&&i| ds.reviews()[i].explanation_need == class).count())
                    .collect();
                prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
            Ok(())
        },
    )
}

fn leakage_property() -> Check {
    let reviews = toy_corpus(15, 15, 4)
        .into_reviews()
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.text = format!("{} marker{i}", r.text);
            r
        })
        .collect();
    let ds = LabeledDataset::new("marked", reviews).map_err(|e| e.to_string())?;
    let method = Method::Classifier {
        spec: ClassifierSpec::new(Algorithm::LogisticRegression, Embedding::Tfidf),
    };
    for plan in stratified_kfold(&ds, 5, SEED).map_err(|e| e.to_string())? {
        let fitted = fit_fold(&method, &ds, &plan.train, SEED).map_err(|e| e.to_string())?;
        let vocab = fitted.model().ok_or("fold has no model")?.vocabulary();
        if let Some(i) = plan.test.iter().find(|&&i| vocab.index_of(&format!("marker{i}")).is_some()) {
            return Err(format!("vocabulary leaked test review {i}"));
        }
    }
    Ok("no-leakage vocabulary".into())
}

fn rule_properties() -> Check {
    property("rule-based monotone", "\\PC{0,80}", |s: String| {
        let marked = s + "?";
        prop_assert!(classify_rule_based(&marked).explanation_need);
        Ok(())
    })?;
    property("rule-based case-invariant", "[a-zA-Z ?.,'!]{0,60}", |s: String| {
        let base = classify_rule_based(&s).explanation_need;
        prop_assert_eq!(base, classify_rule_based(&s.to_uppercase()).explanation_need);
        prop_assert_eq!(base, classify_rule_based(&s.to_lowercase()).explanation_need);
        Ok(())
    })?;
    Ok("rule-based monotone and case-invariant".into())
}

fn dense(values: &[f64]) -> SparseVector {
    SparseVector::from_pairs(values.len(), values.iter().copied().enumerate().filter(|p| p.1 != 0.0).collect())
        .unwrap()
}

fn fit_dense(spec: &ClassifierSpec, rows: &[Vec<f64>], y: &[bool]) -> TrainedModel {
    let doc: TokenStream = (0..rows[0].len()).map(|i| format!("f{i:03}")).collect();
    let vocab = fit_vocabulary(&[doc]).unwrap();
    let x: Vec<SparseVector> = rows.iter().map(|r| dense(r)).collect();
    TrainedModel::fit(spec, vocab, &x, y, 0).unwrap()
}

fn count_rows() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
    (2usize..8, 1usize..5).prop_flat_map(|(n, dim)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..4, dim), n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_filter("both classes", |(_, y)| y.iter().any(|&b| b) && y.iter().any(|&b| !b))
            .prop_map(|(rows, y)| (rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect(), y))
    })
}

fn classifier_properties() -> Check {
    property(
        "naive bayes posterior normalization",
        (count_rows(), 0.01f64..5.0, any::<bool>(), prop::collection::vec(0u8..20, 4)),
        |((rows, y), alpha, fit_prior, probe)| {
            let spec = ClassifierSpec::new(Algorithm::NaiveBayes, Embedding::Bow)
                .with("alpha", alpha)
                .with("fit_prior", fit_prior);
            let model = fit_dense(&spec, &rows, &y);
            let Learned::NaiveBayes(nb) = model.learned() else {
                return Err(TestCaseError::fail("not a naive bayes model"));
            };
            let x: Vec<f64> = probe.iter().take(rows[0].len()).map(|&v| f64::from(v)).collect();
            let [neg, pos] = nb.class_posteriors(&dense(&x));
            prop_assert!((neg + pos - 1.0).abs() < 1e-9);
            Ok(())
        },
    )?;
    property(
        "knn duplicate invariance",
        (count_rows(), 1usize..4, 0.0f64..1.0),
        |((rows, y), copies, k_frac)| {
            let k = 1 + ((rows.len() - 1) as f64 * k_frac) as usize;
            let base = ClassifierSpec::new(Algorithm::Knn, Embedding::Bow).with("weights", "uniform");
            let original = fit_dense(&base.clone().with("n_neighbors", k as i64), &rows, &y);
            let dup_rows: Vec<Vec<f64>> = rows.iter().flat_map(|r| std::iter::repeat_n(r.clone(), copies)).collect();
            let dup_y: Vec<bool> = y.iter().flat_map(|&l| std::iter::repeat_n(l, copies)).collect();
            let duplicated = fit_dense(&base.with("n_neighbors", (k * copies) as i64), &dup_rows, &dup_y);
            for r in &rows {
                prop_assert_eq!(original.predict(&dense(r)).unwrap(), duplicated.predict(&dense(r)).unwrap());
            }
            Ok(())
        },
    )?;
    Ok("naive bayes posterior normalization; knn duplicate invariance".into())
}

fn cv_options(k: usize, repeats: usize, seed: u64) -> CvOptions {
    CvOptions {
        k,
        repeats,
        beta: DEFAULT_BETA,
        seed,
        averaging: Averaging::PerFold,
    }
}

fn rerun_property() -> Check {
    let ds = toy_corpus(20, 20, 6);
    let method = Method::Classifier {
        spec: ClassifierSpec::new(Algorithm::RandomForest, Embedding::Tfidf).with("n_estimators", 10i64),
    };
    let run = || -> Result<String, String> {
        let report = cross_validate(&method, &ds, &cv_options(5, 2, SEED)).map_err(|e| e.to_string())?;
        serde_json::to_string(&report).map_err(|e| e.to_string())
    };
    let first = run()?;
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    if first != run()? || first != single.install(run)? {
        return Err("re-run report differs".into());
    }
    Ok("byte-identical re-run".into())
}

fn property_suite() -> Verdict {
    verdict(timed(PROPERTY_BUDGET, || {
        all(vec![
            f_beta_properties(),
            undersampling_properties(),
            fold_properties(),
            leakage_property(),
            rule_properties(),
            classifier_properties(),
            rerun_property(),
        ])
    }))
}

fn oracle_equivalence() -> Verdict {
    let nb = || -> Check {
        let spec = ClassifierSpec::new(Algorithm::NaiveBayes, Embedding::Bow)
            .with("alpha", 1.0)
            .with("fit_prior", false);
        let model = TrainedModel::fit_texts(&spec, &["why broken?", "love it"], &[true, false], 0)
            .map_err(|e| e.to_string())?;
        // alpha = 1 over four terms, two counted tokens per class.
        let (p_pos, p_neg) = (2.0f64 / 6.0, 1.0f64 / 6.0);
        let bow = within(
            "nb bow posterior",
            model.predict_text("why why").score,
            p_pos * p_pos / (p_pos * p_pos + p_neg * p_neg),
            ORACLE_TOL,
        );
        let spec = ClassifierSpec::new(Algorithm::NaiveBayes, Embedding::Tfidf)
            .with("alpha", 1.0)
            .with("fit_prior", false);
        let model = TrainedModel::fit_texts(&spec, &["why broken?", "love it"], &[true, false], 0)
            .map_err(|e| e.to_string())?;
        let w = 1.0 / 2f64.sqrt();
        let total = 2.0 * w + 4.0;
        let (p_pos, p_neg) = ((w + 1.0) / total, 1.0 / total);
        let tfidf = within("nb tfidf posterior", model.predict_text("why why").score, p_pos / (p_pos + p_neg), ORACLE_TOL);
        all(vec![bow, tfidf])
    };
    let tfidf = || -> Check {
        let texts = [
            "why is the sync broken again",
            "love the new design",
            "why why why",
            "",
            "the app is slow and the sync is broken",
        ];
        let docs: Vec<TokenStream> = texts.iter().map(|t| tokenize(t)).collect();
        let vocab = fit_vocabulary(&docs).map_err(|e| e.to_string())?;
        let n = docs.len() as f64;
        let mut worst = 0.0f64;
        for d in &docs {
            let v = transform_tfidf(&vocab, d);
            let mut raw = std::collections::BTreeMap::<&str, f64>::new();
            for t in d.tokens() {
                let df = docs.iter().filter(|c| c.contains(t)).count() as f64;
                *raw.entry(t.as_str()).or_insert(0.0) += ((1.0 + n) / (1.0 + df)).ln() + 1.0;
            }
            let norm = raw.values().map(|x| x * x).sum::<f64>().sqrt();
            for (t, x) in raw {
                let idx = vocab.index_of(t).ok_or_else(|| format!("{t} missing from vocabulary"))?;
                worst = worst.max((v.get(idx) - x / norm).abs());
            }
        }
        if worst <= ORACLE_TOL {
            Ok(format!("tfidf max error {worst:.1e}"))
        } else {
            Err(format!("tfidf max error {worst:.1e}"))
        }
    };
    verdict(all(vec![nb(), tfidf()]))
}

fn published(var: &str, name: &str) -> Result<LabeledDataset, Verdict> {
    match std::env::var_os(var) {
        None => Err(Verdict::Skip(format!("{var} not set"))),
        Some(path) => load_dataset(&path, name).map_err(|e| Verdict::Fail(e.to_string())),
    }
}

fn balanced_crossval() -> Result<LabeledDataset, Verdict> {
    let ds = published("EXPLNEED_CROSSVAL_CSV", "CrossVal-DS")?;
    undersample(&ds, SEED).map_err(|e| Verdict::Fail(e.to_string()))
}

fn rule_based_cv() -> Verdict {
    let ds = match balanced_crossval() {
        Ok(ds) => ds,
        Err(v) => return v,
    };
    match cross_validate(&Method::RuleBased, &ds, &cv_options(CV_FOLDS, CV_REPEATS, SEED)) {
        Ok(r) => verdict(within("macro", r.macro_f_beta, 0.93, RULE_TOL).map(|s| format!("{s} on {} reviews", ds.len()))),
        Err(e) => Verdict::Fail(e.to_string()),
    }
}

fn rule_based_holdout() -> Verdict {
    let ds = match published("EXPLNEED_GENERAL_CSV", "General-DS") {
        Ok(ds) => ds,
        Err(v) => return v,
    };
    let total: EvalReport = match evaluate_holdout(&FittedMethod::RuleBased, "rule_based", &ds, DEFAULT_BETA, false) {
        Ok(mut reports) => reports.remove(reports.len() - 1),
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    verdict(all(vec![
        within("recall", total.positive.recall, 0.67, RULE_TOL),
        within("precision", total.positive.precision, 0.39, RULE_TOL),
        within("macro", total.macro_f_beta, 0.81, RULE_TOL),
    ]))
}

fn published_ml_rows() -> Vec<(ClassifierSpec, f64)> {
    use Algorithm::*;
    use Embedding::*;
    vec![
        (ClassifierSpec::new(NaiveBayes, Tfidf).with("alpha", 1i64).with("fit_prior", false), 0.66),
        (ClassifierSpec::new(Svm, Tfidf).with("C", 1i64).with("gamma", 0.001).with("kernel", "linear"), 0.73),
        (
            ClassifierSpec::new(RandomForest, Tfidf)
                .with("criterion", "entropy")
                .with("max_features", "auto")
                .with("n_estimators", 500i64),
            0.75,
        ),
        (
            ClassifierSpec::new(DecisionTree, Tfidf)
                .with("criterion", "gini")
                .with("max_features", "log2")
                .with("splitter", "best"),
            0.58,
        ),
        (ClassifierSpec::new(LogisticRegression, Tfidf).with("C", 1i64).with("solver", "newton-cg"), 0.72),
        (ClassifierSpec::new(AdaBoost, Tfidf).with("algorithm", "SAMME").with("n_estimators", 50i64), 0.74),
        (
            ClassifierSpec::new(Knn, Tfidf)
                .with("algorithm", "ball_tree")
                .with("n_neighbors", 20i64)
                .with("weights", "uniform"),
            0.64,
        ),
        (ClassifierSpec::new(NaiveBayes, Bow).with("alpha", 1i64).with("fit_prior", true), 0.65),
        (ClassifierSpec::new(Svm, Bow).with("C", 100i64).with("gamma", "auto").with("kernel", "rbf"), 0.74),
        (
            ClassifierSpec::new(RandomForest, Bow)
                .with("criterion", "entropy")
                .with("max_features", "auto")
                .with("n_estimators", 500i64),
            0.76,
        ),
        (
            ClassifierSpec::new(DecisionTree, Bow)
                .with("criterion", "gini")
                .with("max_features", "log2")
                .with("splitter", "best"),
            0.63,
        ),
        (ClassifierSpec::new(LogisticRegression, Bow).with("C", 1i64).with("solver", "liblinear"), 0.73),
        (ClassifierSpec::new(AdaBoost, Bow).with("algorithm", "SAMME").with("n_estimators", 200i64), 0.75),
        (
            ClassifierSpec::new(Knn, Bow)
                .with("algorithm", "ball_tree")
                .with("n_neighbors", 16i64)
                .with("weights", "distance"),
            0.60,
        ),
    ]
}

fn ml_rows() -> Verdict {
    let ds = match balanced_crossval() {
        Ok(ds) => ds,
        Err(v) => return v,
    };
    let checks = published_ml_rows()
        .into_iter()
        .map(|(spec, want)| {
            let label = format!("{}/{}", spec.algorithm, spec.embedding);
            let report = cross_validate(&Method::Classifier { spec }, &ds, &cv_options(CV_FOLDS, CV_REPEATS, SEED))
                .map_err(|e| format!("{label}: {e}"))?;
            let line = within(&label, report.macro_f_beta, want, ML_TOL);
            println!("      {}", line.as_ref().unwrap_or_else(|e| e));
            line
        })
        .collect();
    verdict(all(checks))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("agreement exactness", agreement_exactness),
        ("beta derivation", beta_derivation),
        ("f-beta spot checks", f_beta_spot_checks),
        ("property suite", property_suite),
        ("oracle equivalence", oracle_equivalence),
        ("rule-based cross-validation on published corpus", rule_based_cv),
        ("rule-based holdout on published corpus", rule_based_holdout),
        ("classic classifier rows on published corpus", ml_rows),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Verdict::Pass(d) => println!("PASS  {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
            Verdict::Skip(d) => println!("SKIP  {name}: {d}"),
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
