//! The `explneed` command line.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 model file error,
//! 4 internal error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::agreement::{pair_annotations, AgreementReport};
use crate::classifiers::{Algorithm, ClassifierSpec, Embedding, HyperValue, TrainedModel};
use crate::corpus::{dataset_stats, load_dataset};
use crate::error::{Error, Result};
use crate::evaluation::{
    align_predictions, evaluate_labels, load_predictions, predict_dataset, reports_to_markdown, save_predictions,
    undersample, ConfusionMatrix, EvalReport, FittedMethod, PredictionRow, DEFAULT_BETA, REPORT_SCHEMA_VERSION,
};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::features::{tokenize, TokenStream};

#[derive(Debug, Parser)]
#[command(name = "explneed", version, about = "Detect explanation needs in app reviews")]
pub struct Cli {
    /// Worker threads for folds and grid points (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Leave wall-clock timestamps out of reports.
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Markdown,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus statistics in the layout of the dataset overview table.
    Stats {
        dataset: PathBuf,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
    /// Label every review and write a predictions CSV.
    Detect(DetectArgs),
    /// Fit a classifier on a dataset and save it.
    Train(TrainArgs),
    /// Run a cross-validation experiment described by a TOML config.
    Cv {
        config: PathBuf,
        /// Write the JSON report here and the Markdown table next to it.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
    /// Grade a predictions CSV against a gold dataset.
    Score {
        predictions: PathBuf,
        gold: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
        #[arg(long)]
        by_app: bool,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
    /// Agreement statistics for a `review_id,rater1,rater2` CSV.
    Agreement {
        pairs: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Debug, Args)]
#[group(id = "detector", required = true, multiple = false)]
pub struct DetectSource {
    /// Use the question-mark / "why" rule.
    #[arg(long, group = "detector")]
    pub rule_based: bool,
    /// Use a model saved by `train`.
    #[arg(long, group = "detector")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    pub dataset: PathBuf,
    #[command(flatten)]
    pub source: DetectSource,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub algorithm: String,
    #[arg(long, default_value = "tfidf")]
    pub embedding: String,
    /// Hyperparameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub seed: u64,
    /// Balance the classes before fitting.
    #[arg(long)]
    pub undersample: bool,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also dump the fitted vocabulary as `term,index,df`.
    #[arg(long)]
    pub vocab_out: Option<PathBuf>,
}

/// Parses `true`/`false`, integers and floats; anything else is a string.
pub fn parse_hyper_value(raw: &str) -> HyperValue {
    let t = raw.trim();
    match t.to_ascii_lowercase().as_str() {
        "true" => return HyperValue::Bool(true),
        "false" => return HyperValue::Bool(false),
        _ => {}
    }
    if let Ok(i) = t.parse::<i64>() {
        return HyperValue::Int(i);
    }
    if let Ok(f) = t.parse::<f64>() {
        return HyperValue::Float(f);
    }
    HyperValue::Str(t.to_string())
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[derive(Serialize)]
struct ReportEnvelope<'a> {
    schema_version: u32,
    tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    reports: &'a [EvalReport],
}

fn envelope(reports: &[EvalReport], deterministic: bool) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ReportEnvelope {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp: (!deterministic).then(now_unix),
        reports,
    })?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or("dataset".into(), |s| s.to_string_lossy().into_owned())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let w = |out: &mut dyn Write, s: &str| out.write_all(s.as_bytes()).map_err(|e| Error::io("<stdout>", e));
    match &cli.command {
        Command::Stats { dataset, name, format } => {
            let ds = load_dataset(dataset, name.as_deref().unwrap_or(&stem(dataset)))?;
            let stats = dataset_stats(&ds);
            match format {
                Format::Json => w(out, &(serde_json::to_string_pretty(&stats)? + "\n")),
                _ => w(out, &stats.to_markdown()),
            }
        }
        Command::Detect(args) => {
            let ds = load_dataset(&args.dataset, &stem(&args.dataset))?;
            let (fitted, method) = match &args.source.model {
                Some(path) => {
                    let model = TrainedModel::load(path)?;
                    let name = format!("{}/{}", model.spec().algorithm, model.spec().embedding);
                    (
                        FittedMethod::Model {
                            model: Box::new(model),
                            selection: None,
                        },
                        name,
                    )
                }
                None => (FittedMethod::RuleBased, "rule_based".to_string()),
            };
            let preds = predict_dataset(&fitted, &ds);
            let rows: Vec<PredictionRow> = ds
                .reviews()
                .iter()
                .zip(&preds)
                .map(|(r, p)| PredictionRow {
                    review_id: r.review_id.clone(),
                    predicted: p.label,
                    score: p.score,
                })
                .collect();
            save_predictions(&rows, &args.out)?;
            let labels: Vec<bool> = preds.iter().map(|p| p.label).collect();
            let cm = ConfusionMatrix::from_pairs(ds.reviews().iter().zip(&labels).map(|(r, &p)| (r.explanation_need, p)));
            w(
                out,
                &format!(
                    "wrote {} predictions to {}\nconfusion vs gold: tp={} fp={} fn={} tn={}\n",
                    rows.len(),
                    args.out.display(),
                    cm.tp,
                    cm.fp,
                    cm.fn_,
                    cm.tn
                ),
            )?;
            let reports = evaluate_labels(&ds, &labels, &method, args.beta, false)?;
            w(out, &reports_to_markdown(&reports))
        }
        Command::Train(args) => {
            let ds = load_dataset(&args.dataset, &stem(&args.dataset))?;
            let ds = if args.undersample { undersample(&ds, args.seed)? } else { ds };
            let mut spec = ClassifierSpec::new(args.algorithm.parse::<Algorithm>()?, args.embedding.parse::<Embedding>()?);
            for p in &args.params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| Error::invalid(format!("--param expects KEY=VALUE, got \"{p}\"")))?;
                spec = spec.with(k.trim(), parse_hyper_value(v));
            }
            let docs: Vec<TokenStream> = ds.reviews().iter().map(|r| tokenize(&r.text)).collect();
            let y: Vec<bool> = ds.reviews().iter().map(|r| r.explanation_need).collect();
            let model = TrainedModel::fit_tokens(&spec, &docs, &y, args.seed)?;
            model.save(&args.out)?;
            if let Some(vpath) = &args.vocab_out {
                let file = std::fs::File::create(vpath).map_err(|e| Error::io(vpath, e))?;
                model.vocabulary().write_csv(file)?;
            }
            w(
                out,
                &format!(
                    "trained {} on {} reviews ({} positive); vocabulary {} terms; saved to {}\n",
                    model.spec(),
                    ds.len(),
                    ds.positives(),
                    model.vocabulary().len(),
                    args.out.display()
                ),
            )
        }
        Command::Cv { config, out: dest, format } => {
            let cfg = ExperimentConfig::load(config)?.resolve()?;
            let mut outcome = run_experiment(&cfg)?;
            if !cli.deterministic {
                outcome.timestamp = Some(now_unix());
            }
            let json = serde_json::to_string_pretty(&outcome)? + "\n";
            let mut tables = vec![outcome.cross_validation.clone()];
            tables.extend(outcome.holdout.iter().cloned());
            let md = reports_to_markdown(&tables);
            if let Some(dest) = dest {
                write_file(dest, &json)?;
                write_file(&dest.with_extension("md"), &md)?;
            }
            match format {
                Format::Json => w(out, &json),
                _ => w(out, &md),
            }
        }
        Command::Score {
            predictions,
            gold,
            beta,
            by_app,
            format,
        } => {
            let ds = load_dataset(gold, &stem(gold))?;
            let rows = load_predictions(predictions)?;
            let labels = align_predictions(&ds, &rows)?;
            let reports = evaluate_labels(&ds, &labels, &stem(predictions), *beta, *by_app)?;
            match format {
                Format::Json => w(out, &(envelope(&reports, cli.deterministic)? + "\n")),
                _ => w(out, &reports_to_markdown(&reports)),
            }
        }
        Command::Agreement { pairs, format } => {
            let report = AgreementReport::from_table(pair_annotations(pairs)?);
            match format {
                Format::Json => w(out, &(serde_json::to_string_pretty(&report)? + "\n")),
                _ => w(out, &report.to_text()),
            }
        }
    }
}

/// Parses `args`, runs the command writing to `out`, and returns the exit
/// code. Errors go to stderr.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            log::debug!("thread pool already initialised: {e}");
        }
    }
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(std::env::args_os(), &mut lock)
}
