//! Command-line front end. [`run`] parses arguments, prints the resolved
//! options to stderr, does the work, and returns the process exit code:
//! 0 on success, 1 on usage errors, 2 on data or validation errors and 3
//! when training diverges.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::agreement::{agreement_matrix, majority_vote_gold, pairwise_average_iaa, AgreementMatrix, TiePolicy};
use crate::config::{ConfigOverrides, ModelKind, TrainConfig};
use crate::corpus::{load_corpus, save_corpus, split_sentences, default_abbreviations, Corpus, Document};
use crate::error::{Error, Result};
use crate::eval::{cross_validate, domain_csv, evaluate_corpus, CvOptions};
use crate::features::{FeatureSet, FeatureVector, FeatureVocabulary, Featurizer, Lexicons};
use crate::model::{self, predictions_from_jsonl, predictions_to_jsonl, TrainedModel};
use crate::neural::{EmbeddingMode, SentenceEmbeddingStore};

#[derive(Debug, Parser)]
#[command(name = "rhetorical-roles", version, about = "Rhetorical role labeling for legal judgments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Split raw text files into a sentence-split corpus (one document per file).
    Split(SplitArgs),
    /// Pairwise inter-annotator agreement report.
    Iaa(IaaArgs),
    /// Sentence-level label agreement matrix between two annotators, as CSV.
    AgreementMatrix(MatrixArgs),
    /// Derive gold labels by majority vote over annotators.
    Curate(CurateArgs),
    /// Extract sparse handcrafted features.
    Featurize(FeaturizeArgs),
    /// Train a model on the gold labels of a corpus.
    Train(TrainArgs),
    /// Label every sentence of a corpus with a trained model.
    Predict(PredictArgs),
    /// Score predictions against gold labels.
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation of a model configuration.
    CrossValidate(CrossValidateArgs),
}

#[derive(Debug, Args, Serialize)]
struct SplitArgs {
    /// Raw text files; the file stem becomes the document id.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "general")]
    domain: String,
    /// Extra abbreviations (one per line) added to the built-in list.
    #[arg(long)]
    abbreviations: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct IaaArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Comma-separated annotator ids.
    #[arg(long, value_delimiter = ',', required = true)]
    annotators: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct MatrixArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Annotator whose labels index the rows.
    #[arg(long)]
    rows: String,
    /// Annotator whose labels index the columns.
    #[arg(long)]
    cols: String,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CurateArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// `error` or `annotator-priority`.
    #[arg(long, default_value = "error", value_parser = ["error", "annotator-priority"])]
    tie_policy: String,
    /// Annotator order for `annotator-priority`; defaults to sorted ids.
    #[arg(long, value_delimiter = ',')]
    priority: Vec<String>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct FeaturizeArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "combined", value_parser = snake::<FeatureSet>)]
    feature_set: FeatureSet,
    #[arg(long)]
    lexicons: Option<PathBuf>,
    /// Existing vocabulary to apply; without it one is fitted and written to
    /// `--vocab-out`.
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
}

/// Training flags; anything unset falls back to `--config`, then to the
/// built-in defaults of the chosen model.
#[derive(Debug, Args, Serialize, Default)]
struct TrainFlags {
    /// JSON file with any subset of the training options.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = snake::<ModelKind>)]
    model: Option<ModelKind>,
    #[arg(long, value_parser = snake::<FeatureSet>)]
    feature_set: Option<FeatureSet>,
    #[arg(long, value_parser = snake::<EmbeddingMode>)]
    embedding_mode: Option<EmbeddingMode>,
    #[arg(long)]
    d_w: Option<usize>,
    #[arg(long)]
    h_tok: Option<usize>,
    #[arg(long)]
    h_doc: Option<usize>,
    #[arg(long)]
    embedding_dim: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    min_freq: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lexicons: Option<PathBuf>,
    /// Sentence embedding file for pretrained mode.
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    flags: TrainFlags,
    /// Per-epoch mean training loss, one value per line.
    #[arg(long)]
    loss_log: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    /// Corpus with gold labels.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    /// Optional domains x labels F-score table.
    #[arg(long)]
    domain_csv: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CrossValidateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    flags: TrainFlags,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    stratify_domain: bool,
    /// Also write `domains.csv`.
    #[arg(long)]
    domain_csv: bool,
    /// Directory for `fold_<i>.json`, `mean.json` and `folds.json`.
    #[arg(long)]
    output_dir: PathBuf,
}

fn snake<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// Exit status for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Fold { source, .. } => exit_code(source),
        Error::Divergence { .. } => 3,
        Error::Argument(_) => 1,
        _ => 2,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn print_options<T: Serialize>(options: &T) {
    eprintln!("{}", serde_json::to_string_pretty(options).expect("options serialize"));
}

fn write_file(path: &Path, body: impl AsRef<[u8]>) -> Result<()> {
    crate::error::ensure_parent(path)?;
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializes");
    s.push('\n');
    s
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => {
            let cfg = resolve(&a.flags, a.output.clone())?;
            print_options(&cfg);
            train_cmd(&a, &cfg)
        }
        Command::CrossValidate(a) => {
            let cfg = resolve(&a.flags, None)?;
            print_options(&serde_json::json!({
                "command": "cross-validate",
                "corpus": a.corpus,
                "k": a.k,
                "jobs": a.jobs,
                "stratify_domain": a.stratify_domain,
                "domain_csv": a.domain_csv,
                "output_dir": a.output_dir,
                "config": cfg,
            }));
            cross_validate_cmd(&a, &cfg)
        }
        other => {
            print_options(&other);
            match other {
                Command::Split(a) => split_cmd(&a),
                Command::Iaa(a) => iaa_cmd(&a),
                Command::AgreementMatrix(a) => matrix_cmd(&a),
                Command::Curate(a) => curate_cmd(&a),
                Command::Featurize(a) => featurize_cmd(&a),
                Command::Predict(a) => predict_cmd(&a),
                Command::Evaluate(a) => evaluate_cmd(&a),
                Command::Train(_) | Command::CrossValidate(_) => unreachable!(),
            }
        }
    }
}

fn resolve(f: &TrainFlags, output: Option<PathBuf>) -> Result<TrainConfig> {
    let file = match &f.config {
        Some(p) => ConfigOverrides::load(p)?,
        None => ConfigOverrides::default(),
    };
    let flags = ConfigOverrides {
        model: f.model,
        feature_set: f.feature_set,
        embedding_mode: f.embedding_mode,
        d_w: f.d_w,
        h_tok: f.h_tok,
        h_doc: f.h_doc,
        embedding_dim: f.embedding_dim,
        lr: f.lr,
        epochs: f.epochs,
        l2: f.l2,
        clip: f.clip,
        min_freq: f.min_freq,
        seed: f.seed,
        lexicons: f.lexicons.clone(),
        embeddings: f.embeddings.clone(),
        output,
    };
    TrainConfig::resolve(flags, file)
}

fn load_store(path: Option<&Path>) -> Result<Option<SentenceEmbeddingStore>> {
    path.map(SentenceEmbeddingStore::load).transpose()
}

fn split_cmd(a: &SplitArgs) -> Result<()> {
    let mut abbreviations = default_abbreviations();
    if let Some(p) = &a.abbreviations {
        let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        abbreviations.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    let mut docs = Vec::with_capacity(a.inputs.len());
    for p in &a.inputs {
        let raw = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        let doc_id = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| Error::Argument(format!("no file name in {}", p.display())))?;
        let spans: Vec<_> = split_sentences(&raw, &abbreviations).into_iter().map(|s| s.span).collect();
        docs.push(Document::from_spans(doc_id, a.domain.clone(), raw, &spans)?);
    }
    let corpus = Corpus::new(docs)?;
    eprintln!(
        "split {} documents into {} sentences",
        corpus.len(),
        corpus.documents.iter().map(Document::len).sum::<usize>()
    );
    save_corpus(&corpus, &a.output)
}

#[derive(Serialize)]
struct IaaOutput {
    #[serde(flatten)]
    report: crate::agreement::IaaReport,
    agreement_matrices: BTreeMap<String, AgreementMatrix>,
}

fn iaa_cmd(a: &IaaArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let report = pairwise_average_iaa(&corpus, &a.annotators, a.beta)?;
    let mut agreement_matrices = BTreeMap::new();
    for p in &report.per_pair {
        let (x, y) = &p.annotators;
        agreement_matrices.insert(format!("{x}|{y}"), agreement_matrix(&corpus, x, y)?);
    }
    let o = &report.overall;
    eprintln!(
        "{} pairs; overall F strict {:.4} lenient {:.4} average {:.4}",
        report.per_pair.len(),
        o.fscore.strict,
        o.fscore.lenient,
        o.fscore.average
    );
    write_file(&a.output, pretty(&IaaOutput { report, agreement_matrices }))
}

fn matrix_cmd(a: &MatrixArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let m = agreement_matrix(&corpus, &a.rows, &a.cols)?;
    write_file(&a.output, m.to_csv())
}

fn curate_cmd(a: &CurateArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let policy = match a.tie_policy.as_str() {
        "error" => TiePolicy::Error,
        _ if a.priority.is_empty() => TiePolicy::AnnotatorPriority(corpus.annotators()),
        _ => TiePolicy::AnnotatorPriority(a.priority.clone()),
    };
    let gold = majority_vote_gold(&corpus, &policy)?;
    save_corpus(&gold, &a.output)
}

#[derive(Serialize)]
struct FeatureLine<'a> {
    doc_id: &'a str,
    sentences: Vec<FeatureVector>,
}

fn featurize_cmd(a: &FeaturizeArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let lex = match &a.lexicons {
        Some(p) => Lexicons::load(p)?,
        None => Lexicons::default(),
    };
    let (mut vocab, fit) = match &a.vocab {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            (FeatureVocabulary::from_json(&text)?, false)
        }
        None => (FeatureVocabulary::new(), true),
    };
    let featurizer = Featurizer::new(&lex, a.feature_set);
    let mut out = String::new();
    for d in &corpus.documents {
        let line = FeatureLine {
            doc_id: &d.doc_id,
            sentences: featurizer.extract(d, &mut vocab, fit)?,
        };
        out.push_str(&serde_json::to_string(&line).expect("features serialize"));
        out.push('\n');
    }
    write_file(&a.output, out)?;
    if fit {
        vocab.freeze();
        if let Some(p) = &a.vocab_out {
            write_file(p, vocab.to_json())?;
        }
    }
    eprintln!("{} features", vocab.len());
    Ok(())
}

fn train_cmd(a: &TrainArgs, cfg: &TrainConfig) -> Result<()> {
    let output = cfg
        .output
        .as_ref()
        .ok_or_else(|| Error::Argument("--output is required (or `output` in --config)".into()))?;
    let corpus = load_corpus(&a.corpus)?;
    let store = load_store(cfg.embeddings.as_deref())?;
    let outcome = model::train(&corpus, cfg, store.as_ref())?;
    if let (Some(first), Some(last)) = (outcome.loss_log.first(), outcome.loss_log.last()) {
        eprintln!("loss {first:.6} -> {last:.6} over {} epochs", cfg.epochs);
    }
    if let Some(p) = &a.loss_log {
        let lines: String = outcome.loss_log.iter().map(|l| format!("{l}\n")).collect();
        write_file(p, lines)?;
    }
    outcome.model.save(output)
}

fn predict_cmd(a: &PredictArgs) -> Result<()> {
    let m = TrainedModel::load(&a.model)?;
    let corpus = load_corpus(&a.corpus)?;
    let store = load_store(a.embeddings.as_deref())?;
    let preds = m.predict(&corpus, store.as_ref())?;
    write_file(&a.output, predictions_to_jsonl(&preds))
}

fn evaluate_cmd(a: &EvaluateArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let text = fs::read_to_string(&a.predictions).map_err(|e| Error::io(&a.predictions, e))?;
    let report = evaluate_corpus(&predictions_from_jsonl(&text)?, &corpus)?;
    eprintln!("macro F {:.4}", report.overall.macro_avg.fscore);
    if let Some(p) = &a.domain_csv {
        write_file(p, domain_csv(&report))?;
    }
    write_file(&a.output, pretty(&report))
}

fn cross_validate_cmd(a: &CrossValidateArgs, cfg: &TrainConfig) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let store = load_store(cfg.embeddings.as_deref())?;
    let opts = CvOptions {
        k: a.k,
        seed: cfg.seed,
        stratify_domain: a.stratify_domain,
        jobs: a.jobs,
    };
    let cv = cross_validate(&corpus, cfg, &opts, store.as_ref())?;
    for f in &cv.folds {
        eprintln!("fold {}: macro F {:.4}", f.fold_id.unwrap_or_default(), f.overall.macro_avg.fscore);
    }
    eprintln!("mean macro F {:.4}", cv.mean.macro_avg.fscore);
    cv.write_reports(&a.output_dir, a.domain_csv)?;
    write_file(&a.output_dir.join("config.json"), pretty(cfg))
}
