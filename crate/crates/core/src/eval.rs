//! Document-level k-fold cross-validation and sentence-level metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agreement::AgreementMatrix;
use crate::config::TrainConfig;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::model::{self, Prediction};
use crate::neural::SentenceEmbeddingStore;

/// Assignment of every document to one of `k` test folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub assignments: BTreeMap<String, usize>,
}

/// Shuffles documents with `seed` and deals them round-robin into `k` folds.
/// With `stratify_domain`, documents are dealt domain by domain (each domain
/// shuffled separately) so every domain spreads evenly over the folds.
pub fn make_folds(corpus: &Corpus, k: usize, seed: u64, stratify_domain: bool) -> Result<FoldPlan> {
    if k == 0 || k > corpus.len() {
        return Err(Error::Argument(format!(
            "cannot make {k} folds from {} documents",
            corpus.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<&str> = corpus.documents.iter().map(|d| d.doc_id.as_str()).collect();
    let order: Vec<&str> = if stratify_domain {
        let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for d in &corpus.documents {
            groups.entry(d.domain.as_str()).or_default().push(&d.doc_id);
        }
        groups
            .into_values()
            .flat_map(|mut g| {
                g.shuffle(&mut rng);
                g
            })
            .collect()
    } else {
        let mut o = ids;
        o.shuffle(&mut rng);
        o
    };
    let assignments = order
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id.to_string(), i % k))
        .collect();
    Ok(FoldPlan {
        k,
        seed,
        stratified: stratify_domain,
        assignments,
    })
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignments.values() {
            sizes[f] += 1;
        }
        sizes
    }

    /// `(train, test)` for `fold`, each in corpus order.
    pub fn split(&self, corpus: &Corpus, fold: usize) -> Result<(Corpus, Corpus)> {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for d in &corpus.documents {
            match self.assignments.get(&d.doc_id) {
                Some(&f) if f == fold => test.push(d.clone()),
                Some(_) => train.push(d.clone()),
                None => {
                    return Err(Error::Argument(format!(
                        "document `{}` is not in the fold plan",
                        d.doc_id
                    )))
                }
            }
        }
        Ok((Corpus { documents: train }, Corpus { documents: test }))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

impl Prf {
    fn mean<'a>(items: impl IntoIterator<Item = &'a Prf>) -> Prf {
        let mut sum = Prf::default();
        let mut n = 0;
        for p in items {
            sum.precision += p.precision;
            sum.recall += p.recall;
            sum.fscore += p.fscore;
            n += 1;
        }
        if n == 0 {
            return sum;
        }
        let n = n as f64;
        Prf {
            precision: sum.precision / n,
            recall: sum.recall / n,
            fscore: sum.fscore / n,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: Label,
    #[serde(flatten)]
    pub prf: Prf,
    /// Gold sentences with this label.
    pub support: u64,
    pub predicted: u64,
}

/// Metrics over one set of aligned sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBlock {
    pub sentences: u64,
    pub accuracy: f64,
    pub per_label: Vec<LabelMetrics>,
    /// Unweighted mean over all seven labels.
    #[serde(rename = "macro")]
    pub macro_avg: Prf,
    /// Unweighted mean over the labels present in the gold data.
    pub macro_present: Prf,
    /// Labels with no gold sentence; they count as zero in `macro`.
    pub degenerate_labels: Vec<Label>,
}

impl MetricsBlock {
    fn from_confusion(c: &AgreementMatrix) -> MetricsBlock {
        let per_label: Vec<LabelMetrics> = Label::ALL
            .iter()
            .map(|&l| {
                let i = l.index();
                let tp = c.counts[i][i];
                let support: u64 = c.counts[i].iter().sum();
                let predicted: u64 = c.counts.iter().map(|r| r[i]).sum();
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let fscore = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                LabelMetrics {
                    label: l,
                    prf: Prf {
                        precision,
                        recall,
                        fscore,
                    },
                    support,
                    predicted,
                }
            })
            .collect();
        MetricsBlock {
            sentences: c.total(),
            accuracy: ratio(c.trace(), c.total()),
            macro_avg: Prf::mean(per_label.iter().map(|m| &m.prf)),
            macro_present: Prf::mean(per_label.iter().filter(|m| m.support > 0).map(|m| &m.prf)),
            degenerate_labels: per_label.iter().filter(|m| m.support == 0).map(|m| m.label).collect(),
            per_label,
        }
    }

    pub fn label(&self, l: Label) -> &LabelMetrics {
        &self.per_label[l.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fold_id: Option<usize>,
    #[serde(flatten)]
    pub overall: MetricsBlock,
    pub per_domain: BTreeMap<String, MetricsBlock>,
    /// Gold rows, predicted columns.
    pub confusion: AgreementMatrix,
}

/// Scores `pred` against `gold`, document by document; `domains[i]` is the
/// domain of document `i`.
pub fn evaluate(pred: &[Vec<Label>], gold: &[Vec<Label>], domains: &[&str]) -> Result<MetricsReport> {
    if pred.len() != gold.len() || gold.len() != domains.len() {
        return Err(Error::Argument(format!(
            "{} predicted, {} gold and {} domain entries",
            pred.len(),
            gold.len(),
            domains.len()
        )));
    }
    let mut confusion = AgreementMatrix::default();
    let mut by_domain: BTreeMap<&str, AgreementMatrix> = BTreeMap::new();
    for (i, ((p, g), dom)) in pred.iter().zip(gold).zip(domains).enumerate() {
        if p.len() != g.len() {
            return Err(Error::Argument(format!(
                "document {i}: {} predicted labels for {} gold labels",
                p.len(),
                g.len()
            )));
        }
        let m = by_domain.entry(dom).or_default();
        for (&pl, &gl) in p.iter().zip(g) {
            confusion.add(gl, pl);
            m.add(gl, pl);
        }
    }
    Ok(MetricsReport {
        fold_id: None,
        overall: MetricsBlock::from_confusion(&confusion),
        per_domain: by_domain
            .into_iter()
            .map(|(d, m)| (d.to_string(), MetricsBlock::from_confusion(&m)))
            .collect(),
        confusion,
    })
}

/// [`evaluate`] with gold labels and domains taken from `corpus`, matching
/// predictions by document id.
pub fn evaluate_corpus(preds: &[Prediction], corpus: &Corpus) -> Result<MetricsReport> {
    let by_id: BTreeMap<&str, &Prediction> = preds.iter().map(|p| (p.doc_id.as_str(), p)).collect();
    let mut p = Vec::with_capacity(corpus.len());
    let mut g = Vec::with_capacity(corpus.len());
    let mut domains = Vec::with_capacity(corpus.len());
    for d in &corpus.documents {
        let gold = d.gold.as_ref().ok_or_else(|| Error::Validation {
            doc_id: d.doc_id.clone(),
            rule: "document has no gold labels".into(),
        })?;
        let pred = by_id
            .get(d.doc_id.as_str())
            .ok_or_else(|| Error::Argument(format!("no prediction for document `{}`", d.doc_id)))?;
        p.push(pred.labels.clone());
        g.push(gold.clone());
        domains.push(d.domain.as_str());
    }
    evaluate(&p, &g, &domains)
}

/// Fold-averaged summary of a cross-validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanReport {
    pub k: usize,
    /// Mean of the per-fold `macro` blocks.
    #[serde(rename = "macro")]
    pub macro_avg: Prf,
    pub macro_fscore_per_fold: Vec<f64>,
    pub accuracy: f64,
    /// Mean of each label's per-fold scores.
    pub per_label: Vec<(Label, Prf)>,
    /// Every held-out prediction scored at once; each document appears
    /// exactly once.
    pub pooled: MetricsReport,
}

impl MeanReport {
    /// Domains x labels table of pooled F-scores.
    pub fn domain_csv(&self) -> String {
        domain_csv(&self.pooled)
    }
}

/// Domains x labels table of F-scores, with a trailing macro column.
pub fn domain_csv(report: &MetricsReport) -> String {
    let mut s = String::from("domain");
    for l in Label::ALL {
        write!(s, ",{l}").unwrap();
    }
    s.push_str(",macro\n");
    for (dom, block) in &report.per_domain {
        s.push_str(dom);
        for m in &block.per_label {
            write!(s, ",{:.4}", m.prf.fscore).unwrap();
        }
        writeln!(s, ",{:.4}", block.macro_avg.fscore).unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub plan: FoldPlan,
    pub folds: Vec<MetricsReport>,
    pub mean: MeanReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    pub stratify_domain: bool,
    /// Folds run concurrently on up to this many threads.
    pub jobs: usize,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 5,
            seed: 0,
            stratify_domain: false,
            jobs: 1,
        }
    }
}

/// Runs `fit_predict(train, test)` on every fold of `plan` and scores the
/// result. Fold outcomes do not depend on `jobs`.
pub fn cross_validate_with<F>(corpus: &Corpus, plan: &FoldPlan, jobs: usize, fit_predict: F) -> Result<CrossValidation>
where
    F: Fn(&Corpus, &Corpus) -> Result<Vec<Prediction>> + Sync,
{
    let run = |fold: usize| -> Result<(MetricsReport, Vec<Prediction>)> {
        let (train, test) = plan.split(corpus, fold)?;
        let preds = fit_predict(&train, &test)?;
        let mut report = evaluate_corpus(&preds, &test)?;
        report.fold_id = Some(fold);
        Ok((report, preds))
    };
    let annotate = |fold: usize, e: Error| Error::Fold {
        fold,
        source: Box::new(e),
    };

    let slots: Vec<Mutex<Option<Result<(MetricsReport, Vec<Prediction>)>>>> =
        (0..plan.k).map(|_| Mutex::new(None)).collect();
    let next = Mutex::new(0usize);
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, plan.k) {
            s.spawn(|| loop {
                let fold = {
                    let mut n = next.lock().unwrap();
                    let f = *n;
                    *n += 1;
                    f
                };
                if fold >= plan.k {
                    break;
                }
                *slots[fold].lock().unwrap() = Some(run(fold));
            });
        }
    });

    let mut folds = Vec::with_capacity(plan.k);
    let mut all_preds = Vec::new();
    for (fold, slot) in slots.into_iter().enumerate() {
        let (report, preds) = slot
            .into_inner()
            .unwrap()
            .expect("every fold runs")
            .map_err(|e| annotate(fold, e))?;
        folds.push(report);
        all_preds.extend(preds);
    }
    let pooled = evaluate_corpus(&all_preds, corpus)?;
    let per_label = Label::ALL
        .iter()
        .map(|&l| (l, Prf::mean(folds.iter().map(|f| &f.overall.label(l).prf))))
        .collect();
    let mean = MeanReport {
        k: plan.k,
        macro_avg: Prf::mean(folds.iter().map(|f| &f.overall.macro_avg)),
        macro_fscore_per_fold: folds.iter().map(|f| f.overall.macro_avg.fscore).collect(),
        accuracy: folds.iter().map(|f| f.overall.accuracy).sum::<f64>() / plan.k as f64,
        per_label,
        pooled,
    };
    Ok(CrossValidation {
        plan: plan.clone(),
        folds,
        mean,
    })
}

/// k-fold cross-validation of the model described by `cfg`.
pub fn cross_validate(
    corpus: &Corpus,
    cfg: &TrainConfig,
    opts: &CvOptions,
    store: Option<&SentenceEmbeddingStore>,
) -> Result<CrossValidation> {
    cfg.validate()?;
    let plan = make_folds(corpus, opts.k, opts.seed, opts.stratify_domain)?;
    cross_validate_with(corpus, &plan, opts.jobs, |train, test| {
        model::train(train, cfg, store)?.model.predict(test, store)
    })
}

impl CrossValidation {
    /// Writes `fold_<i>.json` for each fold, `mean.json`, `folds.json` with
    /// the fold plan, and optionally `domains.csv`.
    pub fn write_reports(&self, dir: impl AsRef<Path>, domain_csv: bool) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        for (i, f) in self.folds.iter().enumerate() {
            write(&format!("fold_{i}.json"), to_pretty(f))?;
        }
        write("mean.json", to_pretty(&self.mean))?;
        write("folds.json", to_pretty(&self.plan))?;
        if domain_csv {
            write("domains.csv", self.mean.domain_csv())?;
        }
        Ok(())
    }
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}
