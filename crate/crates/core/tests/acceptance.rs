//! Acceptance checks, one line per criterion. Run with
//! `cargo test --test acceptance`; exits non-zero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhetorical_roles::agreement::{majority_vote_gold, pairwise_average_iaa, IaaScores, MatchCounts, TiePolicy};
use rhetorical_roles::config::{ConfigOverrides, ModelKind, TrainConfig};
use rhetorical_roles::corpus::save_corpus;
use rhetorical_roles::crf::{log_partition, nll_and_grad, viterbi, CrfParams, EmissionMatrix};
use rhetorical_roles::eval::evaluate_corpus;
use rhetorical_roles::features::FeatureSet;
use rhetorical_roles::label::K;
use rhetorical_roles::model;
use rhetorical_roles::neural::{EmbeddingMode, EmbeddingTable, HeadKind, HierModelParams, SentenceEmbeddingStore};
use rhetorical_roles::synthetic::{generate, SyntheticConfig};
use rhetorical_roles::{Corpus, Document, Error, Label, LabeledSpan};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || {
        format!("took {:.1}s, limit {limit}s", elapsed.as_secs_f64())
    })
}

// ---------------------------------------------------------------- CRF oracles

fn random_instance(rng: &mut ChaCha8Rng, t: usize, k: usize, scale: f64) -> (EmissionMatrix, CrfParams) {
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-scale..scale)).collect() };
    let em = EmissionMatrix::from_vec(t, k, draw(t * k)).unwrap();
    let p = CrfParams {
        num_labels: k,
        transitions: draw(k * k),
        start: draw(k),
        stop: draw(k),
    };
    (em, p)
}

fn naive_score(em: &EmissionMatrix, p: &CrfParams, y: &[usize]) -> f64 {
    let k = p.num_labels;
    let mut s = p.start[y[0]] + p.stop[y[y.len() - 1]];
    for (t, &l) in y.iter().enumerate() {
        s += em.get(t, l);
        if t > 0 {
            s += p.transitions[y[t - 1] * k + l];
        }
    }
    s
}

/// Every label sequence of length `t` over `k` labels, in lexicographic order.
fn all_sequences(t: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(k.pow(t as u32));
    let mut y = vec![0; t];
    loop {
        out.push(y.clone());
        let mut i = t;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            y[i] += 1;
            if y[i] < k {
                break;
            }
            y[i] = 0;
        }
    }
}

fn crf_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let (t_max, k) = if i < 100 { (4, 7) } else { (6, 3) };
        let t = rng.gen_range(1..=t_max);
        let (em, p) = random_instance(&mut rng, t, k, 3.0);
        let scores: Vec<(Vec<usize>, f64)> = all_sequences(t, k)
            .into_iter()
            .map(|y| {
                let s = naive_score(&em, &p, &y);
                (y, s)
            })
            .collect();
        let m = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let brute_z = m + scores.iter().map(|s| (s.1 - m).exp()).sum::<f64>().ln();
        let z = log_partition(&em, &p).map_err(|e| e.to_string())?;
        worst = worst.max((z - brute_z).abs());
        ensure((z - brute_z).abs() <= 1e-10, || format!("instance {i}: log Z {z} vs {brute_z}"))?;
        // first maximum in lexicographic order
        let best = scores.iter().fold(&scores[0], |b, s| if s.1 > b.1 { s } else { b });
        let (path, score) = viterbi(&em, &p).map_err(|e| e.to_string())?;
        ensure(path == best.0, || format!("instance {i}: viterbi {path:?} vs {:?}", best.0))?;
        ensure((score - best.1).abs() <= 1e-10, || format!("instance {i}: viterbi score"))?;
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("200 instances, max |log Z error| {worst:.1e}, {:.2}s", start.elapsed().as_secs_f64()))
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

fn crf_gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..50 {
        let t = rng.gen_range(1..=5);
        let k = rng.gen_range(2..=K);
        let (em, p) = random_instance(&mut rng, t, k, 2.0);
        let gold: Vec<usize> = (0..t).map(|_| rng.gen_range(0..k)).collect();
        let (_, g) = nll_and_grad(&em, &p, &gold).map_err(|e| e.to_string())?;
        let nll = |em: &EmissionMatrix, p: &CrfParams| nll_and_grad(em, p, &gold).unwrap().0;

        let mut check = |analytic: f64, plus: f64, minus: f64, what: String| -> Result<(), String> {
            let numeric = (plus - minus) / (2.0 * h);
            let r = rel_err(analytic, numeric);
            worst = worst.max(r);
            checked += 1;
            ensure(r <= 1e-4, || format!("instance {i} {what}: analytic {analytic} numeric {numeric}"))
        };
        for j in 0..t * k {
            let mut a = em.clone();
            let mut b = em.clone();
            a.as_mut_slice()[j] += h;
            b.as_mut_slice()[j] -= h;
            check(g.emissions.as_slice()[j], nll(&a, &p), nll(&b, &p), format!("emission {j}"))?;
        }
        for (name, len) in [("transition", k * k), ("start", k), ("stop", k)] {
            for j in 0..len {
                let bump = |d: f64| {
                    let mut q = p.clone();
                    match name {
                        "transition" => q.transitions[j] += d,
                        "start" => q.start[j] += d,
                        _ => q.stop[j] += d,
                    }
                    nll(&em, &q)
                };
                let analytic = match name {
                    "transition" => g.params.transitions[j],
                    "start" => g.params.start[j],
                    _ => g.params.stop[j],
                };
                check(analytic, bump(h), bump(-h), format!("{name} {j}"))?;
            }
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "50 instances, {checked} partials, max rel error {worst:.1e}, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

// ------------------------------------------------------------ neural oracle

fn neural_gradients() -> Outcome {
    let start = Instant::now();
    let mut doc = Document::from_sentences("toy", "Tax", &["the court held", "appeal is allowed"]).unwrap();
    doc.gold = Some(vec![Label::Ratio, Label::Rpc]);
    let gold = doc.gold.clone().unwrap();
    let corpus = Corpus::new(vec![doc.clone()]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut store = SentenceEmbeddingStore::new(4);
    for s in &doc.sentences {
        store
            .insert("toy", s.index, (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
    }
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for head in [HeadKind::Softmax, HeadKind::Crf] {
        for mode in [EmbeddingMode::RandomInit, EmbeddingMode::Pretrained] {
            let table = EmbeddingTable::build(&corpus, 3, 1);
            let mut p = HierModelParams::zeros(mode, head, Some(table), 2, 4, 2).map_err(|e| e.to_string())?;
            for b in p.buffers_mut() {
                b.iter_mut().for_each(|x| *x = rng.gen_range(-0.5..0.5));
            }
            let st = (mode == EmbeddingMode::Pretrained).then_some(&store);
            let (_, grads) = p.loss_and_grad(&doc, st, &gold).map_err(|e| e.to_string())?;
            for (bi, g) in grads.iter().enumerate() {
                for (i, &analytic) in g.iter().enumerate() {
                    let loss = |d: f64| {
                        let mut q = p.clone();
                        q.buffers_mut()[bi][i] += d;
                        q.forward_loss(&doc, st, &gold).unwrap().0
                    };
                    let numeric = (loss(h) - loss(-h)) / (2.0 * h);
                    let r = rel_err(analytic, numeric);
                    worst = worst.max(r);
                    checked += 1;
                    ensure(r <= 1e-3, || {
                        format!("{head:?}/{mode:?} buffer {bi}[{i}]: analytic {analytic} numeric {numeric}")
                    })?;
                }
            }
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "2 heads x 2 modes, {checked} partials, max rel error {worst:.1e}, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- IAA

fn iaa_fixture() -> Corpus {
    use Label::*;
    let texts = [
        "Sentence number one.",
        "Sentence number two.",
        "Sentence number 3 is",
        "Sentence number four",
        "Sentence number five",
    ];
    let mut doc = Document::from_sentences("iaa", "Civil", &texts).unwrap();
    let sp = |s, e, l| LabeledSpan::new(s, e, l);
    // sentences occupy [0,20) [21,41) [42,62) [63,83) [84,104)
    doc.annotations.insert(
        "A1".into(),
        vec![sp(0, 20, Fac), sp(21, 41, Arg), sp(42, 62, Sta), sp(63, 83, Ratio), sp(84, 104, Rpc)],
    );
    doc.annotations.insert(
        "A2".into(),
        vec![sp(0, 20, Fac), sp(21, 35, Arg), sp(42, 62, Pre), sp(63, 83, Ratio), sp(84, 104, Rpc)],
    );
    doc.annotations.insert(
        "A3".into(),
        vec![sp(0, 41, Fac), sp(42, 62, Sta), sp(63, 83, Arg), sp(84, 104, Rpc)],
    );
    Corpus::new(vec![doc]).unwrap()
}

/// Hand tally per pair: (label, correct, partial, missing, spurious).
const TALLIES: [&[(Label, u64, u64, u64, u64)]; 3] = [
    // A1 vs A2
    &[
        (Label::Fac, 1, 0, 0, 0),
        (Label::Arg, 0, 1, 0, 0),
        (Label::Sta, 0, 0, 1, 0),
        (Label::Pre, 0, 0, 0, 1),
        (Label::Ratio, 1, 0, 0, 0),
        (Label::Rpc, 1, 0, 0, 0),
    ],
    // A1 vs A3
    &[
        (Label::Fac, 0, 1, 0, 0),
        (Label::Arg, 0, 0, 1, 1),
        (Label::Sta, 1, 0, 0, 0),
        (Label::Ratio, 0, 0, 1, 0),
        (Label::Rpc, 1, 0, 0, 0),
    ],
    // A2 vs A3
    &[
        (Label::Fac, 0, 1, 0, 0),
        (Label::Arg, 0, 0, 1, 1),
        (Label::Sta, 0, 0, 0, 1),
        (Label::Pre, 0, 0, 1, 0),
        (Label::Ratio, 0, 0, 1, 0),
        (Label::Rpc, 1, 0, 0, 0),
    ],
];

/// (P, R, F) for strict, lenient, average, straight from the definitions.
fn oracle_prf(c: f64, pt: f64, m: f64, s: f64) -> [[f64; 3]; 3] {
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    [c, c + pt, c + 0.5 * pt].map(|num| {
        let p = div(num, c + pt + s);
        let r = div(num, c + pt + m);
        [p, r, div(2.0 * p * r, p + r)]
    })
}

fn as_grid(s: &IaaScores) -> [[f64; 3]; 3] {
    let v = |x: &rhetorical_roles::agreement::Variants| x.as_array();
    let (p, r, f) = (v(&s.precision), v(&s.recall), v(&s.fscore));
    [0, 1, 2].map(|i| [p[i], r[i], f[i]])
}

fn iaa_formulas() -> Outcome {
    let corpus = iaa_fixture();
    corpus.validate().map_err(|e| e.to_string())?;
    let names: Vec<String> = ["A1", "A2", "A3"].iter().map(|s| s.to_string()).collect();
    let report = pairwise_average_iaa(&corpus, &names, 1.0).map_err(|e| e.to_string())?;
    ensure(report.per_pair.len() == 3, || "expected three pairs".into())?;

    let mut pair_totals = Vec::new();
    for (pair, tally) in report.per_pair.iter().zip(TALLIES) {
        let mut total = MatchCounts::default();
        for l in Label::ALL {
            let want = tally
                .iter()
                .find(|t| t.0 == l)
                .map(|t| MatchCounts::new(t.1, t.2, t.3, t.4))
                .unwrap_or_default();
            ensure(pair.counts.label(l) == want, || {
                format!("{:?} {l}: counts {:?}, hand tally {want:?}", pair.annotators, pair.counts.label(l))
            })?;
            total = total + want;
        }
        pair_totals.push(total);
    }

    let mut max_dev: f64 = 0.0;
    let mut compare = |got: [[f64; 3]; 3], want: [[f64; 3]; 3], what: &str| -> Result<(), String> {
        for v in 0..3 {
            for m in 0..3 {
                let d = (got[v][m] - want[v][m]).abs();
                max_dev = max_dev.max(d);
                ensure(d <= 1e-12, || format!("{what} variant {v} measure {m}: {} vs {}", got[v][m], want[v][m]))?;
            }
        }
        Ok(())
    };
    let mean3 = |xs: [[[f64; 3]; 3]; 3]| {
        let mut out = [[0.0; 3]; 3];
        for x in xs {
            for v in 0..3 {
                for m in 0..3 {
                    out[v][m] += x[v][m] / 3.0;
                }
            }
        }
        out
    };
    let per_pair = |f: &dyn Fn(usize) -> MatchCounts| {
        [0, 1, 2].map(|i| {
            let c = f(i);
            oracle_prf(c.correct as f64, c.partial as f64, c.missing as f64, c.spurious as f64)
        })
    };
    compare(as_grid(&report.overall), mean3(per_pair(&|i| pair_totals[i])), "overall")?;
    for l in Label::ALL {
        let want = mean3(per_pair(&|i| {
            TALLIES[i]
                .iter()
                .find(|t| t.0 == l)
                .map(|t| MatchCounts::new(t.1, t.2, t.3, t.4))
                .unwrap_or_default()
        }));
        compare(as_grid(&report.per_label[&l]), want, l.as_str())?;
    }
    // closed forms for the overall F-scores
    let f = report.overall.fscore;
    compare(
        [[0.0, 0.0, f.strict], [0.0, 0.0, f.lenient], [0.0, 0.0, f.average]],
        [[0.0, 0.0, 19.0 / 45.0], [0.0, 0.0, 86.0 / 135.0], [0.0, 0.0, 143.0 / 270.0]],
        "closed form",
    )?;

    let blocks = report.per_label.values().chain(std::iter::once(&report.overall));
    for s in blocks {
        for v in [s.precision, s.recall, s.fscore] {
            ensure(v.strict <= v.average && v.average <= v.lenient, || format!("ordering violated: {v:?}"))?;
        }
    }
    Ok(format!(
        "3 pairs, counts match hand tally, max deviation {max_dev:.1e}; overall F strict {:.4} <= average {:.4} <= lenient {:.4}",
        f.strict, f.average, f.lenient
    ))
}

// ---------------------------------------------------------------- curation

fn curation() -> Outcome {
    use Label::*;
    let mut d1 = Document::from_sentences("d1", "Tax", &["One.", "Two.", "Three.", "Four."]).unwrap();
    d1.set_sentence_annotation("A1", &[Fac, Arg, Pre, Sta]);
    d1.set_sentence_annotation("A2", &[Fac, Arg, Ratio, Pre]);
    d1.set_sentence_annotation("A3", &[Fac, Sta, Ratio, Rpc]);
    let mut d2 = Document::from_sentences("d2", "Civil", &["One.", "Two."]).unwrap();
    d2.set_sentence_annotation("A1", &[Rlc, Rpc]);
    d2.set_sentence_annotation("A2", &[Rlc, Rpc]);
    d2.set_sentence_annotation("A3", &[Arg, Rpc]);
    let corpus = Corpus::new(vec![d1, d2]).unwrap();

    match majority_vote_gold(&corpus, &TiePolicy::Error) {
        Err(Error::Tie(at)) => ensure(at == vec![("d1".to_string(), 3)], || format!("tie list {at:?}"))?,
        other => return Err(format!("expected a tie error, got {other:?}")),
    }
    let priority = |order: &[&str]| {
        let policy = TiePolicy::AnnotatorPriority(order.iter().map(|s| s.to_string()).collect());
        majority_vote_gold(&corpus, &policy).map_err(|e| e.to_string())
    };
    let gold = priority(&["A2", "A1", "A3"])?;
    let want = [vec![Fac, Arg, Ratio, Pre], vec![Rlc, Rpc]];
    for (d, w) in gold.documents.iter().zip(&want) {
        ensure(d.gold.as_ref() == Some(w), || format!("{}: {:?} vs {w:?}", d.doc_id, d.gold))?;
    }
    ensure(priority(&["A2", "A1", "A3"])? == gold, || "tie resolution is not repeatable".into())?;
    let other = priority(&["A3", "A1", "A2"])?;
    ensure(other.documents[0].gold.as_ref().unwrap()[3] == Rpc, || "priority order ignored".into())?;
    Ok("clear majorities reproduced; 1-1-1 tie raises an error or resolves by priority (PRE for A2 first, RPC for A3 first)".into())
}

// ------------------------------------------------------- synthetic grid

fn config(model: ModelKind, fs: Option<FeatureSet>, mode: Option<EmbeddingMode>, seed: u64, epochs: Option<usize>) -> TrainConfig {
    TrainConfig::resolve(
        ConfigOverrides {
            model: Some(model),
            feature_set: fs,
            embedding_mode: mode,
            seed: Some(seed),
            epochs,
            ..Default::default()
        },
        Default::default(),
    )
    .unwrap()
}

fn held_out_macro_f(train: &Corpus, test: &Corpus, cfg: &TrainConfig) -> Result<f64, String> {
    let m = model::train(train, cfg, None).map_err(|e| e.to_string())?.model;
    let preds = m.predict(test, None).map_err(|e| e.to_string())?;
    Ok(evaluate_corpus(&preds, test).map_err(|e| e.to_string())?.overall.macro_avg.fscore)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn synthetic_grid() -> Outcome {
    let start = Instant::now();
    let columns = ["crf:saravanan", "crf:savelka", "crf:combined", "hier-crf:pretrained", "hier-crf:random"];
    let mut scores: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for seed in 0..3u64 {
        let corpus = generate(&SyntheticConfig {
            documents: 50,
            mean_sentences: 60,
            seed,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let (train, test) = corpus.documents.split_at(40);
        let train = Corpus::new(train.to_vec()).unwrap();
        let test = Corpus::new(test.to_vec()).unwrap();
        let cfgs = [
            config(ModelKind::CrfBaseline, Some(FeatureSet::Saravanan), None, seed, None),
            config(ModelKind::CrfBaseline, Some(FeatureSet::Savelka), None, seed, None),
            config(ModelKind::CrfBaseline, Some(FeatureSet::Combined), None, seed, None),
            config(ModelKind::HierBilstmCrf, None, Some(EmbeddingMode::Pretrained), seed, None),
            config(ModelKind::HierBilstmCrf, None, Some(EmbeddingMode::RandomInit), seed, None),
        ];
        for (col, cfg) in cfgs.iter().enumerate() {
            scores[col].push(held_out_macro_f(&train, &test, cfg)?);
        }
        eprintln!(
            "  seed {seed}: {}",
            columns
                .iter()
                .zip(&scores)
                .map(|(c, s)| format!("{c} {:.3}", s[seed as usize]))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    let med: Vec<f64> = scores.iter().map(|s| median(s.clone())).collect();
    let [sar, sav, comb, pre, rand] = [med[0], med[1], med[2], med[3], med[4]];
    let summary = format!(
        "medians: saravanan {sar:.3}, savelka {sav:.3}, combined {comb:.3}, hier-crf pretrained {pre:.3}, random-init {rand:.3}; {:.0}s",
        start.elapsed().as_secs_f64()
    );
    let fail = |what: &str| format!("{what} ({summary})");
    ensure(comb >= 0.80, || fail("(a) combined CRF below 0.80"))?;
    ensure(comb >= sar && comb >= sav, || fail("(a) combined CRF below a single-feature variant"))?;
    ensure(pre >= 0.90, || fail("(b) pretrained Hier-BiLSTM-CRF below 0.90"))?;
    ensure(pre >= comb, || fail("(b) pretrained Hier-BiLSTM-CRF below the CRF baseline"))?;
    ensure(rand <= pre, || fail("(c) random-init above pretrained"))?;
    within(start.elapsed(), 900.0)?;
    Ok(summary)
}

// ---------------------------------------------------------------- overfit

fn overfit() -> Outcome {
    let start = Instant::now();
    let train = generate(&SyntheticConfig {
        documents: 5,
        mean_sentences: 20,
        seed: 11,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let variants = [
        (ModelKind::CrfBaseline, None),
        (ModelKind::HierBilstm, Some(EmbeddingMode::RandomInit)),
        (ModelKind::HierBilstm, Some(EmbeddingMode::Pretrained)),
        (ModelKind::HierBilstmCrf, Some(EmbeddingMode::RandomInit)),
        (ModelKind::HierBilstmCrf, Some(EmbeddingMode::Pretrained)),
    ];
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for (kind, mode) in variants {
        let fs = (!kind.is_neural()).then_some(FeatureSet::Combined);
        let cfg = config(kind, fs, mode, 0, Some(200));
        let m = model::train(&train, &cfg, None).map_err(|e| e.to_string())?.model;
        let preds = m.predict(&train, None).map_err(|e| e.to_string())?;
        let acc = evaluate_corpus(&preds, &train).map_err(|e| e.to_string())?.overall.accuracy;
        let name = format!("{}{}", kind.as_str(), mode.map_or(String::new(), |m| format!("/{m:?}")));
        if acc < 0.99 {
            failures.push(format!("{name} {acc:.3}"));
        }
        parts.push(format!("{name} {acc:.3}"));
    }
    let summary = format!("training accuracy after 200 epochs: {}; {:.0}s", parts.join(", "), start.elapsed().as_secs_f64());
    ensure(failures.is_empty(), || format!("below 0.99: {} ({summary})", failures.join(", ")))?;
    Ok(summary)
}

// ------------------------------------------------------------ determinism

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let corpus = generate(&SyntheticConfig {
        documents: 6,
        mean_sentences: 12,
        seed: 8,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    save_corpus(&corpus, tmp.path().join("c.jsonl")).map_err(|e| e.to_string())?;
    let runs: [&[&str]; 2] = [
        &["--model", "crf_baseline", "--epochs", "10"],
        &["--model", "hier_bilstm_crf", "--embedding-mode", "random_init", "--epochs", "2", "--d-w", "8", "--h-tok", "6", "--h-doc", "6", "--min-freq", "1"],
    ];
    let mut files = 0;
    for (r, extra) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (attempt, jobs) in ["1", "3"].iter().enumerate() {
            let dir = format!("run{r}_{attempt}");
            let status = Command::new(env!("CARGO_BIN_EXE_rhetorical-roles"))
                .current_dir(tmp.path())
                .args(["cross-validate", "--corpus", "c.jsonl", "--k", "3", "--seed", "5", "--domain-csv", "--jobs", jobs])
                .args(*extra)
                .args(["--output-dir", &dir])
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
            outputs.push(read_dir_sorted(&tmp.path().join(&dir)));
        }
        ensure(outputs[0] == outputs[1], || format!("run {r}: reports differ between repeats"))?;
        files += outputs[0].len();
    }
    Ok(format!("2 configurations x 2 repeats (1 and 3 jobs), {files} report files byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("crf exactness", crf_exactness),
        ("crf gradients", crf_gradients),
        ("neural gradients", neural_gradients),
        ("iaa formulas", iaa_formulas),
        ("curation", curation),
        ("synthetic grid", synthetic_grid),
        ("overfit capacity", overfit),
        ("determinism", determinism),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
