//! Seeded generator of labeled judgment-like documents.
//!
//! Labels follow a sticky Markov chain over the six non-final roles and every
//! document closes with a short run of `RPC` sentences. Each sentence mixes
//! shared filler, words typical of its role, and (with probability
//! `cue_rate`) one cue phrase from [`Lexicons::default`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::features::Lexicons;
use crate::label::{Label, K};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub documents: usize,
    /// Sentences per document are drawn uniformly from
    /// `mean_sentences ± mean_sentences / 5`.
    pub mean_sentences: usize,
    /// Probability that a sentence carries a cue phrase of its label.
    pub cue_rate: f64,
    /// Probability that each topical word is drawn from a random other label.
    pub noise: f64,
    /// Probability of staying in the current role between sentences.
    pub stickiness: f64,
    pub domains: Vec<String>,
    pub id_prefix: String,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            documents: 50,
            mean_sentences: 60,
            cue_rate: 0.6,
            noise: 0.1,
            stickiness: 0.85,
            domains: ["Criminal", "Civil", "Constitutional", "Tax"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            id_prefix: "syn".into(),
            seed: 0,
        }
    }
}

const FILLER: &[&str] = &[
    "the", "of", "and", "in", "a", "to", "was", "that", "with", "by", "for", "this", "matter",
    "case", "party", "question", "record", "date", "parties", "present", "further", "same",
];

fn topical(label: Label) -> &'static [&'static str] {
    match label {
        Label::Fac => &[
            "complainant", "village", "night", "incident", "residence", "vehicle", "police",
            "morning", "brother", "property",
        ],
        Label::Rlc => &[
            "acquitted", "sentenced", "impugned", "judgment", "appellate", "decree", "conviction",
            "earlier", "findings", "below",
        ],
        Label::Arg => &[
            "submitted", "contended", "counsel", "urged", "argued", "respondent", "plea", "stated",
            "learned", "contention",
        ],
        Label::Sta => &[
            "provision", "clause", "enacted", "penal", "code", "statute", "schedule", "proviso",
            "legislature", "amendment",
        ],
        Label::Pre => &[
            "precedent", "reported", "bench", "observed", "decision", "cited", "overruled",
            "authority", "followed", "reliance",
        ],
        Label::Ratio => &[
            "evidence", "reasoning", "principle", "view", "settled", "consider", "satisfied",
            "established", "merit", "opinion",
        ],
        Label::Rpc => &[
            "dismissed", "allowed", "costs", "directed", "disposed", "quashed", "restored",
            "released", "forthwith", "accordingly",
        ],
    }
}

const BODY: [Label; 6] = [Label::Fac, Label::Rlc, Label::Arg, Label::Sta, Label::Pre, Label::Ratio];

/// Next non-final role: mostly forward through the usual order of a
/// judgment, with statute and precedent interleaved with reasoning.
fn next_label(current: Label, stickiness: f64, rng: &mut ChaCha8Rng) -> Label {
    if rng.gen_bool(stickiness) {
        return current;
    }
    let choices: &[(Label, u32)] = match current {
        Label::Fac => &[(Label::Rlc, 6), (Label::Arg, 3), (Label::Sta, 1)],
        Label::Rlc => &[(Label::Arg, 6), (Label::Fac, 2), (Label::Ratio, 2)],
        Label::Arg => &[(Label::Sta, 3), (Label::Pre, 3), (Label::Ratio, 4)],
        Label::Sta => &[(Label::Ratio, 5), (Label::Pre, 3), (Label::Arg, 2)],
        Label::Pre => &[(Label::Ratio, 6), (Label::Sta, 2), (Label::Arg, 2)],
        _ => &[(Label::Pre, 4), (Label::Sta, 3), (Label::Arg, 3)],
    };
    choices.choose_weighted(rng, |c| c.1).unwrap().0
}

fn sentence(label: Label, lex: &Lexicons, cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> String {
    let mut words: Vec<String> = (0..rng.gen_range(6..=10))
        .map(|_| FILLER.choose(rng).unwrap().to_string())
        .collect();
    for _ in 0..rng.gen_range(2..=4) {
        let source = if rng.gen_bool(cfg.noise) {
            Label::from_index(rng.gen_range(0..K)).unwrap()
        } else {
            label
        };
        let at = rng.gen_range(0..=words.len());
        words.insert(at, topical(source).choose(rng).unwrap().to_string());
    }
    if label == Label::Sta || (label == Label::Pre && rng.gen_bool(0.5)) {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, rng.gen_range(2..500).to_string());
    }
    if rng.gen_bool(cfg.cue_rate) {
        if let Some(cue) = lex.cues.get(&label).and_then(|c| c.choose(rng)) {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, cue.clone());
        }
    }
    let mut text = words.join(" ");
    if let Some(first) = text.get(..1) {
        text.replace_range(..1, &first.to_uppercase());
    }
    text.push('.');
    text
}

/// Generates `cfg.documents` gold-labeled documents named
/// `<id_prefix>-<n>`, with domains assigned round-robin.
pub fn generate(cfg: &SyntheticConfig) -> Result<Corpus> {
    if cfg.mean_sentences < 5 {
        return Err(Error::Argument("mean_sentences must be at least 5".into()));
    }
    if cfg.domains.is_empty() {
        return Err(Error::Argument("at least one domain is required".into()));
    }
    for p in [cfg.cue_rate, cfg.noise, cfg.stickiness] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("probability {p} outside [0, 1]")));
        }
    }
    let lex = Lexicons::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let spread = cfg.mean_sentences / 5;
    let mut docs = Vec::with_capacity(cfg.documents);
    for n in 0..cfg.documents {
        let len = rng.gen_range(cfg.mean_sentences - spread..=cfg.mean_sentences + spread);
        let closing = rng.gen_range(1..=3);
        let mut labels = Vec::with_capacity(len);
        let mut current = if rng.gen_bool(0.9) { Label::Fac } else { *BODY.choose(&mut rng).unwrap() };
        for _ in 0..len - closing {
            labels.push(current);
            current = next_label(current, cfg.stickiness, &mut rng);
        }
        labels.extend(std::iter::repeat(Label::Rpc).take(closing));
        let texts: Vec<String> = labels.iter().map(|&l| sentence(l, &lex, cfg, &mut rng)).collect();
        let domain = &cfg.domains[n % cfg.domains.len()];
        let mut doc = Document::from_sentences(format!("{}-{n:03}", cfg.id_prefix), domain.clone(), &texts)?;
        doc.gold = Some(labels);
        docs.push(doc);
    }
    Corpus::new(docs)
}

/// Adds sentence-level annotations for each name in `annotators`: a copy of
/// the gold labels in which each label is replaced by a uniformly drawn one
/// with probability `error_rate`.
pub fn add_noisy_annotators(
    corpus: &mut Corpus,
    annotators: &[&str],
    error_rate: f64,
    seed: u64,
) -> Result<()> {
    if !(0.0..=1.0).contains(&error_rate) {
        return Err(Error::Argument(format!("error rate {error_rate} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for doc in &mut corpus.documents {
        let gold = doc.gold.clone().ok_or_else(|| Error::Validation {
            doc_id: doc.doc_id.clone(),
            rule: "document has no gold labels to perturb".into(),
        })?;
        for name in annotators {
            let labels: Vec<Label> = gold
                .iter()
                .map(|&l| {
                    if rng.gen_bool(error_rate) {
                        Label::from_index(rng.gen_range(0..K)).unwrap()
                    } else {
                        l
                    }
                })
                .collect();
            doc.set_sentence_annotation(*name, &labels);
        }
    }
    Ok(())
}
