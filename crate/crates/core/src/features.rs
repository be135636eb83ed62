//! Handcrafted sentence features for the CRF baselines: layout, cue phrases,
//! legal entity gazetteer, and coarse part-of-speech counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::text::{normalize, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoarseTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Num,
    Punct,
    Other,
}

impl CoarseTag {
    pub const ALL: [CoarseTag; 7] = [
        CoarseTag::Noun,
        CoarseTag::Verb,
        CoarseTag::Adj,
        CoarseTag::Adv,
        CoarseTag::Num,
        CoarseTag::Punct,
        CoarseTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseTag::Noun => "NOUN",
            CoarseTag::Verb => "VERB",
            CoarseTag::Adj => "ADJ",
            CoarseTag::Adv => "ADV",
            CoarseTag::Num => "NUM",
            CoarseTag::Punct => "PUNCT",
            CoarseTag::Other => "OTHER",
        }
    }
}

const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "of", "in", "on", "at", "by", "for",
    "with", "from", "to", "into", "under", "upon", "and", "or", "but", "nor", "if", "whether",
    "as", "than", "he", "she", "it", "they", "we", "you", "i", "him", "her", "them", "us", "his",
    "its", "their", "our", "which", "who", "whom", "whose", "what", "there", "thereof", "herein",
];

const VERBS: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "has", "have", "had", "do", "does", "did",
    "held", "hold", "holds", "allow", "allows", "dismiss", "dismisses", "set", "find", "found",
    "submitted", "contended", "argued", "said", "says", "shall", "may", "must", "can", "could",
    "would", "should", "will", "direct", "directs", "filed", "made", "observed", "stated",
];

const ADJECTIVES: &[&str] = &[
    "learned", "legal", "lower", "present", "high", "supreme", "impugned", "aforesaid", "said",
    "criminal", "civil", "constitutional", "liable", "guilty", "valid", "invalid", "same", "such",
    "other", "several", "reasonable", "proper",
];

const ADVERBS: &[&str] = &[
    "not", "very", "also", "therefore", "hence", "thus", "however", "accordingly", "further",
    "here", "now", "then", "already", "never", "merely",
];

/// Deterministic closed-lexicon plus suffix-rule tagger over the seven coarse
/// tags.
pub fn pos_tag<S: AsRef<str>>(tokens: &[S]) -> Vec<CoarseTag> {
    tokens.iter().map(|t| tag_token(t.as_ref())).collect()
}

fn tag_token(tok: &str) -> CoarseTag {
    if tok.is_empty() || tok.chars().all(|c| !c.is_alphanumeric()) {
        return CoarseTag::Punct;
    }
    if tok.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        return CoarseTag::Num;
    }
    let lower = tok.to_lowercase();
    let w = lower.as_str();
    if FUNCTION_WORDS.contains(&w) {
        return CoarseTag::Other;
    }
    if VERBS.contains(&w) {
        return CoarseTag::Verb;
    }
    if ADJECTIVES.contains(&w) {
        return CoarseTag::Adj;
    }
    if ADVERBS.contains(&w) {
        return CoarseTag::Adv;
    }
    if w.len() > 3 && w.ends_with("ly") {
        CoarseTag::Adv
    } else if w.len() > 4 && (w.ends_with("ing") || w.ends_with("ed")) {
        CoarseTag::Verb
    } else if w.ends_with("tion") {
        CoarseTag::Noun
    } else if w.len() > 5 && (w.ends_with("ous") || w.ends_with("ive") || w.ends_with("able")) {
        CoarseTag::Adj
    } else {
        CoarseTag::Noun
    }
}

/// Cue phrases keyed by the label they indicate, plus entity surface forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicons {
    pub cues: BTreeMap<Label, Vec<String>>,
    pub entities: Vec<String>,
}

fn owned(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Default for Lexicons {
    fn default() -> Self {
        let mut cues = BTreeMap::new();
        cues.insert(
            Label::Fac,
            owned(&["first information report", "was lodged", "the facts", "was arrested", "was appointed"]),
        );
        cues.insert(
            Label::Rlc,
            owned(&["the high court", "trial court", "the lower court", "was convicted", "the tribunal held"]),
        );
        cues.insert(
            Label::Arg,
            owned(&["learned counsel submitted", "the appellant contended", "it was argued", "on behalf of", "urged that"]),
        );
        cues.insert(
            Label::Sta,
            owned(&["section", "act", "article", "rule", "sub-section", "notification"]),
        );
        cues.insert(
            Label::Pre,
            owned(&["in the case of", "this court in", "reported in", "relied upon", "scc"]),
        );
        cues.insert(
            Label::Ratio,
            owned(&["it is held", "in our opinion", "we are of the view", "it is well settled", "therefore"]),
        );
        cues.insert(
            Label::Rpc,
            owned(&["we direct", "allow the appeal", "appeal is dismissed", "no order as to costs", "set aside"]),
        );
        Lexicons {
            cues,
            entities: owned(&[
                "Supreme Court",
                "High Court",
                "Trial Court",
                "Sessions Court",
                "Magistrate",
                "Tribunal",
                "Union of India",
                "State",
            ]),
        }
    }
}

impl Lexicons {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lex: Lexicons = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        lex.validate()?;
        Ok(lex)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.cues.values().flatten().chain(&self.entities);
        for p in all {
            if normalize(p).is_empty() {
                return Err(Error::Argument("lexicon phrases must be non-empty".into()));
            }
        }
        Ok(())
    }
}

/// Which handcrafted feature families a baseline uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// Layout, cue phrases and named entities.
    Saravanan,
    /// Layout and part-of-speech counts.
    Savelka,
    #[default]
    Combined,
}

impl FeatureSet {
    fn cues(self) -> bool {
        !matches!(self, FeatureSet::Savelka)
    }

    fn pos(self) -> bool {
        !matches!(self, FeatureSet::Saravanan)
    }
}

/// Sparse (index, value) pairs sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }
}

const VOCAB_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVocabulary {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    frozen: bool,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    version: u32,
    features: BTreeMap<String, usize>,
}

impl FeatureVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    /// SHA-256 over the feature names in index order, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for n in &self.names {
            h.update(n.as_bytes());
            h.update([0u8]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&VocabFile {
            version: VOCAB_VERSION,
            features: self.index.clone(),
        })
        .expect("vocabulary serializes")
    }

    /// Parses a vocabulary file; the result is frozen.
    pub fn from_json(s: &str) -> Result<Self> {
        let f: VocabFile = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if f.version != VOCAB_VERSION {
            return Err(Error::Model(format!("unsupported vocabulary version {}", f.version)));
        }
        let mut names = vec![None; f.features.len()];
        for (name, &i) in &f.features {
            match names.get_mut(i) {
                Some(slot @ None) => *slot = Some(name.clone()),
                _ => return Err(Error::Model(format!("feature index {i} is not a bijection"))),
            }
        }
        Ok(FeatureVocabulary {
            names: names.into_iter().map(Option::unwrap).collect(),
            index: f.features,
            frozen: true,
        })
    }
}

fn slug(phrase: &str) -> String {
    tokenize(&normalize(phrase)).join("_")
}

/// Token-boundary, case-insensitive phrase matcher.
struct PhraseMatcher {
    patterns: Vec<(String, String)>,
}

impl PhraseMatcher {
    fn new(phrases: impl IntoIterator<Item = (String, String)>) -> Self {
        let patterns = phrases
            .into_iter()
            .map(|(name, p)| (name, format!(" {} ", tokenize(&normalize(&p)).join(" "))))
            .collect();
        PhraseMatcher { patterns }
    }

    fn matches<'a>(&'a self, padded: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.patterns
            .iter()
            .filter(move |(_, p)| padded.contains(p.as_str()))
            .map(|(n, _)| n.as_str())
    }
}

/// Featurizer bound to a lexicon set and feature family selection.
pub struct Featurizer {
    cues: PhraseMatcher,
    entities: PhraseMatcher,
    set: FeatureSet,
}

impl Featurizer {
    pub fn new(lexicons: &Lexicons, set: FeatureSet) -> Self {
        let cues = lexicons.cues.iter().flat_map(|(label, phrases)| {
            phrases.iter().map(move |p| {
                (
                    format!("cue:{}:{}", label.as_str().to_lowercase(), slug(p)),
                    p.clone(),
                )
            })
        });
        let entities = lexicons
            .entities
            .iter()
            .map(|p| (format!("ent:{}", slug(p)), p.clone()));
        Featurizer {
            cues: PhraseMatcher::new(cues),
            entities: PhraseMatcher::new(entities),
            set,
        }
    }

    /// Named features for each sentence, before vocabulary lookup.
    pub fn named_features(&self, doc: &Document) -> Vec<Vec<(String, f64)>> {
        let t = doc.sentences.len();
        doc.sentences
            .iter()
            .map(|s| {
                let mut out: Vec<(String, f64)> = Vec::new();
                let tokens = tokenize(&s.text);
                let pos = s.index as f64 / t as f64;
                out.push(("layout:position".into(), pos));
                let decile = ((pos * 10.0).floor() as usize).min(9);
                out.push((format!("layout:decile_{decile}"), 1.0));
                if s.index == 0 {
                    out.push(("layout:is_first".into(), 1.0));
                }
                if s.index + 1 == t {
                    out.push(("layout:is_last".into(), 1.0));
                }
                let len_bucket = match tokens.len() {
                    0..=10 => "le10",
                    11..=25 => "11_25",
                    26..=50 => "26_50",
                    _ => "gt50",
                };
                out.push((format!("layout:len_{len_bucket}"), 1.0));
                if self.set.cues() {
                    let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
                    let padded = format!(" {} ", lowered.join(" "));
                    out.extend(self.cues.matches(&padded).map(|n| (n.to_string(), 1.0)));
                    out.extend(self.entities.matches(&padded).map(|n| (n.to_string(), 1.0)));
                }
                if self.set.pos() {
                    let mut counts = [0usize; 7];
                    for tag in pos_tag(&tokens) {
                        counts[CoarseTag::ALL.iter().position(|&c| c == tag).unwrap()] += 1;
                    }
                    for (tag, n) in CoarseTag::ALL.iter().zip(counts) {
                        if n > 0 {
                            out.push((format!("pos:{}", tag.as_str()), n as f64));
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// One sparse vector per sentence. With `fit`, new names are added to the
    /// (unfrozen) vocabulary; otherwise the vocabulary must be frozen and
    /// unseen names are dropped.
    pub fn extract(
        &self,
        doc: &Document,
        vocab: &mut FeatureVocabulary,
        fit: bool,
    ) -> Result<Vec<FeatureVector>> {
        if doc.sentences.is_empty() {
            return Err(Error::Argument(format!("document `{}` has no sentences", doc.doc_id)));
        }
        if fit && vocab.frozen {
            return Err(Error::State("cannot fit a frozen vocabulary".into()));
        }
        if !fit && !vocab.frozen {
            return Err(Error::State("vocabulary must be frozen before transform".into()));
        }
        Ok(self
            .named_features(doc)
            .into_iter()
            .map(|named| {
                let mut entries: Vec<(usize, f64)> = named
                    .iter()
                    .filter_map(|(n, v)| {
                        let i = if fit { Some(vocab.intern(n)) } else { vocab.get(n) };
                        i.map(|i| (i, *v))
                    })
                    .collect();
                entries.sort_by_key(|e| e.0);
                entries.dedup_by_key(|e| e.0);
                FeatureVector { entries }
            })
            .collect())
    }
}

/// Convenience wrapper around [`Featurizer::extract`].
pub fn extract_features(
    doc: &Document,
    lexicons: &Lexicons,
    set: FeatureSet,
    vocab: &mut FeatureVocabulary,
    fit: bool,
) -> Result<Vec<FeatureVector>> {
    Featurizer::new(lexicons, set).extract(doc, vocab, fit)
}
