//! Documents, sentences, annotator layers and gold labels, with JSON Lines
//! corpus I/O, a rule-based sentence splitter, and domain-proportional
//! sampling.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// Half-open character range `[start, end)` into a document's raw text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Number of characters shared with `other`.
    pub fn overlap(&self, other: &Span) -> usize {
        self.end
            .min(other.end)
            .saturating_sub(self.start.max(other.start))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSpan {
    #[serde(flatten)]
    pub span: Span,
    pub label: Label,
}

impl LabeledSpan {
    pub fn new(start: usize, end: usize, label: Label) -> Self {
        LabeledSpan {
            span: Span::new(start, end),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub domain: String,
    pub raw_text: String,
    pub sentences: Vec<Sentence>,
    pub annotations: BTreeMap<String, Vec<LabeledSpan>>,
    /// One label per sentence, indexed by sentence position.
    pub gold: Option<Vec<Label>>,
}

impl Document {
    /// Builds a document from raw text and sentence spans, filling in each
    /// sentence's text. Invariants are checked.
    pub fn from_spans(
        doc_id: impl Into<String>,
        domain: impl Into<String>,
        raw_text: impl Into<String>,
        spans: &[Span],
    ) -> Result<Self> {
        let doc_id = doc_id.into();
        let raw_text = raw_text.into();
        let sentences = sentences_from_spans(&doc_id, &raw_text, spans)?;
        let doc = Document {
            doc_id,
            domain: domain.into(),
            raw_text,
            sentences,
            annotations: BTreeMap::new(),
            gold: None,
        };
        doc.validate()?;
        Ok(doc)
    }

    /// Builds a document by joining pre-split sentence texts with single
    /// spaces.
    pub fn from_sentences<S: AsRef<str>>(
        doc_id: impl Into<String>,
        domain: impl Into<String>,
        sentences: &[S],
    ) -> Result<Self> {
        let mut raw = String::new();
        let mut spans = Vec::with_capacity(sentences.len());
        let mut pos = 0;
        for (i, s) in sentences.iter().enumerate() {
            if i > 0 {
                raw.push(' ');
                pos += 1;
            }
            let n = s.as_ref().chars().count();
            raw.push_str(s.as_ref());
            spans.push(Span::new(pos, pos + n));
            pos += n;
        }
        Self::from_spans(doc_id, domain, raw, &spans)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Index of the sentence sharing the most characters with `span`; ties go
    /// to the earlier sentence. `None` when nothing overlaps.
    pub fn resolve_span(&self, span: &Span) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for s in &self.sentences {
            let ov = s.span.overlap(span);
            if ov > 0 && best.map_or(true, |(_, b)| ov > b) {
                best = Some((s.index, ov));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Sentence-level view of one annotator's spans: each span votes for the
    /// sentence it overlaps most; a later span overrides an earlier one on the
    /// same sentence.
    pub fn sentence_labels(&self, annotator: &str) -> Option<Vec<Option<Label>>> {
        let spans = self.annotations.get(annotator)?;
        let mut out = vec![None; self.sentences.len()];
        for ls in spans {
            if let Some(i) = self.resolve_span(&ls.span) {
                out[i] = Some(ls.label);
            }
        }
        Some(out)
    }

    /// Annotation layer that labels each sentence's exact span.
    pub fn set_sentence_annotation(&mut self, annotator: impl Into<String>, labels: &[Label]) {
        let spans = self
            .sentences
            .iter()
            .zip(labels)
            .map(|(s, &label)| LabeledSpan { span: s.span, label })
            .collect();
        self.annotations.insert(annotator.into(), spans);
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |rule: String| Error::Validation {
            doc_id: self.doc_id.clone(),
            rule,
        };
        let n_chars = self.raw_text.chars().count();
        let mut prev_end = 0;
        for (i, s) in self.sentences.iter().enumerate() {
            if s.index != i {
                return Err(fail(format!("sentence {i} carries index {}", s.index)));
            }
            if s.span.start >= s.span.end {
                return Err(fail(format!("sentence {i} has empty span")));
            }
            if s.span.end > n_chars {
                return Err(fail(format!("sentence {i} span exceeds raw_text")));
            }
            if i > 0 && s.span.start < prev_end {
                return Err(fail(format!("sentence {i} overlaps or precedes sentence {}", i - 1)));
            }
            prev_end = s.span.end;
        }
        for (annotator, spans) in &self.annotations {
            let mut sorted: Vec<Span> = spans.iter().map(|l| l.span).collect();
            sorted.sort();
            for ls in spans {
                if ls.span.start >= ls.span.end {
                    return Err(fail(format!("annotator `{annotator}` has an empty span")));
                }
                if ls.span.end > n_chars {
                    return Err(fail(format!("annotator `{annotator}` span exceeds raw_text")));
                }
            }
            if sorted.windows(2).any(|w| w[1].start < w[0].end) {
                return Err(fail(format!("annotator `{annotator}` has overlapping spans")));
            }
        }
        if let Some(gold) = &self.gold {
            if gold.len() != self.sentences.len() {
                return Err(fail(format!(
                    "gold has {} labels for {} sentences",
                    gold.len(),
                    self.sentences.len()
                )));
            }
        }
        Ok(())
    }
}

fn sentences_from_spans(doc_id: &str, raw: &str, spans: &[Span]) -> Result<Vec<Sentence>> {
    let offsets: Vec<usize> = raw
        .char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(raw.len()))
        .collect();
    spans
        .iter()
        .enumerate()
        .map(|(index, &span)| {
            if span.start >= span.end || span.end >= offsets.len() {
                return Err(Error::Validation {
                    doc_id: doc_id.to_string(),
                    rule: format!("sentence {index} span ({}, {}) is invalid", span.start, span.end),
                });
            }
            Ok(Sentence {
                index,
                text: raw[offsets[span.start]..offsets[span.end]].to_string(),
                span,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let c = Corpus { documents };
        c.validate()?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for d in &self.documents {
            if !seen.insert(d.doc_id.as_str()) {
                return Err(Error::Validation {
                    doc_id: d.doc_id.clone(),
                    rule: "duplicate doc_id".into(),
                });
            }
            d.validate()?;
        }
        Ok(())
    }

    /// Distinct annotator ids across all documents, sorted.
    pub fn annotators(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self
            .documents
            .iter()
            .flat_map(|d| d.annotations.keys())
            .collect();
        set.into_iter().cloned().collect()
    }
}

// Wire format: one JSON object per line.

#[derive(Serialize, Deserialize)]
struct SentenceRecord {
    start: usize,
    end: usize,
}

#[derive(Serialize, Deserialize)]
struct GoldRecord {
    sentence: usize,
    label: Label,
}

#[derive(Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: String,
    domain: String,
    raw_text: String,
    sentences: Vec<SentenceRecord>,
    #[serde(default)]
    annotations: BTreeMap<String, Vec<LabeledSpan>>,
    #[serde(default)]
    gold: Option<Vec<GoldRecord>>,
}

impl DocumentRecord {
    fn into_document(self) -> Result<Document> {
        let spans: Vec<Span> = self
            .sentences
            .iter()
            .map(|s| Span::new(s.start, s.end))
            .collect();
        let sentences = sentences_from_spans(&self.doc_id, &self.raw_text, &spans)?;
        let gold = match self.gold {
            None => None,
            Some(records) => {
                let mut labels: Vec<Option<Label>> = vec![None; sentences.len()];
                for g in records {
                    let slot = labels.get_mut(g.sentence).ok_or_else(|| Error::Validation {
                        doc_id: self.doc_id.clone(),
                        rule: format!("gold refers to missing sentence {}", g.sentence),
                    })?;
                    if slot.replace(g.label).is_some() {
                        return Err(Error::Validation {
                            doc_id: self.doc_id.clone(),
                            rule: format!("gold labels sentence {} twice", g.sentence),
                        });
                    }
                }
                let gold: Option<Vec<Label>> = labels.iter().copied().collect();
                Some(gold.ok_or_else(|| Error::Validation {
                    doc_id: self.doc_id.clone(),
                    rule: "gold does not label every sentence".into(),
                })?)
            }
        };
        let doc = Document {
            doc_id: self.doc_id,
            domain: self.domain,
            raw_text: self.raw_text,
            sentences,
            annotations: self.annotations,
            gold,
        };
        doc.validate()?;
        Ok(doc)
    }

    fn from_document(d: &Document) -> Self {
        DocumentRecord {
            doc_id: d.doc_id.clone(),
            domain: d.domain.clone(),
            raw_text: d.raw_text.clone(),
            sentences: d
                .sentences
                .iter()
                .map(|s| SentenceRecord {
                    start: s.span.start,
                    end: s.span.end,
                })
                .collect(),
            annotations: d.annotations.clone(),
            gold: d.gold.as_ref().map(|g| {
                g.iter()
                    .enumerate()
                    .map(|(sentence, &label)| GoldRecord { sentence, label })
                    .collect()
            }),
        }
    }
}

/// Serializes one document as a single JSON line (no trailing newline).
pub fn document_to_json(d: &Document) -> String {
    serde_json::to_string(&DocumentRecord::from_document(d)).expect("document serializes")
}

/// Reads a JSON Lines corpus. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let doc = record.into_document()?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(Error::Validation {
                doc_id: doc.doc_id,
                rule: format!("duplicate doc_id at line {}", i + 1),
            });
        }
        documents.push(doc);
    }
    Ok(Corpus { documents })
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    crate::error::ensure_parent(path)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for d in &corpus.documents {
        writeln!(w, "{}", document_to_json(d)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Abbreviations shipped with the splitter, including common legal ones.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "Sec.", "No.", "vs.", "Hon'ble", "Art.", "Cl.", "Mr.", "Mrs.", "Ms.", "Dr.", "Ltd.", "Co.",
    "v.", "Ors.", "Anr.", "Crl.", "Cr.", "Vol.", "Para.", "para.", "i.e.", "e.g.", "viz.", "Sr.",
    "Jr.", "Govt.", "Pvt.", "Ss.", "S.",
];

pub fn default_abbreviations() -> BTreeSet<String> {
    DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect()
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

/// Rule-based splitter: a sentence ends at `.`, `?` or `!` (plus any closing
/// quotes or brackets) when followed by whitespace and a token starting with
/// an uppercase letter or digit. A period ending a word listed in
/// `abbreviations` never ends a sentence.
pub fn split_sentences(raw_text: &str, abbreviations: &BTreeSet<String>) -> Vec<Sentence> {
    let chars: Vec<char> = raw_text.chars().collect();
    let n = chars.len();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if start.is_none() {
            if !c.is_whitespace() {
                start = Some(i);
            } else {
                i += 1;
                continue;
            }
        }
        if is_terminator(c) {
            let mut end = i + 1;
            while end < n && (is_terminator(chars[end]) || is_closer(chars[end])) {
                end += 1;
            }
            let mut next = end;
            while next < n && chars[next].is_whitespace() {
                next += 1;
            }
            let boundary = next > end
                && next < n
                && (chars[next].is_uppercase() || chars[next].is_ascii_digit());
            if boundary && !(c == '.' && ends_with_abbreviation(&chars, i, abbreviations)) {
                spans.push(Span::new(start.take().unwrap(), end));
            }
            i = end;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        let mut end = n;
        while end > s && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        if end > s {
            spans.push(Span::new(s, end));
        }
    }
    spans
        .into_iter()
        .enumerate()
        .map(|(index, span)| Sentence {
            index,
            text: chars[span.start..span.end].iter().collect(),
            span,
        })
        .collect()
}

/// Whether the whitespace-delimited word ending at the period `dot` (leading
/// opening punctuation stripped) is a known abbreviation.
fn ends_with_abbreviation(chars: &[char], dot: usize, abbreviations: &BTreeSet<String>) -> bool {
    let mut s = dot;
    while s > 0 && !chars[s - 1].is_whitespace() {
        s -= 1;
    }
    while s < dot && matches!(chars[s], '(' | '[' | '"' | '\'' | '\u{201c}') {
        s += 1;
    }
    let word: String = chars[s..=dot].iter().collect();
    abbreviations.contains(&word)
}

/// Largest-remainder apportionment of `total` over `weights`. Ties in the
/// fractional part go to the earlier entry.
pub fn largest_remainder(weights: &[usize], total: usize) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut counts: Vec<usize> = weights.iter().map(|&w| w * total / sum).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // remainder numerators compare exactly as integers
    order.sort_by(|&a, &b| {
        let ra = (weights[a] * total) % sum;
        let rb = (weights[b] * total) % sum;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Draws `total` documents, apportioned across domains in proportion to
/// their frequency in `corpus`, uniformly within each domain. Output keeps
/// the corpus order.
pub fn sample_by_domain(corpus: &Corpus, total: usize, seed: u64) -> Result<Corpus> {
    if total > corpus.len() {
        return Err(Error::Argument(format!(
            "cannot sample {total} documents from a corpus of {}",
            corpus.len()
        )));
    }
    let mut by_domain: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, d) in corpus.documents.iter().enumerate() {
        by_domain.entry(d.domain.as_str()).or_default().push(i);
    }
    let weights: Vec<usize> = by_domain.values().map(Vec::len).collect();
    let quotas = largest_remainder(&weights, total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(total);
    for (members, &q) in by_domain.values().zip(&quotas) {
        let picks = rand::seq::index::sample(&mut rng, members.len(), q);
        chosen.extend(picks.into_iter().map(|k| members[k]));
    }
    chosen.sort_unstable();
    Ok(Corpus {
        documents: chosen
            .into_iter()
            .map(|i| corpus.documents[i].clone())
            .collect(),
    })
}

/// Per-domain document counts.
pub fn domain_counts(corpus: &Corpus) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for d in &corpus.documents {
        *out.entry(d.domain.clone()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spans(ss: &[Sentence]) -> Vec<(usize, usize)> {
        ss.iter().map(|s| (s.span.start, s.span.end)).collect()
    }

    #[test]
    fn split_empty() {
        assert!(split_sentences("", &default_abbreviations()).is_empty());
        assert!(split_sentences("  \n ", &default_abbreviations()).is_empty());
    }

    #[test]
    fn split_two_sentences() {
        let text = "The court ruled. The appeal failed.";
        let ss = split_sentences(text, &default_abbreviations());
        assert_eq!(spans(&ss), vec![(0, 16), (17, 35)]);
        assert_eq!(ss[0].text, "The court ruled.");
        assert_eq!(ss[1].text, "The appeal failed.");
    }

    #[test]
    fn split_respects_abbreviations() {
        let abbrev: BTreeSet<String> = ["Sec.".to_string()].into();
        let ss = split_sentences("See Sec. 302 IPC. Next point.", &abbrev);
        assert_eq!(ss.len(), 2);
        assert_eq!(ss[0].text, "See Sec. 302 IPC.");
        // without the abbreviation the digit after "Sec." starts a sentence
        let ss = split_sentences("See Sec. 302 IPC. Next point.", &BTreeSet::new());
        assert_eq!(ss.len(), 3);
    }

    #[test]
    fn split_needs_uppercase_or_digit() {
        let ss = split_sentences("It is so. and more! Really? 5 items", &BTreeSet::new());
        let texts: Vec<_> = ss.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, vec!["It is so. and more!", "Really?", "5 items"]);
    }

    #[test]
    fn split_keeps_closing_quotes() {
        let ss = split_sentences("He said \"stop.\" Then left.", &BTreeSet::new());
        assert_eq!(ss[0].text, "He said \"stop.\"");
        assert_eq!(ss[1].text, "Then left.");
    }

    #[test]
    fn split_counts_characters_not_bytes() {
        let ss = split_sentences("Bhārat wins. Next.", &BTreeSet::new());
        assert_eq!(spans(&ss), vec![(0, 12), (13, 18)]);
    }

    proptest! {
        #[test]
        fn splitter_spans_are_monotone_substrings(text in "[A-Za-z0-9 .?!\n]{0,80}") {
            let ss = split_sentences(&text, &default_abbreviations());
            let chars: Vec<char> = text.chars().collect();
            let mut prev = 0;
            for s in &ss {
                prop_assert!(s.span.start < s.span.end);
                prop_assert!(s.span.start >= prev);
                prev = s.span.end;
                let sub: String = chars[s.span.start..s.span.end].iter().collect();
                prop_assert_eq!(&sub, &s.text);
            }
            // every non-whitespace character is covered
            for (i, c) in chars.iter().enumerate() {
                if !c.is_whitespace() {
                    prop_assert!(ss.iter().any(|s| s.span.start <= i && i < s.span.end));
                }
            }
        }
    }

    #[test]
    fn largest_remainder_sums_to_total() {
        assert_eq!(largest_remainder(&[160, 100, 90, 80, 70], 50), vec![16, 10, 9, 8, 7]);
        assert_eq!(largest_remainder(&[1, 1, 1], 2), vec![1, 1, 0]);
        assert_eq!(largest_remainder(&[5, 3, 2], 7).iter().sum::<usize>(), 7);
        assert_eq!(largest_remainder(&[], 0), Vec::<usize>::new());
    }

    fn scaled_corpus() -> Corpus {
        let domains = [
            ("Criminal", 16),
            ("Land and property", 10),
            ("Constitutional", 9),
            ("Labour and Industrial", 8),
            ("Intellectual Property Rights", 7),
        ];
        let mut docs = Vec::new();
        for (name, n) in domains {
            for k in 0..n * 10 {
                docs.push(
                    Document::from_sentences(format!("{name}-{k}"), name, &["A sentence."])
                        .unwrap(),
                );
            }
        }
        Corpus::new(docs).unwrap()
    }

    #[test]
    fn sampling_matches_domain_proportions() {
        let c = scaled_corpus();
        let s = sample_by_domain(&c, 50, 3).unwrap();
        let counts = domain_counts(&s);
        assert_eq!(counts["Criminal"], 16);
        assert_eq!(counts["Land and property"], 10);
        assert_eq!(counts["Constitutional"], 9);
        assert_eq!(counts["Labour and Industrial"], 8);
        assert_eq!(counts["Intellectual Property Rights"], 7);
    }

    #[test]
    fn sampling_is_deterministic_and_total_is_identity() {
        let c = scaled_corpus();
        let a = sample_by_domain(&c, 50, 11).unwrap();
        let b = sample_by_domain(&c, 50, 11).unwrap();
        assert_eq!(a, b);
        let all = sample_by_domain(&c, c.len(), 0).unwrap();
        assert_eq!(all, c);
        assert!(matches!(sample_by_domain(&c, c.len() + 1, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn resolve_span_prefers_max_overlap_then_earlier() {
        let d = Document::from_sentences("d", "x", &["abcd", "efgh"]).unwrap();
        // sentences at (0,4) and (5,9)
        assert_eq!(d.resolve_span(&Span::new(2, 7)), Some(0));
        assert_eq!(d.resolve_span(&Span::new(3, 8)), Some(1));
        assert_eq!(d.resolve_span(&Span::new(4, 5)), None);
    }

    #[test]
    fn validation_rejects_overlapping_sentences_and_bad_gold() {
        let err = Document::from_spans("d", "x", "abcdef", &[Span::new(0, 4), Span::new(3, 6)])
            .unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
        let mut d = Document::from_sentences("d", "x", &["a", "b"]).unwrap();
        d.gold = Some(vec![Label::Fac]);
        assert!(d.validate().is_err());
    }
}
