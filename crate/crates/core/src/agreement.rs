//! Pairwise inter-annotator agreement with strict, lenient and average
//! precision/recall/F, sentence-level agreement matrices, and majority-vote
//! curation of gold labels.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LabeledSpan};
use crate::error::{Error, Result};
use crate::label::{Label, K};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub correct: u64,
    pub partial: u64,
    pub missing: u64,
    pub spurious: u64,
}

impl MatchCounts {
    pub fn new(correct: u64, partial: u64, missing: u64, spurious: u64) -> Self {
        MatchCounts {
            correct,
            partial,
            missing,
            spurious,
        }
    }

    /// The same tallies seen from the other annotator's side.
    pub fn swapped(self) -> Self {
        MatchCounts {
            missing: self.spurious,
            spurious: self.missing,
            ..self
        }
    }
}

impl Add for MatchCounts {
    type Output = MatchCounts;

    fn add(self, o: MatchCounts) -> MatchCounts {
        MatchCounts {
            correct: self.correct + o.correct,
            partial: self.partial + o.partial,
            missing: self.missing + o.missing,
            spurious: self.spurious + o.spurious,
        }
    }
}

impl AddAssign for MatchCounts {
    fn add_assign(&mut self, o: MatchCounts) {
        *self = *self + o;
    }
}

/// Match tallies broken down by label (of the span that was counted) along
/// with their total.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCounts {
    pub per_label: [MatchCounts; K],
    pub total: MatchCounts,
}

impl LabeledCounts {
    fn bump(&mut self, label: Label, f: impl Fn(&mut MatchCounts)) {
        f(&mut self.per_label[label.index()]);
        f(&mut self.total);
    }

    pub fn label(&self, l: Label) -> MatchCounts {
        self.per_label[l.index()]
    }
}

impl AddAssign<&LabeledCounts> for LabeledCounts {
    fn add_assign(&mut self, o: &LabeledCounts) {
        for (a, b) in self.per_label.iter_mut().zip(&o.per_label) {
            *a += *b;
        }
        self.total += o.total;
    }
}

/// Strict / lenient / average variants of one measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Variants {
    pub strict: f64,
    pub lenient: f64,
    pub average: f64,
}

impl Variants {
    fn map2(self, o: Variants, f: impl Fn(f64, f64) -> f64) -> Variants {
        Variants {
            strict: f(self.strict, o.strict),
            lenient: f(self.lenient, o.lenient),
            average: f(self.average, o.average),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.strict, self.lenient, self.average]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IaaScores {
    pub precision: Variants,
    pub recall: Variants,
    pub fscore: Variants,
    pub beta: f64,
    /// Set when some ratio was 0/0 and reported as 0 ("undefined→0").
    pub undefined: bool,
}

fn ratio(num: f64, den: f64, undefined: &mut bool) -> f64 {
    if den == 0.0 {
        *undefined = true;
        0.0
    } else {
        num / den
    }
}

fn f_beta(p: f64, r: f64, beta: f64, undefined: &mut bool) -> f64 {
    let b2 = beta * beta;
    ratio((b2 + 1.0) * p * r, b2 * p + r, undefined)
}

/// Precision, recall and F in the three variants. Partial matches count as
/// wrong (strict), right (lenient) or half right (average); denominators are
/// shared. Any 0/0 is reported as 0.
pub fn iaa_scores(mc: MatchCounts, beta: f64) -> IaaScores {
    let c = mc.correct as f64;
    let pt = mc.partial as f64;
    let p_den = c + mc.spurious as f64 + pt;
    let r_den = c + mc.missing as f64 + pt;
    let mut undefined = false;
    let mut variant = |num: f64| {
        let p = ratio(num, p_den, &mut undefined);
        let r = ratio(num, r_den, &mut undefined);
        let f = f_beta(p, r, beta, &mut undefined);
        (p, r, f)
    };
    let (ps, rs, fs) = variant(c);
    let (pl, rl, fl) = variant(c + pt);
    let (pa, ra, fa) = variant(c + 0.5 * pt);
    IaaScores {
        precision: Variants {
            strict: ps,
            lenient: pl,
            average: pa,
        },
        recall: Variants {
            strict: rs,
            lenient: rl,
            average: ra,
        },
        fscore: Variants {
            strict: fs,
            lenient: fl,
            average: fa,
        },
        beta,
        undefined,
    }
}

/// Arithmetic mean of several score blocks.
pub fn mean_scores(scores: &[IaaScores]) -> IaaScores {
    if scores.is_empty() {
        return IaaScores {
            beta: 1.0,
            undefined: true,
            ..Default::default()
        };
    }
    let n = scores.len() as f64;
    let mut acc = IaaScores {
        beta: scores[0].beta,
        ..Default::default()
    };
    for s in scores {
        acc.precision = acc.precision.map2(s.precision, |a, b| a + b);
        acc.recall = acc.recall.map2(s.recall, |a, b| a + b);
        acc.fscore = acc.fscore.map2(s.fscore, |a, b| a + b);
        acc.undefined |= s.undefined;
    }
    let div = |v: Variants| v.map2(v, |a, _| a / n);
    acc.precision = div(acc.precision);
    acc.recall = div(acc.recall);
    acc.fscore = div(acc.fscore);
    acc
}

/// One-to-one greedy matching of two annotators' spans. Spans of `a` are
/// visited left to right; each takes the first unmatched span of `b` with the
/// same label that shares at least one character. Identical extents are
/// Correct, other overlaps Partial. Leftovers of `a` are Missing and of `b`
/// Spurious.
pub fn match_counts(a: &[LabeledSpan], b: &[LabeledSpan]) -> LabeledCounts {
    let mut a_sorted: Vec<&LabeledSpan> = a.iter().collect();
    a_sorted.sort_by_key(|s| s.span);
    let mut b_sorted: Vec<&LabeledSpan> = b.iter().collect();
    b_sorted.sort_by_key(|s| s.span);
    let mut used = vec![false; b_sorted.len()];
    let mut out = LabeledCounts::default();
    for sa in a_sorted {
        let hit = b_sorted
            .iter()
            .enumerate()
            .find(|(j, sb)| !used[*j] && sb.label == sa.label && sb.span.overlap(&sa.span) > 0);
        match hit {
            Some((j, sb)) => {
                used[j] = true;
                if sb.span == sa.span {
                    out.bump(sa.label, |m| m.correct += 1);
                } else {
                    out.bump(sa.label, |m| m.partial += 1);
                }
            }
            None => out.bump(sa.label, |m| m.missing += 1),
        }
    }
    for (sb, u) in b_sorted.iter().zip(&used) {
        if !u {
            out.bump(sb.label, |m| m.spurious += 1);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub annotators: (String, String),
    pub counts: LabeledCounts,
    pub per_label: BTreeMap<Label, IaaScores>,
    pub overall: IaaScores,
    pub documents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBlock {
    pub per_label: BTreeMap<Label, IaaScores>,
    pub overall: IaaScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDocument {
    pub doc_id: String,
    pub pair: (String, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IaaReport {
    pub per_pair: Vec<PairReport>,
    /// Scores averaged over pairs.
    pub per_label: BTreeMap<Label, IaaScores>,
    pub per_domain: BTreeMap<String, ScoreBlock>,
    pub overall: IaaScores,
    pub skipped: Vec<SkippedDocument>,
}

impl IaaReport {
    /// F-scores as a variant × label grid (rows: strict, lenient, average).
    pub fn f_grid(&self) -> [[f64; K]; 3] {
        let mut grid = [[0.0; K]; 3];
        for l in Label::ALL {
            let f = self.per_label[&l].fscore.as_array();
            for (v, row) in grid.iter_mut().enumerate() {
                row[l.index()] = f[v];
            }
        }
        grid
    }
}

fn block_from_counts(c: &LabeledCounts, beta: f64) -> (BTreeMap<Label, IaaScores>, IaaScores) {
    let per_label = Label::ALL
        .iter()
        .map(|&l| (l, iaa_scores(c.label(l), beta)))
        .collect();
    (per_label, iaa_scores(c.total, beta))
}

fn mean_block(blocks: &[(BTreeMap<Label, IaaScores>, IaaScores)]) -> ScoreBlock {
    let per_label = Label::ALL
        .iter()
        .map(|&l| {
            let v: Vec<IaaScores> = blocks.iter().map(|b| b.0[&l]).collect();
            (l, mean_scores(&v))
        })
        .collect();
    let overall: Vec<IaaScores> = blocks.iter().map(|b| b.1).collect();
    ScoreBlock {
        per_label,
        overall: mean_scores(&overall),
    }
}

/// Agreement for every unordered pair of `annotators` (in list order),
/// aggregated over documents, then averaged across pairs. Documents lacking
/// either annotator of a pair are skipped for that pair and listed.
pub fn pairwise_average_iaa(corpus: &Corpus, annotators: &[String], beta: f64) -> Result<IaaReport> {
    if annotators.len() < 2 {
        return Err(Error::Argument("need at least two annotators".into()));
    }
    let mut pairs = Vec::new();
    for i in 0..annotators.len() {
        for j in i + 1..annotators.len() {
            pairs.push((annotators[i].clone(), annotators[j].clone()));
        }
    }
    let mut per_pair = Vec::new();
    let mut skipped = Vec::new();
    let mut domain_counts: BTreeMap<String, Vec<LabeledCounts>> = BTreeMap::new();
    for (pi, (x, y)) in pairs.iter().enumerate() {
        let mut counts = LabeledCounts::default();
        let mut documents = 0;
        for d in &corpus.documents {
            let (Some(a), Some(b)) = (d.annotations.get(x), d.annotations.get(y)) else {
                skipped.push(SkippedDocument {
                    doc_id: d.doc_id.clone(),
                    pair: (x.clone(), y.clone()),
                });
                continue;
            };
            let c = match_counts(a, b);
            counts += &c;
            documents += 1;
            let slots = domain_counts
                .entry(d.domain.clone())
                .or_insert_with(|| vec![LabeledCounts::default(); pairs.len()]);
            slots[pi] += &c;
        }
        let (per_label, overall) = block_from_counts(&counts, beta);
        per_pair.push(PairReport {
            annotators: (x.clone(), y.clone()),
            counts,
            per_label,
            overall,
            documents,
        });
    }
    let blocks: Vec<_> = per_pair
        .iter()
        .map(|p| (p.per_label.clone(), p.overall))
        .collect();
    let avg = mean_block(&blocks);
    let per_domain = domain_counts
        .into_iter()
        .map(|(dom, slots)| {
            let blocks: Vec<_> = slots.iter().map(|c| block_from_counts(c, beta)).collect();
            (dom, mean_block(&blocks))
        })
        .collect();
    Ok(IaaReport {
        per_pair,
        per_label: avg.per_label,
        per_domain,
        overall: avg.overall,
        skipped,
    })
}

/// Square label-by-label tally; rows belong to the first party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementMatrix {
    pub labels: Vec<Label>,
    pub counts: Vec<Vec<u64>>,
}

impl Default for AgreementMatrix {
    fn default() -> Self {
        AgreementMatrix {
            labels: Label::ALL.to_vec(),
            counts: vec![vec![0; K]; K],
        }
    }
}

impl AgreementMatrix {
    pub fn add(&mut self, row: Label, col: Label) {
        self.counts[row.index()][col.index()] += 1;
    }

    pub fn get(&self, row: Label, col: Label) -> u64 {
        self.counts[row.index()][col.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..K).map(|i| self.counts[i][i]).sum()
    }

    pub fn transpose(&self) -> AgreementMatrix {
        let mut t = AgreementMatrix::default();
        for i in 0..K {
            for j in 0..K {
                t.counts[j][i] = self.counts[i][j];
            }
        }
        t
    }

    pub fn merge(&mut self, other: &AgreementMatrix) {
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    /// CSV with a header row of labels; each row starts with its label.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label");
        for l in &self.labels {
            write!(s, ",{l}").unwrap();
        }
        s.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            s.push_str(l.as_str());
            for v in row {
                write!(s, ",{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// Sentence-level agreement between annotators `x` (rows) and `y`
/// (columns). Spans are resolved to the sentence they overlap most; only
/// sentences both annotators labeled are counted.
pub fn agreement_matrix(corpus: &Corpus, x: &str, y: &str) -> Result<AgreementMatrix> {
    let known = corpus.annotators();
    for a in [x, y] {
        if !known.iter().any(|k| k == a) {
            return Err(Error::Argument(format!("unknown annotator `{a}`")));
        }
    }
    let mut m = AgreementMatrix::default();
    for d in &corpus.documents {
        let (Some(lx), Some(ly)) = (d.sentence_labels(x), d.sentence_labels(y)) else {
            continue;
        };
        for (a, b) in lx.into_iter().zip(ly) {
            if let (Some(a), Some(b)) = (a, b) {
                m.add(a, b);
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    Error,
    AnnotatorPriority(Vec<String>),
}

/// Fills `gold` on every document with the plurality label of each sentence
/// across annotators. A sentence whose top count is shared is a tie: an
/// error under [`TiePolicy::Error`], otherwise resolved to the label of the
/// first listed annotator who voted for one of the tied labels.
pub fn majority_vote_gold(corpus: &Corpus, tie_policy: &TiePolicy) -> Result<Corpus> {
    let mut unlabeled = Vec::new();
    let mut ties = Vec::new();
    let mut out = corpus.clone();
    for d in &mut out.documents {
        let layers: Vec<(&String, Vec<Option<Label>>)> = d
            .annotations
            .keys()
            .map(|a| (a, d.sentence_labels(a).expect("annotator present")))
            .collect();
        let mut gold = Vec::with_capacity(d.sentences.len());
        for i in 0..d.sentences.len() {
            let mut votes = [0usize; K];
            for (_, labels) in &layers {
                if let Some(l) = labels[i] {
                    votes[l.index()] += 1;
                }
            }
            let top = *votes.iter().max().unwrap();
            if top == 0 {
                unlabeled.push((d.doc_id.clone(), i));
                gold.push(Label::Fac);
                continue;
            }
            let tied: Vec<Label> = Label::ALL
                .iter()
                .copied()
                .filter(|l| votes[l.index()] == top)
                .collect();
            if tied.len() == 1 {
                gold.push(tied[0]);
                continue;
            }
            let resolved = match tie_policy {
                TiePolicy::Error => None,
                TiePolicy::AnnotatorPriority(order) => order.iter().find_map(|name| {
                    layers
                        .iter()
                        .find(|(a, _)| *a == name)
                        .and_then(|(_, labels)| labels[i])
                        .filter(|l| tied.contains(l))
                }),
            };
            match resolved {
                Some(l) => gold.push(l),
                None => {
                    ties.push((d.doc_id.clone(), i));
                    gold.push(Label::Fac);
                }
            }
        }
        d.gold = Some(gold);
    }
    if !unlabeled.is_empty() {
        return Err(Error::Unlabeled(unlabeled));
    }
    if !ties.is_empty() {
        return Err(Error::Tie(ties));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use proptest::prelude::*;
    use Label::*;

    fn ls(s: usize, e: usize, l: Label) -> LabeledSpan {
        LabeledSpan::new(s, e, l)
    }

    #[test]
    fn identical_lists_are_all_correct() {
        let a = vec![ls(0, 10, Fac), ls(11, 20, Arg), ls(21, 30, Rpc)];
        let c = match_counts(&a, &a);
        assert_eq!(c.total, MatchCounts::new(3, 0, 0, 0));
        assert_eq!(c.label(Arg), MatchCounts::new(1, 0, 0, 0));
    }

    #[test]
    fn shorter_span_same_label_is_partial() {
        let c = match_counts(&[ls(0, 10, Fac)], &[ls(0, 9, Fac)]);
        assert_eq!(c.total, MatchCounts::new(0, 1, 0, 0));
    }

    #[test]
    fn label_mismatch_is_missing_and_spurious() {
        let c = match_counts(&[ls(0, 10, Fac)], &[ls(0, 10, Arg)]);
        assert_eq!(c.total, MatchCounts::new(0, 0, 1, 1));
        assert_eq!(c.label(Fac).missing, 1);
        assert_eq!(c.label(Arg).spurious, 1);
    }

    #[test]
    fn each_span_matches_at_most_once() {
        // a's single span overlaps two of b's; only the first is consumed
        let c = match_counts(&[ls(0, 10, Fac)], &[ls(0, 5, Fac), ls(5, 10, Fac)]);
        assert_eq!(c.total, MatchCounts::new(0, 1, 0, 1));
    }

    #[test]
    fn scores_from_formulas() {
        let s = iaa_scores(MatchCounts::new(8, 2, 0, 0), 1.0);
        assert!((s.precision.strict - 0.8).abs() < 1e-15);
        assert!((s.precision.lenient - 1.0).abs() < 1e-15);
        assert!((s.precision.average - 0.9).abs() < 1e-15);
        let s = iaa_scores(MatchCounts::new(5, 0, 0, 5), 1.0);
        for p in s.precision.as_array() {
            assert!((p - 0.5).abs() < 1e-15);
        }
        for r in s.recall.as_array() {
            assert!((r - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn all_zero_counts_score_zero() {
        let s = iaa_scores(MatchCounts::default(), 1.0);
        assert!(s.undefined);
        for v in [s.precision, s.recall, s.fscore] {
            assert_eq!(v.as_array(), [0.0; 3]);
        }
    }

    #[test]
    fn beta_weights_recall() {
        // P = 0.5, R = 1.0; F2 = 5*0.5/(4*0.5 + 1) = 2.5/3
        let s = iaa_scores(MatchCounts::new(5, 0, 0, 5), 2.0);
        assert!((s.fscore.strict - 2.5 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn variants_are_ordered(c in 0u64..50, p in 0u64..50, m in 0u64..50, s in 0u64..50) {
            let sc = iaa_scores(MatchCounts::new(c, p, m, s), 1.0);
            for v in [sc.precision, sc.recall, sc.fscore] {
                prop_assert!(v.strict <= v.average + 1e-15);
                prop_assert!(v.average <= v.lenient + 1e-15);
            }
        }

        #[test]
        fn scores_are_scale_free(c in 0u64..30, p in 0u64..30, m in 0u64..30, s in 0u64..30, k in 1u64..20) {
            let a = iaa_scores(MatchCounts::new(c, p, m, s), 1.0);
            let b = iaa_scores(MatchCounts::new(c * k, p * k, m * k, s * k), 1.0);
            for (x, y) in [(a.precision, b.precision), (a.recall, b.recall), (a.fscore, b.fscore)] {
                for (u, v) in x.as_array().iter().zip(y.as_array()) {
                    prop_assert!((u - v).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn swapping_annotators_swaps_missing_and_spurious(
            a in proptest::collection::vec((0usize..7, 1usize..6), 0..6),
            b in proptest::collection::vec((0usize..7, 1usize..6), 0..6),
        ) {
            // build non-overlapping span lists on a 10-char grid
            let build = |v: &[(usize, usize)]| -> Vec<LabeledSpan> {
                v.iter().enumerate().map(|(i, &(l, len))| {
                    ls(i * 10, i * 10 + len, Label::from_index(l).unwrap())
                }).collect()
            };
            let (a, b) = (build(&a), build(&b));
            let ab = match_counts(&a, &b);
            let ba = match_counts(&b, &a);
            prop_assert_eq!(ab.total.swapped(), ba.total);
            prop_assert_eq!(match_counts(&a, &a).total.partial, 0);
        }
    }

    fn three_annotator_doc(labels: [[Label; 3]; 3]) -> Document {
        let mut d = Document::from_sentences("d1", "Criminal", &["One.", "Two.", "Three."]).unwrap();
        for (k, name) in ["A1", "A2", "A3"].iter().enumerate() {
            let layer: Vec<Label> = labels.iter().map(|row| row[k]).collect();
            d.set_sentence_annotation(*name, &layer);
        }
        d
    }

    #[test]
    fn majority_vote_and_ties() {
        let d = three_annotator_doc([[Fac, Fac, Ratio], [Arg, Arg, Arg], [Fac, Arg, Ratio]]);
        let c = Corpus::new(vec![d]).unwrap();
        match majority_vote_gold(&c, &TiePolicy::Error) {
            Err(Error::Tie(t)) => assert_eq!(t, vec![("d1".to_string(), 2)]),
            other => panic!("expected tie, got {other:?}"),
        }
        let prio = TiePolicy::AnnotatorPriority(vec!["A1".into(), "A2".into(), "A3".into()]);
        let g = majority_vote_gold(&c, &prio).unwrap();
        assert_eq!(g.documents[0].gold, Some(vec![Fac, Arg, Fac]));
        let prio = TiePolicy::AnnotatorPriority(vec!["A3".into()]);
        let g = majority_vote_gold(&c, &prio).unwrap();
        assert_eq!(g.documents[0].gold, Some(vec![Fac, Arg, Ratio]));
    }

    #[test]
    fn unlabeled_sentence_is_a_curation_error() {
        let mut d = Document::from_sentences("d1", "x", &["One.", "Two."]).unwrap();
        d.annotations.insert("A1".into(), vec![ls(0, 4, Fac)]);
        let c = Corpus::new(vec![d]).unwrap();
        assert!(matches!(
            majority_vote_gold(&c, &TiePolicy::Error),
            Err(Error::Unlabeled(v)) if v == vec![("d1".to_string(), 1)]
        ));
    }

    #[test]
    fn matrix_counts_and_transpose() {
        let d = three_annotator_doc([[Fac, Ratio, Fac], [Arg, Arg, Arg], [Rpc, Rpc, Rpc]]);
        let c = Corpus::new(vec![d]).unwrap();
        let m = agreement_matrix(&c, "A1", "A2").unwrap();
        assert_eq!(m.get(Fac, Ratio), 1);
        assert_eq!(m.get(Arg, Arg), 1);
        assert_eq!(m.total(), 3);
        assert_eq!(agreement_matrix(&c, "A2", "A1").unwrap(), m.transpose());
        assert!(matches!(agreement_matrix(&c, "A1", "Z"), Err(Error::Argument(_))));
        let csv = m.to_csv();
        assert!(csv.starts_with("label,FAC,RLC,ARG,STA,PRE,RATIO,RPC\n"));
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn disagreeing_pair_scores_zero() {
        let mut d = Document::from_sentences("d1", "x", &["One."]).unwrap();
        d.set_sentence_annotation("A1", &[Fac]);
        d.set_sentence_annotation("A2", &[Arg]);
        let c = Corpus::new(vec![d]).unwrap();
        let r = pairwise_average_iaa(&c, &["A1".into(), "A2".into()], 1.0).unwrap();
        assert_eq!(r.overall.fscore.as_array(), [0.0; 3]);
    }

    #[test]
    fn missing_annotator_documents_are_skipped() {
        let mut d1 = Document::from_sentences("d1", "x", &["One."]).unwrap();
        d1.set_sentence_annotation("A1", &[Fac]);
        d1.set_sentence_annotation("A2", &[Fac]);
        let mut d2 = Document::from_sentences("d2", "x", &["One."]).unwrap();
        d2.set_sentence_annotation("A1", &[Fac]);
        let c = Corpus::new(vec![d1, d2]).unwrap();
        let r = pairwise_average_iaa(&c, &["A1".into(), "A2".into()], 1.0).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].doc_id, "d2");
        assert_eq!(r.per_pair[0].documents, 1);
        assert_eq!(r.overall.fscore.strict, 1.0);
    }
}
