use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::embeddings::SentenceEmbeddingStore;
use super::tape::{Tape, Var};
use crate::corpus::{Corpus, Document};
use crate::crf::{self, CrfParams, EmissionMatrix};
use crate::error::{Error, Result};
use crate::label::{Label, K};
use crate::optim::{clip_global_norm, Adam, AdamConfig};
use crate::text::tokenize;

/// Where sentence vectors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMode {
    /// Token BiLSTM over randomly initialized word embeddings.
    RandomInit,
    /// Fixed vectors from a [`SentenceEmbeddingStore`].
    #[default]
    Pretrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    Softmax,
    #[default]
    Crf,
}

/// Layer sizes. `d_sent` is `2 * h_tok` in random-init mode and the store
/// dimension in pretrained mode; `f = 2 * h_doc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub d_w: usize,
    pub h_tok: usize,
    pub d_sent: usize,
    pub h_doc: usize,
    pub f: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralConfig {
    pub head: HeadKind,
    pub mode: EmbeddingMode,
    pub d_w: usize,
    pub h_tok: usize,
    pub h_doc: usize,
    pub lr: f64,
    pub epochs: usize,
    pub clip: f64,
    /// Tokens seen fewer times in training map to the unknown row.
    pub min_freq: usize,
    pub seed: u64,
}

impl Default for NeuralConfig {
    fn default() -> Self {
        NeuralConfig {
            head: HeadKind::Crf,
            mode: EmbeddingMode::Pretrained,
            d_w: 50,
            h_tok: 64,
            h_doc: 64,
            lr: 1e-3,
            epochs: 30,
            clip: 5.0,
            min_freq: 2,
            seed: 0,
        }
    }
}

pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub vocab: BTreeMap<String, usize>,
    pub dim: usize,
    /// Row-major `V x dim`.
    pub vectors: Vec<f64>,
    pub unk_index: usize,
    pub trainable: bool,
}

impl EmbeddingTable {
    /// Table over the lowercased tokens of `corpus` occurring at least
    /// `min_freq` times, rows in sorted token order after the unknown row.
    pub fn build(corpus: &Corpus, dim: usize, min_freq: usize) -> Self {
        let mut freq: BTreeMap<String, usize> = BTreeMap::new();
        for d in &corpus.documents {
            for s in &d.sentences {
                for t in tokenize(&s.text) {
                    *freq.entry(t.to_lowercase()).or_insert(0) += 1;
                }
            }
        }
        let mut vocab = BTreeMap::new();
        vocab.insert(UNK.to_string(), 0);
        for (tok, n) in freq {
            if n >= min_freq && tok != UNK {
                let i = vocab.len();
                vocab.insert(tok, i);
            }
        }
        EmbeddingTable {
            vectors: vec![0.0; vocab.len() * dim],
            vocab,
            dim,
            unk_index: 0,
            trainable: true,
        }
    }

    pub fn rows(&self) -> usize {
        self.vocab.len()
    }

    /// Row indices for a sentence; an empty sentence becomes a single unknown.
    pub fn lookup<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        if tokens.is_empty() {
            return vec![self.unk_index];
        }
        tokens
            .iter()
            .map(|t| {
                *self
                    .vocab
                    .get(&t.as_ref().to_lowercase())
                    .unwrap_or(&self.unk_index)
            })
            .collect()
    }
}

/// One LSTM direction: gates `[i, f, g, o]` stacked in `w` over `[x; h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lstm {
    pub input: usize,
    pub hidden: usize,
    /// Row-major `4h x (input + h)`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Lstm {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Lstm {
            input,
            hidden,
            w: vec![0.0; 4 * hidden * (input + hidden)],
            b: vec![0.0; 4 * hidden],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiRecurrentLayer {
    pub forward: Lstm,
    pub backward: Lstm,
}

impl BiRecurrentLayer {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        BiRecurrentLayer {
            forward: Lstm::zeros(input, hidden),
            backward: Lstm::zeros(input, hidden),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input
    }

    pub fn output_dim(&self) -> usize {
        2 * self.forward.hidden
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenEncoder {
    pub table: EmbeddingTable,
    pub layer: BiRecurrentLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Head {
    Softmax {
        /// `K x f`.
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
    Crf {
        /// `K x f` projection to emission scores.
        projection: Vec<f64>,
        crf: CrfParams,
    },
}

impl Head {
    pub fn kind(&self) -> HeadKind {
        match self {
            Head::Softmax { .. } => HeadKind::Softmax,
            Head::Crf { .. } => HeadKind::Crf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierModelParams {
    pub mode: EmbeddingMode,
    pub dims: Dims,
    pub token_encoder: Option<TokenEncoder>,
    pub doc_encoder: BiRecurrentLayer,
    pub head: Head,
}

struct BoundLstm {
    w: Var,
    b: Var,
    input: usize,
    hidden: usize,
}

struct BoundBi {
    forward: BoundLstm,
    backward: BoundLstm,
}

enum BoundHead {
    Softmax { weights: Var, bias: Var },
    Crf { projection: Var, transitions: Var, start: Var, stop: Var },
}

struct Bound {
    table: Option<Var>,
    token_layer: Option<BoundBi>,
    doc_layer: BoundBi,
    head: BoundHead,
    /// Every parameter leaf in [`HierModelParams::buffers_mut`] order.
    params: Vec<Var>,
}

fn bind_lstm(t: &mut Tape, l: &Lstm, params: &mut Vec<Var>) -> BoundLstm {
    let w = t.leaf(l.w.clone());
    let b = t.leaf(l.b.clone());
    params.extend([w, b]);
    BoundLstm {
        w,
        b,
        input: l.input,
        hidden: l.hidden,
    }
}

fn bind_bi(t: &mut Tape, l: &BiRecurrentLayer, params: &mut Vec<Var>) -> BoundBi {
    BoundBi {
        forward: bind_lstm(t, &l.forward, params),
        backward: bind_lstm(t, &l.backward, params),
    }
}

/// Runs one LSTM direction over `inputs` in the given order and returns the
/// hidden state after each step.
fn run_lstm(t: &mut Tape, l: &BoundLstm, inputs: impl Iterator<Item = Var>) -> Vec<Var> {
    let hd = l.hidden;
    let mut h = t.leaf(vec![0.0; hd]);
    let mut c = t.leaf(vec![0.0; hd]);
    let mut out = Vec::new();
    for x in inputs {
        let xh = t.concat(&[x, h]);
        let z = t.matvec(l.w, xh, 4 * hd, l.input + hd);
        let z = t.add(z, l.b);
        let zi = t.slice(z, 0, hd);
        let zf = t.slice(z, hd, hd);
        let zg = t.slice(z, 2 * hd, hd);
        let zo = t.slice(z, 3 * hd, hd);
        let i = t.sigmoid(zi);
        let f = t.sigmoid(zf);
        let g = t.tanh(zg);
        let o = t.sigmoid(zo);
        let fc = t.mul(f, c);
        let ig = t.mul(i, g);
        c = t.add(fc, ig);
        let tc = t.tanh(c);
        h = t.mul(o, tc);
        out.push(h);
    }
    out
}

/// Concatenated final states of both directions.
fn encode_tokens(t: &mut Tape, layer: &BoundBi, inputs: &[Var]) -> Var {
    let f = run_lstm(t, &layer.forward, inputs.iter().copied());
    let b = run_lstm(t, &layer.backward, inputs.iter().rev().copied());
    t.concat(&[*f.last().unwrap(), *b.last().unwrap()])
}

/// Per-position concatenation of forward and backward states.
fn encode_sequence(t: &mut Tape, layer: &BoundBi, inputs: &[Var]) -> Vec<Var> {
    let f = run_lstm(t, &layer.forward, inputs.iter().copied());
    let mut b = run_lstm(t, &layer.backward, inputs.iter().rev().copied());
    b.reverse();
    f.into_iter()
        .zip(b)
        .map(|(hf, hb)| t.concat(&[hf, hb]))
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, buf: &mut [f64], scale: f64) {
    for x in buf {
        *x = rng.gen_range(-scale..scale);
    }
}

fn init_lstm(rng: &mut ChaCha8Rng, l: &mut Lstm) {
    uniform(rng, &mut l.w, 0.1);
    l.b.iter_mut().for_each(|b| *b = 0.0);
    l.b[l.hidden..2 * l.hidden].iter_mut().for_each(|b| *b = 1.0);
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

struct Graph {
    tape: Tape,
    bound: Bound,
    /// Logits (softmax head) or emissions (CRF head), one node per sentence.
    scores: Vec<Var>,
    loss: Option<Var>,
}

impl HierModelParams {
    /// Zero-valued parameters with the given shapes. `d_sent` is only read in
    /// pretrained mode.
    pub fn zeros(
        mode: EmbeddingMode,
        head: HeadKind,
        table: Option<EmbeddingTable>,
        h_tok: usize,
        d_sent: usize,
        h_doc: usize,
    ) -> Result<Self> {
        let (token_encoder, d_w, d_sent) = match mode {
            EmbeddingMode::RandomInit => {
                let table = table.ok_or_else(|| {
                    Error::Argument("random-init mode needs an embedding table".into())
                })?;
                let d_w = table.dim;
                let layer = BiRecurrentLayer::zeros(d_w, h_tok);
                (Some(TokenEncoder { table, layer }), d_w, 2 * h_tok)
            }
            EmbeddingMode::Pretrained => (None, 0, d_sent),
        };
        let f = 2 * h_doc;
        let head = match head {
            HeadKind::Softmax => Head::Softmax {
                weights: vec![0.0; K * f],
                bias: vec![0.0; K],
            },
            HeadKind::Crf => Head::Crf {
                projection: vec![0.0; K * f],
                crf: CrfParams::zeros(K),
            },
        };
        Ok(HierModelParams {
            mode,
            dims: Dims {
                d_w,
                h_tok: if mode == EmbeddingMode::RandomInit { h_tok } else { 0 },
                d_sent,
                h_doc,
                f,
            },
            token_encoder,
            doc_encoder: BiRecurrentLayer::zeros(d_sent, h_doc),
            head,
        })
    }

    /// Uniform(-0.1, 0.1) matrices, zero biases, forget-gate bias 1.
    pub fn initialize(&mut self, rng: &mut ChaCha8Rng) {
        if let Some(enc) = &mut self.token_encoder {
            uniform(rng, &mut enc.table.vectors, 0.1);
            init_lstm(rng, &mut enc.layer.forward);
            init_lstm(rng, &mut enc.layer.backward);
        }
        init_lstm(rng, &mut self.doc_encoder.forward);
        init_lstm(rng, &mut self.doc_encoder.backward);
        match &mut self.head {
            Head::Softmax { weights, bias } => {
                uniform(rng, weights, 0.1);
                bias.iter_mut().for_each(|b| *b = 0.0);
            }
            Head::Crf { projection, crf } => {
                uniform(rng, projection, 0.1);
                uniform(rng, &mut crf.transitions, 0.1);
                crf.start.iter_mut().for_each(|b| *b = 0.0);
                crf.stop.iter_mut().for_each(|b| *b = 0.0);
            }
        }
    }

    /// Every parameter buffer, in the order the tape binds them.
    pub fn buffers_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out: Vec<&mut Vec<f64>> = Vec::new();
        if let Some(enc) = &mut self.token_encoder {
            out.push(&mut enc.table.vectors);
            for l in [&mut enc.layer.forward, &mut enc.layer.backward] {
                out.push(&mut l.w);
                out.push(&mut l.b);
            }
        }
        for l in [&mut self.doc_encoder.forward, &mut self.doc_encoder.backward] {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        match &mut self.head {
            Head::Softmax { weights, bias } => out.extend([weights, bias]),
            Head::Crf { projection, crf } => {
                out.extend([projection, &mut crf.transitions, &mut crf.start, &mut crf.stop])
            }
        }
        out
    }

    pub fn param_sizes(&self) -> Vec<usize> {
        self.clone().buffers_mut().iter().map(|b| b.len()).collect()
    }

    pub fn num_params(&self) -> usize {
        self.param_sizes().iter().sum()
    }

    fn bind(&self, t: &mut Tape) -> Bound {
        let mut params = Vec::new();
        let (table, token_layer) = match &self.token_encoder {
            Some(enc) => {
                let table = t.leaf(enc.table.vectors.clone());
                params.push(table);
                (Some(table), Some(bind_bi(t, &enc.layer, &mut params)))
            }
            None => (None, None),
        };
        let doc_layer = bind_bi(t, &self.doc_encoder, &mut params);
        let head = match &self.head {
            Head::Softmax { weights, bias } => {
                let weights = t.leaf(weights.clone());
                let bias = t.leaf(bias.clone());
                params.extend([weights, bias]);
                BoundHead::Softmax { weights, bias }
            }
            Head::Crf { projection, crf } => {
                let projection = t.leaf(projection.clone());
                let transitions = t.leaf(crf.transitions.clone());
                let start = t.leaf(crf.start.clone());
                let stop = t.leaf(crf.stop.clone());
                params.extend([projection, transitions, start, stop]);
                BoundHead::Crf {
                    projection,
                    transitions,
                    start,
                    stop,
                }
            }
        };
        Bound {
            table,
            token_layer,
            doc_layer,
            head,
            params,
        }
    }

    fn sentence_inputs(
        &self,
        t: &mut Tape,
        bound: &Bound,
        doc: &Document,
        store: Option<&SentenceEmbeddingStore>,
    ) -> Result<Vec<Var>> {
        match (&self.token_encoder, bound.table, &bound.token_layer) {
            (Some(enc), Some(table), Some(layer)) => {
                let d_w = enc.table.dim;
                Ok(doc
                    .sentences
                    .iter()
                    .map(|s| {
                        let ids = enc.table.lookup(&tokenize(&s.text));
                        let rows: Vec<Var> = ids.iter().map(|&r| t.slice(table, r * d_w, d_w)).collect();
                        encode_tokens(t, layer, &rows)
                    })
                    .collect())
            }
            _ => {
                let store = store.ok_or_else(|| {
                    Error::Argument("pretrained mode needs a sentence embedding store".into())
                })?;
                if store.dim() != self.dims.d_sent {
                    return Err(Error::Argument(format!(
                        "store dimension {} does not match model input {}",
                        store.dim(),
                        self.dims.d_sent
                    )));
                }
                doc.sentences
                    .iter()
                    .map(|s| {
                        let v = store.get(&doc.doc_id, s.index).ok_or_else(|| Error::Coverage {
                            doc_id: doc.doc_id.clone(),
                            index: s.index,
                        })?;
                        Ok(t.leaf(v.to_vec()))
                    })
                    .collect()
            }
        }
    }

    fn graph(
        &self,
        doc: &Document,
        store: Option<&SentenceEmbeddingStore>,
        gold: Option<&[usize]>,
    ) -> Result<Graph> {
        if doc.sentences.is_empty() {
            return Err(Error::Argument(format!("document `{}` has no sentences", doc.doc_id)));
        }
        if let Some(g) = gold {
            if g.len() != doc.sentences.len() {
                return Err(Error::Argument(format!(
                    "{} gold labels for {} sentences",
                    g.len(),
                    doc.sentences.len()
                )));
            }
        }
        let mut t = Tape::new();
        let bound = self.bind(&mut t);
        let inputs = self.sentence_inputs(&mut t, &bound, doc, store)?;
        let feats = encode_sequence(&mut t, &bound.doc_layer, &inputs);
        let f = self.dims.f;
        let (scores, loss) = match &bound.head {
            BoundHead::Softmax { weights, bias } => {
                let logits: Vec<Var> = feats
                    .iter()
                    .map(|&h| {
                        let z = t.matvec(*weights, h, K, f);
                        t.add(z, *bias)
                    })
                    .collect();
                let loss = match gold {
                    Some(g) => {
                        let terms: Vec<Var> = logits
                            .iter()
                            .zip(g)
                            .map(|(&z, &y)| t.softmax_xent(z, y))
                            .collect();
                        let total = t.sum(&terms);
                        Some(t.scale(total, 1.0 / terms.len() as f64))
                    }
                    None => None,
                };
                (logits, loss)
            }
            BoundHead::Crf {
                projection,
                transitions,
                start,
                stop,
            } => {
                let em: Vec<Var> = feats.iter().map(|&h| t.matvec(*projection, h, K, f)).collect();
                let loss = match gold {
                    Some(g) => {
                        let all = t.concat(&em);
                        Some(t.crf_nll(all, *transitions, *start, *stop, K, g)?)
                    }
                    None => None,
                };
                (em, loss)
            }
        };
        Ok(Graph {
            tape: t,
            bound,
            scores,
            loss,
        })
    }

    fn decode(&self, g: &Graph) -> Result<Vec<Label>> {
        let idx = match &self.head {
            Head::Softmax { .. } => g.scores.iter().map(|&z| argmax(g.tape.value(z))).collect(),
            Head::Crf { crf, .. } => {
                let rows: Vec<Vec<f64>> = g.scores.iter().map(|&z| g.tape.value(z).to_vec()).collect();
                crf::viterbi(&EmissionMatrix::from_rows(&rows)?, crf)?.0
            }
        };
        Ok(idx.into_iter().map(|i| Label::from_index(i).unwrap()).collect())
    }

    /// Emission scores (CRF head) or logits (softmax head), `T x K`.
    pub fn scores(&self, doc: &Document, store: Option<&SentenceEmbeddingStore>) -> Result<EmissionMatrix> {
        let g = self.graph(doc, store, None)?;
        let rows: Vec<Vec<f64>> = g.scores.iter().map(|&z| g.tape.value(z).to_vec()).collect();
        EmissionMatrix::from_rows(&rows)
    }

    pub fn predict(&self, doc: &Document, store: Option<&SentenceEmbeddingStore>) -> Result<Vec<Label>> {
        let g = self.graph(doc, store, None)?;
        self.decode(&g)
    }

    /// Loss on `gold` and the predicted labels. Softmax head: mean
    /// per-sentence cross-entropy and per-sentence argmax. CRF head: document
    /// NLL and Viterbi path.
    pub fn forward_loss(
        &self,
        doc: &Document,
        store: Option<&SentenceEmbeddingStore>,
        gold: &[Label],
    ) -> Result<(f64, Vec<Label>)> {
        let gold: Vec<usize> = gold.iter().map(|l| l.index()).collect();
        let g = self.graph(doc, store, Some(&gold))?;
        Ok((g.tape.scalar(g.loss.unwrap()), self.decode(&g)?))
    }

    /// Loss and its gradient for every parameter buffer, in
    /// [`buffers_mut`](Self::buffers_mut) order.
    pub fn loss_and_grad(
        &self,
        doc: &Document,
        store: Option<&SentenceEmbeddingStore>,
        gold: &[Label],
    ) -> Result<(f64, Vec<Vec<f64>>)> {
        let gold: Vec<usize> = gold.iter().map(|l| l.index()).collect();
        let g = self.graph(doc, store, Some(&gold))?;
        let loss = g.loss.unwrap();
        let mut grads = g.tape.backward(loss);
        let out = g
            .bound
            .params
            .iter()
            .map(|&v| {
                grads
                    .take(v)
                    .unwrap_or_else(|| vec![0.0; g.tape.value(v).len()])
            })
            .collect();
        Ok((g.tape.scalar(loss), out))
    }
}

/// Sentence vector: final forward state followed by final backward state.
pub fn encode_sentence<S: AsRef<str>>(tokens: &[S], enc: &TokenEncoder) -> Vec<f64> {
    let mut t = Tape::new();
    let mut params = Vec::new();
    let table = t.leaf(enc.table.vectors.clone());
    let layer = bind_bi(&mut t, &enc.layer, &mut params);
    let d_w = enc.table.dim;
    let rows: Vec<Var> = enc
        .table
        .lookup(tokens)
        .iter()
        .map(|&r| t.slice(table, r * d_w, d_w))
        .collect();
    let v = encode_tokens(&mut t, &layer, &rows);
    t.value(v).to_vec()
}

/// Contextual features, one row of `2 * hidden` per input row.
pub fn encode_document(sent_vectors: &[Vec<f64>], layer: &BiRecurrentLayer) -> Vec<Vec<f64>> {
    let mut t = Tape::new();
    let mut params = Vec::new();
    let bound = bind_bi(&mut t, layer, &mut params);
    let inputs: Vec<Var> = sent_vectors.iter().map(|v| t.leaf(v.clone())).collect();
    encode_sequence(&mut t, &bound, &inputs)
        .into_iter()
        .map(|v| t.value(v).to_vec())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedHier {
    pub params: HierModelParams,
    /// Mean training loss per epoch, measured before each update.
    pub loss_log: Vec<f64>,
}

/// Trains a hierarchical model on the gold labels of `train`, one document
/// per Adam step with global-norm clipping, documents shuffled per epoch.
pub fn train_hier(
    train: &Corpus,
    cfg: &NeuralConfig,
    store: Option<&SentenceEmbeddingStore>,
) -> Result<TrainedHier> {
    if train.is_empty() {
        return Err(Error::Argument("empty training corpus".into()));
    }
    let golds: Vec<&Vec<Label>> = train
        .documents
        .iter()
        .map(|d| {
            d.gold.as_ref().ok_or_else(|| Error::Validation {
                doc_id: d.doc_id.clone(),
                rule: "training document has no gold labels".into(),
            })
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (table, d_sent) = match cfg.mode {
        EmbeddingMode::RandomInit => (Some(EmbeddingTable::build(train, cfg.d_w, cfg.min_freq)), 0),
        EmbeddingMode::Pretrained => {
            let store = store.ok_or_else(|| {
                Error::Argument("pretrained mode needs a sentence embedding store".into())
            })?;
            (None, store.dim())
        }
    };
    let mut params = HierModelParams::zeros(cfg.mode, cfg.head, table, cfg.h_tok, d_sent, cfg.h_doc)?;
    params.initialize(&mut rng);
    let mut opt = Adam::new(AdamConfig::with_lr(cfg.lr), &params.param_sizes());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut loss_log = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let doc = &train.documents[i];
            let (loss, mut grads) = params.loss_and_grad(doc, store, golds[i])?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            total += loss;
            clip_global_norm(&mut grads, cfg.clip);
            if let Some(enc) = &params.token_encoder {
                if !enc.table.trainable {
                    grads[0].iter_mut().for_each(|g| *g = 0.0);
                }
            }
            let mut slices: Vec<&mut [f64]> =
                params.buffers_mut().into_iter().map(|b| b.as_mut_slice()).collect();
            let grefs: Vec<&[f64]> = grads.iter().map(Vec::as_slice).collect();
            opt.step(&mut slices, &grefs);
        }
        let mean = total / train.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence { epoch, loss: mean });
        }
        loss_log.push(mean);
    }
    Ok(TrainedHier { params, loss_log })
}

const HIER_MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct HierModelFile {
    version: u32,
    params: HierModelParams,
}

impl HierModelParams {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&HierModelFile {
            version: HIER_MODEL_VERSION,
            params: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: HierModelFile = serde_json::from_str(s).map_err(|e| Error::Model(e.to_string()))?;
        if f.version != HIER_MODEL_VERSION {
            return Err(Error::Model(format!("unsupported model version {}", f.version)));
        }
        Ok(f.params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
