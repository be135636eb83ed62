use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{nll_and_grad, viterbi, CrfParams, EmissionMatrix};
use crate::error::{Error, Result};
use crate::features::{FeatureSet, FeatureVector, FeatureVocabulary, Lexicons};
use crate::optim::{Adam, AdamConfig};

/// Linear map from sparse sentence features to per-label emission scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEmitter {
    pub num_features: usize,
    pub num_labels: usize,
    /// Row-major `num_features x num_labels`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearEmitter {
    pub fn zeros(num_features: usize, num_labels: usize) -> Self {
        LinearEmitter {
            num_features,
            num_labels,
            weights: vec![0.0; num_features * num_labels],
            bias: vec![0.0; num_labels],
        }
    }

    pub fn emissions(&self, sentences: &[FeatureVector]) -> EmissionMatrix {
        let k = self.num_labels;
        let mut em = EmissionMatrix::zeros(sentences.len(), k);
        for (t, fv) in sentences.iter().enumerate() {
            let row = em.row_mut(t);
            row.copy_from_slice(&self.bias);
            for &(f, v) in &fv.entries {
                if f >= self.num_features {
                    continue;
                }
                let w = &self.weights[f * k..(f + 1) * k];
                for (r, wk) in row.iter_mut().zip(w) {
                    *r += v * wk;
                }
            }
        }
        em
    }

    /// Accumulates the weight and bias gradients implied by `d_em`.
    fn backprop(&self, sentences: &[FeatureVector], d_em: &EmissionMatrix, d_w: &mut [f64], d_b: &mut [f64]) {
        let k = self.num_labels;
        for (t, fv) in sentences.iter().enumerate() {
            let g = d_em.row(t);
            for (b, gk) in d_b.iter_mut().zip(g) {
                *b += gk;
            }
            for &(f, v) in &fv.entries {
                if f >= self.num_features {
                    continue;
                }
                for (w, gk) in d_w[f * k..(f + 1) * k].iter_mut().zip(g) {
                    *w += v * gk;
                }
            }
        }
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// A featurized training document: one feature vector and one gold label
/// index per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDoc {
    pub features: Vec<FeatureVector>,
    pub gold: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrfTrainConfig {
    pub epochs: usize,
    pub lr: f64,
    /// L2 strength on emission weights and transitions.
    pub l2: f64,
    pub seed: u64,
}

impl Default for CrfTrainConfig {
    fn default() -> Self {
        CrfTrainConfig {
            epochs: 50,
            lr: 0.01,
            l2: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedCrf {
    pub emitter: LinearEmitter,
    pub params: CrfParams,
    /// Mean per-document NLL before training followed by the value after
    /// each epoch.
    pub loss_log: Vec<f64>,
}

impl TrainedCrf {
    pub fn predict(&self, sentences: &[FeatureVector]) -> Result<Vec<usize>> {
        Ok(viterbi(&self.emitter.emissions(sentences), &self.params)?.0)
    }
}

fn mean_nll(docs: &[TrainingDoc], emitter: &LinearEmitter, params: &CrfParams) -> Result<f64> {
    let mut total = 0.0;
    for d in docs {
        total += nll_and_grad(&emitter.emissions(&d.features), params, &d.gold)?.0;
    }
    Ok(total / docs.len() as f64)
}

/// Trains emitter and CRF parameters with Adam, one document per step in a
/// seeded shuffled order. The L2 penalty `l2 * |theta|^2` on weights and
/// transitions is applied as an exact proximal shrink after each step, which
/// stays stable for very large `l2`.
pub fn train_crf(
    docs: &[TrainingDoc],
    num_features: usize,
    num_labels: usize,
    cfg: &CrfTrainConfig,
) -> Result<TrainedCrf> {
    if docs.is_empty() {
        return Err(Error::Argument("empty training set".into()));
    }
    if let Some(d) = docs.iter().find(|d| d.gold.len() != d.features.len() || d.gold.is_empty()) {
        return Err(Error::Argument(format!(
            "training document has {} labels for {} sentences",
            d.gold.len(),
            d.features.len()
        )));
    }
    let mut emitter = LinearEmitter::zeros(num_features, num_labels);
    let mut params = CrfParams::zeros(num_labels);
    let sizes = [
        emitter.weights.len(),
        emitter.bias.len(),
        params.transitions.len(),
        num_labels,
        num_labels,
    ];
    let mut opt = Adam::new(AdamConfig::with_lr(cfg.lr), &sizes);
    let shrink = 1.0 / (1.0 + 2.0 * cfg.lr * cfg.l2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut loss_log = vec![mean_nll(docs, &emitter, &params)?];

    let mut d_w = vec![0.0; emitter.weights.len()];
    let mut d_b = vec![0.0; num_labels];
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let doc = &docs[i];
            let em = emitter.emissions(&doc.features);
            let (nll, g) = nll_and_grad(&em, &params, &doc.gold)?;
            if !nll.is_finite() {
                return Err(Error::Divergence { epoch, loss: nll });
            }
            d_w.iter_mut().for_each(|x| *x = 0.0);
            d_b.iter_mut().for_each(|x| *x = 0.0);
            emitter.backprop(&doc.features, &g.emissions, &mut d_w, &mut d_b);
            opt.step(
                &mut [
                    &mut emitter.weights,
                    &mut emitter.bias,
                    &mut params.transitions,
                    &mut params.start,
                    &mut params.stop,
                ],
                &[&d_w, &d_b, &g.params.transitions, &g.params.start, &g.params.stop],
            );
            for w in emitter.weights.iter_mut().chain(params.transitions.iter_mut()) {
                *w *= shrink;
            }
        }
        let loss = mean_nll(docs, &emitter, &params)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        loss_log.push(loss);
    }
    Ok(TrainedCrf {
        emitter,
        params,
        loss_log,
    })
}

const CRF_MODEL_VERSION: u32 = 1;

/// Serialized CRF baseline: everything needed to featurize and decode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrfModel {
    pub version: u32,
    pub feature_set: FeatureSet,
    pub vocabulary_hash: String,
    pub vocabulary: String,
    pub lexicons: Lexicons,
    pub emitter: LinearEmitter,
    pub params: CrfParams,
}

impl CrfModel {
    pub fn new(
        feature_set: FeatureSet,
        vocab: &FeatureVocabulary,
        lexicons: Lexicons,
        trained: &TrainedCrf,
    ) -> Self {
        CrfModel {
            version: CRF_MODEL_VERSION,
            feature_set,
            vocabulary_hash: vocab.hash(),
            vocabulary: vocab.to_json(),
            lexicons,
            emitter: trained.emitter.clone(),
            params: trained.params.clone(),
        }
    }

    pub fn vocabulary(&self) -> Result<FeatureVocabulary> {
        let v = FeatureVocabulary::from_json(&self.vocabulary)?;
        if v.hash() != self.vocabulary_hash {
            return Err(Error::Model("embedded vocabulary does not match its hash".into()));
        }
        if v.len() != self.emitter.num_features {
            return Err(Error::Model("vocabulary size does not match emitter".into()));
        }
        Ok(v)
    }

    /// Refuses a vocabulary other than the one the model was trained with.
    pub fn check_vocabulary(&self, vocab: &FeatureVocabulary) -> Result<()> {
        if vocab.hash() != self.vocabulary_hash {
            return Err(Error::Model(format!(
                "vocabulary hash {} does not match model ({})",
                vocab.hash(),
                self.vocabulary_hash
            )));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: CrfModel = serde_json::from_str(s).map_err(|e| Error::Model(e.to_string()))?;
        if m.version != CRF_MODEL_VERSION {
            return Err(Error::Model(format!("unsupported CRF model version {}", m.version)));
        }
        m.vocabulary()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
