//! One entry point for training, applying and persisting any of the three
//! model families.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ModelKind, TrainConfig};
use crate::corpus::Corpus;
use crate::crf::{self, train_crf, CrfModel, CrfTrainConfig, TrainingDoc};
use crate::error::{Error, Result};
use crate::features::{FeatureVocabulary, Featurizer, Lexicons};
use crate::label::{Label, K};
use crate::neural::{train_hier, EmbeddingMode, HierModelParams, SentenceEmbeddingStore};

/// Where a pretrained-mode model gets sentence vectors at prediction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SentenceVectors {
    /// Hashed vectors computed on the fly.
    Fallback { dim: usize },
    /// A store supplied by the caller, e.g. from an embedding file.
    External { dim: usize },
    /// Random-init mode; vectors come from the token encoder.
    Learned,
}

const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Crf(CrfModel),
    Hier {
        version: u32,
        model: ModelKind,
        sentence_vectors: SentenceVectors,
        params: HierModelParams,
    },
}

/// One line of prediction output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub loss_log: Vec<f64>,
}

fn gold_of<'a>(corpus: &'a Corpus) -> Result<Vec<&'a Vec<Label>>> {
    corpus
        .documents
        .iter()
        .map(|d| {
            d.gold.as_ref().ok_or_else(|| Error::Validation {
                doc_id: d.doc_id.clone(),
                rule: "training document has no gold labels".into(),
            })
        })
        .collect()
}

fn lexicons(cfg: &TrainConfig) -> Result<Lexicons> {
    match &cfg.lexicons {
        Some(p) => Lexicons::load(p),
        None => Ok(Lexicons::default()),
    }
}

/// Trains the model selected by `cfg` on the gold labels of `train`.
///
/// Pretrained-mode neural models use `store` when given and hashed fallback
/// vectors of dimension `cfg.embedding_dim` otherwise.
pub fn train(train: &Corpus, cfg: &TrainConfig, store: Option<&SentenceEmbeddingStore>) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Argument("empty training corpus".into()));
    }
    match cfg.neural() {
        None => {
            let golds = gold_of(train)?;
            let lex = lexicons(cfg)?;
            let set = cfg.feature_set.unwrap_or_default();
            let featurizer = Featurizer::new(&lex, set);
            let mut vocab = FeatureVocabulary::new();
            let mut docs = Vec::with_capacity(train.len());
            for (d, gold) in train.documents.iter().zip(golds) {
                docs.push(TrainingDoc {
                    features: featurizer.extract(d, &mut vocab, true)?,
                    gold: gold.iter().map(|l| l.index()).collect(),
                });
            }
            vocab.freeze();
            let crf_cfg = CrfTrainConfig {
                epochs: cfg.epochs,
                lr: cfg.lr,
                l2: cfg.l2,
                seed: cfg.seed,
            };
            let trained = train_crf(&docs, vocab.len(), K, &crf_cfg)?;
            Ok(TrainOutcome {
                model: TrainedModel::Crf(CrfModel::new(set, &vocab, lex, &trained)),
                loss_log: trained.loss_log,
            })
        }
        Some(ncfg) => {
            let fallback;
            let (store, vectors) = match ncfg.mode {
                EmbeddingMode::RandomInit => (None, SentenceVectors::Learned),
                EmbeddingMode::Pretrained => match store {
                    Some(s) => (Some(s), SentenceVectors::External { dim: s.dim() }),
                    None => {
                        fallback = SentenceEmbeddingStore::from_fallback(train, cfg.embedding_dim);
                        (Some(&fallback), SentenceVectors::Fallback { dim: cfg.embedding_dim })
                    }
                },
            };
            let trained = train_hier(train, &ncfg, store)?;
            Ok(TrainOutcome {
                model: TrainedModel::Hier {
                    version: MODEL_VERSION,
                    model: cfg.model,
                    sentence_vectors: vectors,
                    params: trained.params,
                },
                loss_log: trained.loss_log,
            })
        }
    }
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Crf(_) => ModelKind::CrfBaseline,
            TrainedModel::Hier { model, .. } => *model,
        }
    }

    /// Labels for every sentence of every document, in corpus order.
    pub fn predict(&self, corpus: &Corpus, store: Option<&SentenceEmbeddingStore>) -> Result<Vec<Prediction>> {
        let labels: Vec<Vec<Label>> = match self {
            TrainedModel::Crf(m) => {
                let mut vocab = m.vocabulary()?;
                let featurizer = Featurizer::new(&m.lexicons, m.feature_set);
                corpus
                    .documents
                    .iter()
                    .map(|d| {
                        let feats = featurizer.extract(d, &mut vocab, false)?;
                        let path = crf::viterbi(&m.emitter.emissions(&feats), &m.params)?.0;
                        Ok(path.into_iter().map(|i| Label::from_index(i).unwrap()).collect())
                    })
                    .collect::<Result<_>>()?
            }
            TrainedModel::Hier {
                sentence_vectors,
                params,
                ..
            } => {
                let fallback;
                let store = match *sentence_vectors {
                    SentenceVectors::Learned => None,
                    SentenceVectors::Fallback { dim } => {
                        fallback = SentenceEmbeddingStore::from_fallback(corpus, dim);
                        Some(&fallback)
                    }
                    SentenceVectors::External { dim } => {
                        let s = store.ok_or_else(|| {
                            Error::Argument("this model needs the sentence embedding file it was trained with".into())
                        })?;
                        if s.dim() != dim {
                            return Err(Error::Argument(format!(
                                "embedding dimension {} does not match the model's {dim}",
                                s.dim()
                            )));
                        }
                        Some(s)
                    }
                };
                corpus
                    .documents
                    .iter()
                    .map(|d| params.predict(d, store))
                    .collect::<Result<_>>()?
            }
        };
        Ok(corpus
            .documents
            .iter()
            .zip(labels)
            .map(|(d, labels)| Prediction {
                doc_id: d.doc_id.clone(),
                labels,
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(s).map_err(|e| Error::Model(e.to_string()))?;
        match &m {
            TrainedModel::Crf(c) => {
                // re-run the CRF model's own integrity checks
                CrfModel::from_json(&serde_json::to_string(c).expect("model serializes"))?;
            }
            TrainedModel::Hier { version, .. } if *version != MODEL_VERSION => {
                return Err(Error::Model(format!("unsupported model version {version}")));
            }
            TrainedModel::Hier { .. } => {}
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::error::ensure_parent(path)?;
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

pub fn predictions_to_jsonl(preds: &[Prediction]) -> String {
    let mut s = String::new();
    for p in preds {
        s.push_str(&serde_json::to_string(p).expect("prediction serializes"));
        s.push('\n');
    }
    s
}

/// Parses prediction JSONL; blank lines are skipped and errors carry 1-based
/// line numbers.
pub fn predictions_from_jsonl(text: &str) -> Result<Vec<Prediction>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigOverrides;
    use crate::synthetic::{generate, SyntheticConfig};

    fn corpus() -> Corpus {
        generate(&SyntheticConfig {
            documents: 4,
            mean_sentences: 10,
            seed: 2,
            ..Default::default()
        })
        .unwrap()
    }

    fn config(model: ModelKind, mode: Option<EmbeddingMode>) -> TrainConfig {
        TrainConfig::resolve(
            ConfigOverrides {
                model: Some(model),
                embedding_mode: mode,
                epochs: Some(3),
                d_w: Some(6),
                h_tok: Some(4),
                h_doc: Some(4),
                embedding_dim: Some(16),
                ..Default::default()
            },
            Default::default(),
        )
        .unwrap()
    }

    #[test]
    fn every_family_trains_predicts_and_round_trips() {
        let c = corpus();
        for (model, mode) in [
            (ModelKind::CrfBaseline, None),
            (ModelKind::HierBilstm, Some(EmbeddingMode::RandomInit)),
            (ModelKind::HierBilstmCrf, Some(EmbeddingMode::Pretrained)),
        ] {
            let out = train(&c, &config(model, mode), None).unwrap();
            assert_eq!(out.model.kind(), model);
            let preds = out.model.predict(&c, None).unwrap();
            assert_eq!(preds.len(), c.len());
            for (p, d) in preds.iter().zip(&c.documents) {
                assert_eq!(p.doc_id, d.doc_id);
                assert_eq!(p.labels.len(), d.sentences.len());
            }
            let back = TrainedModel::from_json(&out.model.to_json()).unwrap();
            assert_eq!(back.predict(&c, None).unwrap(), preds);
        }
    }

    #[test]
    fn external_store_is_required_at_prediction() {
        let c = corpus();
        let store = SentenceEmbeddingStore::from_fallback(&c, 8);
        let cfg = config(ModelKind::HierBilstmCrf, Some(EmbeddingMode::Pretrained));
        let m = train(&c, &cfg, Some(&store)).unwrap().model;
        assert!(matches!(m.predict(&c, None), Err(Error::Argument(_))));
        assert!(m.predict(&c, Some(&store)).is_ok());
    }

    #[test]
    fn prediction_lines_round_trip() {
        let p = vec![Prediction {
            doc_id: "d1".into(),
            labels: vec![Label::Fac, Label::Rpc],
        }];
        let text = predictions_to_jsonl(&p);
        assert_eq!(text, "{\"doc_id\":\"d1\",\"labels\":[\"FAC\",\"RPC\"]}\n");
        assert_eq!(predictions_from_jsonl(&text).unwrap(), p);
        assert!(matches!(predictions_from_jsonl("\n{"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn unlabeled_training_data_is_rejected() {
        let mut c = corpus();
        c.documents[0].gold = None;
        let cfg = config(ModelKind::CrfBaseline, None);
        assert!(matches!(train(&c, &cfg, None), Err(Error::Validation { .. })));
    }
}
