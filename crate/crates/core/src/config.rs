//! Training configuration shared by the library entry points and the CLI.
//!
//! A [`TrainConfig`] is always fully resolved. Partial settings arrive as
//! [`ConfigOverrides`] (from a JSON file or from flags) and are layered with
//! [`TrainConfig::resolve`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::neural::{EmbeddingMode, HeadKind, NeuralConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    CrfBaseline,
    HierBilstm,
    HierBilstmCrf,
}

impl ModelKind {
    pub fn is_neural(self) -> bool {
        !matches!(self, ModelKind::CrfBaseline)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::CrfBaseline => "crf_baseline",
            ModelKind::HierBilstm => "hier_bilstm",
            ModelKind::HierBilstmCrf => "hier_bilstm_crf",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crf_baseline" => Ok(ModelKind::CrfBaseline),
            "hier_bilstm" => Ok(ModelKind::HierBilstm),
            "hier_bilstm_crf" => Ok(ModelKind::HierBilstmCrf),
            _ => Err(Error::Argument(format!("unknown model `{s}`"))),
        }
    }
}

/// Every knob of a training run. `feature_set` is set exactly for the CRF
/// baseline and `embedding_mode` exactly for the neural models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub feature_set: Option<FeatureSet>,
    pub embedding_mode: Option<EmbeddingMode>,
    pub d_w: usize,
    pub h_tok: usize,
    pub h_doc: usize,
    /// Dimension of the hashed fallback sentence vectors, used in pretrained
    /// mode when no embedding file is given.
    pub embedding_dim: usize,
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub clip: f64,
    pub min_freq: usize,
    pub seed: u64,
    pub lexicons: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// A partial [`TrainConfig`]; absent fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub model: Option<ModelKind>,
    pub feature_set: Option<FeatureSet>,
    pub embedding_mode: Option<EmbeddingMode>,
    pub d_w: Option<usize>,
    pub h_tok: Option<usize>,
    pub h_doc: Option<usize>,
    pub embedding_dim: Option<usize>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
    pub clip: Option<f64>,
    pub min_freq: Option<usize>,
    pub seed: Option<u64>,
    pub lexicons: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

macro_rules! layer {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        ConfigOverrides { $($f: $hi.$f.or($lo.$f),)* }
    };
}

impl ConfigOverrides {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })
    }

    /// Fields of `self` win over those of `lower`.
    pub fn over(self, lower: ConfigOverrides) -> ConfigOverrides {
        layer!(
            self, lower, model, feature_set, embedding_mode, d_w, h_tok, h_doc, embedding_dim, lr,
            epochs, l2, clip, min_freq, seed, lexicons, embeddings, output
        )
    }
}

impl TrainConfig {
    /// Built-in defaults for `model`.
    pub fn defaults(model: ModelKind) -> Self {
        let neural = NeuralConfig::default();
        let (lr, epochs) = if model.is_neural() { (neural.lr, neural.epochs) } else { (0.01, 50) };
        TrainConfig {
            model,
            feature_set: (!model.is_neural()).then_some(FeatureSet::Combined),
            embedding_mode: model.is_neural().then_some(EmbeddingMode::Pretrained),
            d_w: neural.d_w,
            h_tok: neural.h_tok,
            h_doc: neural.h_doc,
            embedding_dim: 512,
            lr,
            epochs,
            l2: 1e-4,
            clip: neural.clip,
            min_freq: neural.min_freq,
            seed: 0,
            lexicons: None,
            embeddings: None,
            output: None,
        }
    }

    /// Layers `flags` over `file` over the defaults of the selected model
    /// (which itself defaults to `hier_bilstm_crf`), then validates.
    pub fn resolve(flags: ConfigOverrides, file: ConfigOverrides) -> Result<Self> {
        let o = flags.over(file);
        let model = o.model.unwrap_or(ModelKind::HierBilstmCrf);
        if model.is_neural() && o.feature_set.is_some() {
            return Err(Error::Argument(format!(
                "feature_set only applies to crf_baseline, not {}",
                model.as_str()
            )));
        }
        if !model.is_neural() && o.embedding_mode.is_some() {
            return Err(Error::Argument(
                "embedding_mode only applies to the neural models".into(),
            ));
        }
        let d = TrainConfig::defaults(model);
        let cfg = TrainConfig {
            model,
            feature_set: o.feature_set.or(d.feature_set),
            embedding_mode: o.embedding_mode.or(d.embedding_mode),
            d_w: o.d_w.unwrap_or(d.d_w),
            h_tok: o.h_tok.unwrap_or(d.h_tok),
            h_doc: o.h_doc.unwrap_or(d.h_doc),
            embedding_dim: o.embedding_dim.unwrap_or(d.embedding_dim),
            lr: o.lr.unwrap_or(d.lr),
            epochs: o.epochs.unwrap_or(d.epochs),
            l2: o.l2.unwrap_or(d.l2),
            clip: o.clip.unwrap_or(d.clip),
            min_freq: o.min_freq.unwrap_or(d.min_freq),
            seed: o.seed.unwrap_or(d.seed),
            lexicons: o.lexicons,
            embeddings: o.embeddings,
            output: o.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Argument(m.into()));
        if self.model.is_neural() != self.embedding_mode.is_some() {
            return bad("embedding_mode must be set exactly for the neural models");
        }
        if self.model.is_neural() == self.feature_set.is_some() {
            return bad("feature_set must be set exactly for crf_baseline");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("lr must be positive");
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad("l2 must be non-negative");
        }
        if !(self.clip.is_finite() && self.clip > 0.0) {
            return bad("clip must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if [self.d_w, self.h_tok, self.h_doc, self.embedding_dim, self.min_freq].contains(&0) {
            return bad("dimensions and min_freq must be at least 1");
        }
        Ok(())
    }

    /// Settings for the hierarchical models; `None` for the CRF baseline.
    pub fn neural(&self) -> Option<NeuralConfig> {
        let head = match self.model {
            ModelKind::CrfBaseline => return None,
            ModelKind::HierBilstm => HeadKind::Softmax,
            ModelKind::HierBilstmCrf => HeadKind::Crf,
        };
        Some(NeuralConfig {
            head,
            mode: self.embedding_mode?,
            d_w: self.d_w,
            h_tok: self.h_tok,
            h_doc: self.h_doc,
            lr: self.lr,
            epochs: self.epochs,
            clip: self.clip,
            min_freq: self.min_freq,
            seed: self.seed,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
