//! Rhetorical role labeling for legal judgments.
//!
//! Each sentence of a judgment gets one of seven roles ([`Label`]). The crate
//! covers the whole workflow: corpus handling and sentence splitting
//! ([`corpus`]), inter-annotator agreement and gold curation
//! ([`agreement`]), handcrafted features ([`features`]) feeding a
//! linear-chain CRF ([`crf`]), hierarchical BiLSTM models with softmax or CRF
//! heads ([`neural`]), and k-fold evaluation ([`eval`]).

pub mod agreement;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod features;
pub mod label;
pub mod model;
pub mod neural;
pub mod optim;
pub mod synthetic;
pub mod text;

pub use corpus::{Corpus, Document, LabeledSpan, Sentence, Span};
pub use error::{Error, Result};
pub use label::Label;
