//! Hierarchical BiLSTM sentence labelers.
//!
//! A token-level BiLSTM (or a store of precomputed vectors) yields one
//! vector per sentence; a document-level BiLSTM contextualizes them; a
//! softmax or CRF head scores the seven labels. Gradients come from the
//! reverse-mode [`tape`].

pub mod embeddings;
mod model;
pub mod tape;


pub use embeddings::{fallback_embed, SentenceEmbeddingStore};
pub use model::{
    encode_document, encode_sentence, train_hier, BiRecurrentLayer, Dims, EmbeddingMode,
    EmbeddingTable, Head, HeadKind, HierModelParams, Lstm, NeuralConfig, TokenEncoder,
    TrainedHier, UNK,
};
