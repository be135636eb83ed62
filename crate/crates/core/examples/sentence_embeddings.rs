//! Builds a sentence embedding store, round-trips it through the text
//! format, and trains the pretrained-mode model on it.

use rhetorical_roles::config::{ConfigOverrides, TrainConfig};
use rhetorical_roles::eval::evaluate_corpus;
use rhetorical_roles::model;
use rhetorical_roles::neural::{fallback_embed, SentenceEmbeddingStore};
use rhetorical_roles::synthetic::{generate, SyntheticConfig};
use rhetorical_roles::Result;

fn main() -> Result<()> {
    let corpus = generate(&SyntheticConfig { documents: 10, mean_sentences: 20, seed: 6, ..Default::default() })?;

    // the hashed fallback: same sentence, same vector, unit length
    let s = &corpus.documents[0].sentences[0];
    let v = fallback_embed(s, 64);
    println!("{:?} -> |v| = {:.6}", s.text, v.iter().map(|x| x * x).sum::<f64>().sqrt());

    let store = SentenceEmbeddingStore::from_fallback(&corpus, 256);
    let path = std::env::temp_dir().join("rhetorical-roles-vectors.txt");
    store.save(&path)?;
    let loaded = SentenceEmbeddingStore::load(&path)?;
    println!("stored {} vectors of dimension {} at {}", loaded.len(), loaded.dim(), path.display());

    let cfg = TrainConfig::resolve(Default::default(), ConfigOverrides::default())?;
    let trained = model::train(&corpus, &cfg, Some(&loaded))?.model;
    let preds = trained.predict(&corpus, Some(&loaded))?;
    println!("training accuracy {:.3}", evaluate_corpus(&preds, &corpus)?.overall.accuracy);
    Ok(())
}
