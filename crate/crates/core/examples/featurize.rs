//! Extracts the three CRF feature sets for one document and prints the
//! named features of its first sentence.

use rhetorical_roles::features::{extract_features, FeatureSet, FeatureVocabulary, Lexicons};
use rhetorical_roles::synthetic::{generate, SyntheticConfig};
use rhetorical_roles::Result;

fn main() -> Result<()> {
    let corpus = generate(&SyntheticConfig { documents: 1, mean_sentences: 8, seed: 5, ..Default::default() })?;
    let doc = &corpus.documents[0];
    let lexicons = Lexicons::default();
    println!("sentence 0: {}\n", doc.sentences[0].text);

    for set in [FeatureSet::Saravanan, FeatureSet::Savelka, FeatureSet::Combined] {
        let mut vocab = FeatureVocabulary::new();
        let vectors = extract_features(doc, &lexicons, set, &mut vocab, true)?;
        vocab.freeze();
        println!("{set:?}: {} features, vocabulary hash {}", vocab.len(), &vocab.hash()[..12]);
        for &(i, v) in &vectors[0].entries {
            println!("  {:<32} {v:.3}", vocab.name(i).unwrap_or("?"));
        }
        // a frozen vocabulary maps unseen features to nothing
        let again = extract_features(doc, &lexicons, set, &mut vocab, false)?;
        assert_eq!(again, vectors);
    }
    Ok(())
}
