//! Trains every model variant on a synthetic corpus and prints held-out
//! macro scores, one line per variant.
//!
//! ```text
//! cargo run --release --example synthetic_grid -- [seed] [epochs]
//! ```

use std::time::Instant;

use rhetorical_roles::config::{ConfigOverrides, ModelKind, TrainConfig};
use rhetorical_roles::eval::evaluate_corpus;
use rhetorical_roles::features::FeatureSet;
use rhetorical_roles::model;
use rhetorical_roles::neural::EmbeddingMode;
use rhetorical_roles::synthetic::{generate, SyntheticConfig};
use rhetorical_roles::{Corpus, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let epochs: Option<usize> = args.next().map(|s| s.parse().expect("epochs"));

    let corpus = generate(&SyntheticConfig { documents: 50, seed, ..Default::default() })?;
    let (train, test) = corpus.documents.split_at(40);
    let train = Corpus::new(train.to_vec())?;
    let test = Corpus::new(test.to_vec())?;

    let variants = [
        (ModelKind::CrfBaseline, Some(FeatureSet::Saravanan), None),
        (ModelKind::CrfBaseline, Some(FeatureSet::Savelka), None),
        (ModelKind::CrfBaseline, Some(FeatureSet::Combined), None),
        (ModelKind::HierBilstm, None, Some(EmbeddingMode::RandomInit)),
        (ModelKind::HierBilstm, None, Some(EmbeddingMode::Pretrained)),
        (ModelKind::HierBilstmCrf, None, Some(EmbeddingMode::RandomInit)),
        (ModelKind::HierBilstmCrf, None, Some(EmbeddingMode::Pretrained)),
    ];
    println!("{:<16} {:<11} {:>6} {:>6} {:>6} {:>8}", "model", "variant", "P", "R", "F", "seconds");
    for (kind, feature_set, embedding_mode) in variants {
        let cfg = TrainConfig::resolve(
            ConfigOverrides {
                model: Some(kind),
                feature_set,
                embedding_mode,
                epochs: if kind.is_neural() { epochs } else { None },
                seed: Some(seed),
                ..Default::default()
            },
            Default::default(),
        )?;
        let start = Instant::now();
        let trained = model::train(&train, &cfg, None)?;
        let report = evaluate_corpus(&trained.model.predict(&test, None)?, &test)?;
        let m = report.overall.macro_avg;
        let variant = match (feature_set, embedding_mode) {
            (Some(f), _) => format!("{f:?}"),
            (_, Some(e)) => format!("{e:?}"),
            _ => String::new(),
        };
        println!(
            "{:<16} {:<11} {:>6.3} {:>6.3} {:>6.3} {:>8.1}",
            kind.as_str(),
            variant,
            m.precision,
            m.recall,
            m.fscore,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
