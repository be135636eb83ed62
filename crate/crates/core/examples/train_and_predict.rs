//! Trains the CRF baseline and the hierarchical BiLSTM-CRF, saves and
//! reloads each model, then scores predictions on held-out documents.

use rhetorical_roles::config::{ConfigOverrides, ModelKind, TrainConfig};
use rhetorical_roles::eval::evaluate_corpus;
use rhetorical_roles::model::{self, TrainedModel};
use rhetorical_roles::synthetic::{generate, SyntheticConfig};
use rhetorical_roles::{Corpus, Result};

fn main() -> Result<()> {
    let corpus = generate(&SyntheticConfig { documents: 24, mean_sentences: 30, seed: 1, ..Default::default() })?;
    let (train, test) = corpus.documents.split_at(20);
    let (train, test) = (Corpus::new(train.to_vec())?, Corpus::new(test.to_vec())?);
    let dir = std::env::temp_dir().join("rhetorical-roles-example");

    for (kind, epochs) in [(ModelKind::CrfBaseline, 50), (ModelKind::HierBilstmCrf, 30)] {
        let cfg = TrainConfig::resolve(
            ConfigOverrides { model: Some(kind), epochs: Some(epochs), ..Default::default() },
            Default::default(),
        )?;
        let outcome = model::train(&train, &cfg, None)?;
        println!(
            "{}: loss {:.2} -> {:.2} over {} epochs",
            kind.as_str(),
            outcome.loss_log[0],
            outcome.loss_log.last().unwrap(),
            epochs
        );

        let path = dir.join(format!("{}.json", kind.as_str()));
        outcome.model.save(&path)?;
        let reloaded = TrainedModel::load(&path)?;
        let preds = reloaded.predict(&test, None)?;
        let report = evaluate_corpus(&preds, &test)?;
        println!("  held-out accuracy {:.3}, macro F {:.3}", report.overall.accuracy, report.overall.macro_avg.fscore);
        for m in &report.overall.per_label {
            println!("  {:<6} P {:.3} R {:.3} F {:.3} (support {})", m.label.as_str(), m.prf.precision, m.prf.recall, m.prf.fscore, m.support);
        }
    }
    Ok(())
}
