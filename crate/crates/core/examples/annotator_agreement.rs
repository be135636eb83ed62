//! Measures inter-annotator agreement on a synthetic corpus annotated by
//! three noisy annotators, then prints one agreement matrix.

use rhetorical_roles::agreement::{agreement_matrix, pairwise_average_iaa};
use rhetorical_roles::synthetic::{add_noisy_annotators, generate, SyntheticConfig};
use rhetorical_roles::{Label, Result};

fn main() -> Result<()> {
    let mut corpus = generate(&SyntheticConfig { documents: 12, mean_sentences: 30, seed: 3, ..Default::default() })?;
    add_noisy_annotators(&mut corpus, &["A1", "A2", "A3"], 0.15, 21)?;

    // These annotators label whole sentences, so every overlap is exact and
    // the three variants coincide; see curate_gold for sentence-level use.
    let names: Vec<String> = corpus.annotators();
    let report = pairwise_average_iaa(&corpus, &names, 1.0)?;
    println!("{:<6} {:>7} {:>7} {:>7}", "label", "strict", "lenient", "average");
    for l in Label::ALL {
        let f = report.per_label[&l].fscore;
        println!("{:<6} {:>7.3} {:>7.3} {:>7.3}", l.as_str(), f.strict, f.lenient, f.average);
    }
    let f = report.overall.fscore;
    println!("{:<6} {:>7.3} {:>7.3} {:>7.3}\n", "all", f.strict, f.lenient, f.average);

    for (domain, block) in &report.per_domain {
        println!("{domain:<15} lenient F {:.3}", block.overall.fscore.lenient);
    }

    let m = agreement_matrix(&corpus, "A1", "A2")?;
    println!("\nA1 (rows) vs A2 (columns), {} of {} sentences agree", m.trace(), m.total());
    print!("{}", m.to_csv());
    Ok(())
}
