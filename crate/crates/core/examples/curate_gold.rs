//! Derives gold labels by majority vote and shows both tie policies.

use rhetorical_roles::agreement::{majority_vote_gold, TiePolicy};
use rhetorical_roles::{Corpus, Document, Error, Label, Result};

fn main() -> Result<()> {
    use Label::*;
    let mut doc = Document::from_sentences(
        "case-7",
        "Tax",
        &["The assessee filed returns.", "Section 80 applies.", "We therefore hold so.", "Appeal allowed."],
    )?;
    doc.set_sentence_annotation("A1", &[Fac, Sta, Ratio, Rpc]);
    doc.set_sentence_annotation("A2", &[Fac, Sta, Arg, Rpc]);
    doc.set_sentence_annotation("A3", &[Fac, Pre, Rlc, Rpc]);
    let corpus = Corpus::new(vec![doc])?;

    match majority_vote_gold(&corpus, &TiePolicy::Error) {
        Err(Error::Tie(at)) => println!("strict policy refuses, tied sentences: {at:?}"),
        other => println!("unexpected: {other:?}"),
    }
    for order in [["A1", "A2", "A3"], ["A3", "A2", "A1"]] {
        let policy = TiePolicy::AnnotatorPriority(order.iter().map(|s| s.to_string()).collect());
        let gold = majority_vote_gold(&corpus, &policy)?;
        let labels: Vec<&str> = gold.documents[0].gold.as_ref().unwrap().iter().map(|l| l.as_str()).collect();
        println!("priority {order:?}: {labels:?}");
    }
    Ok(())
}
