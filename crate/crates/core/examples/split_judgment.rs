//! Splits a raw judgment into sentences, keeping legal abbreviations intact,
//! and shows the character offsets each sentence maps to.

use rhetorical_roles::corpus::{default_abbreviations, split_sentences};
use rhetorical_roles::{Corpus, Document, Result};

const TEXT: &str = "The appellant was convicted u/s. 302 IPC by the Sessions Court. \
The High Court affirmed the conviction. Learned counsel relied on Art. 21 of the \
Constitution, see Smt. Kaur v. State, 1992 SCC (Cri) 1. We find no merit. \
The appeal is dismissed.";

fn main() -> Result<()> {
    let mut abbreviations = default_abbreviations();
    // entries carry their final period
    abbreviations.extend(["u/s.".to_string(), "Smt.".to_string()]);
    let sentences = split_sentences(TEXT, &abbreviations);
    for s in &sentences {
        println!("{:>3} [{:>3},{:>3})  {}", s.index, s.span.start, s.span.end, s.text);
    }

    let doc = Document::from_spans("appeal-1", "Criminal", TEXT, &sentences.iter().map(|s| s.span).collect::<Vec<_>>())?;
    let corpus = Corpus::new(vec![doc])?;
    corpus.validate()?;
    println!("\n{}", rhetorical_roles::corpus::document_to_json(&corpus.documents[0]));
    Ok(())
}
