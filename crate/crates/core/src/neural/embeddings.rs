//! Precomputed sentence embeddings: file format, in-memory store, and a
//! feature-hashing fallback used when no pretrained vectors are available.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};
use crate::text::tokenize;

/// Vectors keyed by `(doc_id, sentence_index)`, all of one dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SentenceEmbeddingStore {
    dim: usize,
    vectors: BTreeMap<(String, usize), Vec<f64>>,
}

impl SentenceEmbeddingStore {
    pub fn new(dim: usize) -> Self {
        SentenceEmbeddingStore {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, doc_id: &str, index: usize) -> Option<&[f64]> {
        self.vectors
            .get(&(doc_id.to_string(), index))
            .map(Vec::as_slice)
    }

    pub fn insert(&mut self, doc_id: impl Into<String>, index: usize, v: Vec<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Argument(format!(
                "vector of dimension {} in a store of dimension {}",
                v.len(),
                self.dim
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("non-finite embedding value".into()));
        }
        self.vectors.insert((doc_id.into(), index), v);
        Ok(())
    }

    /// Store holding [`fallback_embed`] vectors for every sentence of `corpus`.
    pub fn from_fallback(corpus: &Corpus, dim: usize) -> Self {
        let mut store = SentenceEmbeddingStore::new(dim);
        for d in &corpus.documents {
            for s in &d.sentences {
                store
                    .vectors
                    .insert((d.doc_id.clone(), s.index), fallback_embed(s, dim));
            }
        }
        store
    }

    /// Reads the `dim=<d>` header followed by tab-separated
    /// `doc_id`, `sentence_index`, space-separated values.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(path, e))?,
            None => {
                return Err(Error::Format {
                    line: 1,
                    message: "missing `dim=<d>` header".into(),
                })
            }
        };
        let dim: usize = header
            .trim()
            .strip_prefix("dim=")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::Format {
                line: 1,
                message: format!("bad header `{header}`"),
            })?;
        let mut store = SentenceEmbeddingStore::new(dim);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fail = |message: String| Error::Format {
                line: lineno,
                message,
            };
            let mut cols = line.splitn(3, '\t');
            let (Some(doc), Some(idx), Some(vals)) = (cols.next(), cols.next(), cols.next()) else {
                return Err(fail("expected three tab-separated columns".into()));
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| fail(format!("bad sentence index `{idx}`")))?;
            let v: Vec<f64> = vals
                .split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|_| fail(format!("bad value `{x}`"))))
                .collect::<Result<_>>()?;
            if v.len() != dim {
                return Err(fail(format!("{} values, expected {dim}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(fail("non-finite value".into()));
            }
            if store.vectors.insert((doc.to_string(), idx), v).is_some() {
                return Err(fail(format!("duplicate key ({doc}, {idx})")));
            }
        }
        Ok(store)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("dim={}\n", self.dim);
        for ((doc, idx), v) in &self.vectors {
            write!(s, "{doc}\t{idx}\t").unwrap();
            let vals: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            s.push_str(&vals.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::error::ensure_parent(path)?;
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn token_hash(token: &str) -> u64 {
    let digest = Sha256::digest(token.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Signed feature hashing of the sentence's lowercased tokens, averaged and
/// L2-normalized. Empty sentences map to the zero vector.
pub fn fallback_embed(sentence: &Sentence, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    if dim == 0 {
        return v;
    }
    let tokens = tokenize(&sentence.text);
    for tok in &tokens {
        let h = token_hash(&tok.to_lowercase());
        let bucket = (h % dim as u64) as usize;
        let sign = if (h >> 63) & 1 == 1 { -1.0 } else { 1.0 };
        v[bucket] += sign / tokens.len() as f64;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}
