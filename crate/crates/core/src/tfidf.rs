//! TF-IDF featurization.
//!
//! Smoothed IDF (`ln((1+N)/(1+df)) + 1`) over raw term counts, with L2 row
//! normalization — the combination behind the classical baselines. Fitting
//! only ever sees the training corpus; transforming new documents never
//! updates document frequencies.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textprep::{build_vocab, Tokenizer, Vocabulary};

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    pub dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(dim: usize, mut entries: Vec<(usize, f64)>) -> Self {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_unstable_by_key(|&(i, _)| i);
        debug_assert!(entries.iter().all(|&(i, _)| i < dim));
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Self { dim, entries }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.entries
            .binary_search_by_key(&idx, |&(i, _)| i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }
}

/// Fitted TF-IDF model: vocabulary plus one IDF weight per term.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    vocab: Vocabulary,
    idf: Vec<f64>,
    pub smooth: bool,
    tokenizer: Tokenizer,
}

impl TfidfModel {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }
}

/// Counts raw term occurrences of `text` against `vocab`.
pub fn term_counts(text: &str, tok: &Tokenizer, vocab: &Vocabulary) -> SparseVector {
    let mut counts: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for t in tok.tokenize(text) {
        if let Some(idx) = vocab.get(&t) {
            *counts.entry(idx).or_insert(0.0) += 1.0;
        }
    }
    SparseVector::new(vocab.len(), counts.into_iter().collect())
}

/// Fits IDF weights on a training corpus.
///
/// `df_t` counts distinct documents containing `t`; with smoothing,
/// `idf_t = ln((1+N)/(1+df_t)) + 1`, without, `idf_t = ln(N/df_t) + 1`.
pub fn fit(corpus: &Corpus, tok: &Tokenizer, vocab: &Vocabulary) -> Result<TfidfModel> {
    fit_with(corpus, tok, vocab, true)
}

pub fn fit_with(
    corpus: &Corpus,
    tok: &Tokenizer,
    vocab: &Vocabulary,
    smooth: bool,
) -> Result<TfidfModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary { min_df: 0 });
    }
    let n = corpus.len() as f64;
    let mut df = vec![0usize; vocab.len()];
    for text in corpus.texts() {
        let mut seen: Vec<usize> = tok
            .tokenize(text)
            .iter()
            .filter_map(|t| vocab.get(t))
            .collect();
        seen.sort_unstable();
        seen.dedup();
        for idx in seen {
            df[idx] += 1;
        }
    }
    let idf = df
        .iter()
        .map(|&d| {
            if smooth {
                ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0
            } else if d > 0 {
                (n / d as f64).ln() + 1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(TfidfModel {
        vocab: vocab.clone(),
        idf,
        smooth,
        tokenizer: tok.clone(),
    })
}

/// Maps a document to its L2-normalized TF-IDF vector.
///
/// A document with no in-vocabulary token yields the zero vector (it is not
/// normalized).
pub fn transform(model: &TfidfModel, text: &str) -> SparseVector {
    let counts = term_counts(text, &model.tokenizer, &model.vocab);
    let weighted: Vec<(usize, f64)> = counts
        .entries()
        .iter()
        .map(|&(i, tf)| (i, tf * model.idf[i]))
        .collect();
    let norm = weighted.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return SparseVector::new(model.dim(), Vec::new());
    }
    SparseVector::new(
        model.dim(),
        weighted.into_iter().map(|(i, v)| (i, v / norm)).collect(),
    )
}

/// Transforms every corpus row, preserving order.
pub fn transform_corpus(model: &TfidfModel, corpus: &Corpus) -> Vec<SparseVector> {
    corpus.texts().map(|t| transform(model, t)).collect()
}

const IDF_MAGIC: &[u8; 4] = b"TCIF";
const IDF_VERSION: u32 = 1;

/// Persists the IDF array: 16-byte header (magic, version, V) then V
/// little-endian f64 values. The vocabulary goes to its own text file.
pub fn save_idf(model: &TfidfModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(IDF_MAGIC)?;
    w.write_all(&IDF_VERSION.to_le_bytes())?;
    w.write_all(&(model.idf.len() as u64).to_le_bytes())?;
    for &v in &model.idf {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_idf(path: &Path) -> Result<Vec<f64>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != IDF_MAGIC {
        return Err(Error::BadBundle(format!(
            "{} is not an IDF file",
            path.display()
        )));
    }
    let mut v32 = [0u8; 4];
    r.read_exact(&mut v32)?;
    if u32::from_le_bytes(v32) != IDF_VERSION {
        return Err(Error::BadBundle("unsupported IDF file version".into()));
    }
    let mut v64 = [0u8; 8];
    r.read_exact(&mut v64)?;
    let n = u64::from_le_bytes(v64) as usize;
    let mut idf = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        idf.push(f64::from_le_bytes(buf));
    }
    Ok(idf)
}

/// Rebuilds a model from its persisted vocabulary + IDF parts.
pub fn assemble(vocab: Vocabulary, idf: Vec<f64>, tokenizer: Tokenizer) -> Result<TfidfModel> {
    if vocab.len() != idf.len() {
        return Err(Error::BadBundle(format!(
            "vocabulary has {} tokens but IDF array has {}",
            vocab.len(),
            idf.len()
        )));
    }
    Ok(TfidfModel {
        vocab,
        idf,
        smooth: true,
        tokenizer,
    })
}
