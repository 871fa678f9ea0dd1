//! Tokenization and vocabularies.
//!
//! Text is NFC-normalized, optionally lowercased, then split into
//! contiguous letter/digit runs (punctuation acts as a separator) before
//! stop-word filtering. The same tokenizer feeds both the TF-IDF pipeline
//! and the encoder; the encoder additionally reserves the special ids
//! `PAD=0, UNK=1, CLS=2, MASK=3`.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Special token ids reserved when a vocabulary is built for the encoder.
pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const CLS: usize = 2;
pub const MASK: usize = 3;

pub const SPECIAL_TOKENS: [&str; 4] = ["[PAD]", "[UNK]", "[CLS]", "[MASK]"];

/// The vendored 179-word English stop-word list (see `data/stopwords_en.txt`).
pub fn english_stopwords() -> &'static BTreeSet<String> {
    static LIST: OnceLock<BTreeSet<String>> = OnceLock::new();
    LIST.get_or_init(|| {
        include_str!("../data/stopwords_en.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    })
}

/// Deterministic, corpus-independent text-to-token mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    /// Tokens on this list are dropped after normalization.
    pub stopwords: BTreeSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
            stopwords: english_stopwords().clone(),
        }
    }
}

impl Tokenizer {
    /// Tokenizer without stop-word filtering.
    pub fn keep_stopwords() -> Self {
        Self {
            stopwords: BTreeSet::new(),
            ..Self::default()
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let normalized: String = text.nfc().collect();
        let cased = if self.lowercase {
            normalized.to_lowercase()
        } else {
            normalized
        };
        let raw: Vec<String> = if self.strip_punctuation {
            let mut tokens = Vec::new();
            let mut current = String::new();
            for ch in cased.chars() {
                if ch.is_alphanumeric() {
                    current.push(ch);
                } else if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            if !current.is_empty() {
                tokens.push(current);
            }
            tokens
        } else {
            cased.split_whitespace().map(str::to_string).collect()
        };
        raw.into_iter()
            .filter(|t| !self.stopwords.contains(t))
            .collect()
    }
}

/// Dense token-to-index map, ordered by descending document frequency then
/// lexicographically. Indices 0..3 are the special tokens when reserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    has_specials: bool,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn has_specials(&self) -> bool {
        self.has_specials
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// First index holding a corpus (non-special) token.
    pub fn first_regular_index(&self) -> usize {
        if self.has_specials {
            SPECIAL_TOKENS.len()
        } else {
            0
        }
    }

    /// Writes one token per line; the line number is the index.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        for t in &self.tokens {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let tokens: Vec<String> = BufReader::new(f)
            .lines()
            .collect::<std::io::Result<_>>()?;
        if tokens.is_empty() {
            return Err(Error::EmptyVocabulary { min_df: 0 });
        }
        let has_specials = tokens.len() >= SPECIAL_TOKENS.len()
            && tokens[..SPECIAL_TOKENS.len()]
                .iter()
                .zip(SPECIAL_TOKENS)
                .all(|(a, b)| a == b);
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self {
            tokens,
            index,
            has_specials,
        })
    }
}

/// Builds a vocabulary from the tokens of `corpus`.
///
/// Tokens need document frequency >= `min_df`. Ordering is descending df,
/// ties broken lexicographically, so identical corpora yield identical
/// index assignments.
pub fn build_vocab(
    corpus: &Corpus,
    tok: &Tokenizer,
    min_df: usize,
    reserve_specials: bool,
) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for text in corpus.texts() {
        let distinct: BTreeSet<String> = tok.tokenize(text).into_iter().collect();
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df
        .into_iter()
        .filter(|(t, d)| *d >= min_df && !SPECIAL_TOKENS.contains(&t.as_str()))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_df });
    }
    kept.sort_by(|(ta, da), (tb, db)| db.cmp(da).then_with(|| ta.cmp(tb)));

    let mut tokens: Vec<String> = Vec::with_capacity(kept.len() + 4);
    if reserve_specials {
        tokens.extend(SPECIAL_TOKENS.iter().map(|s| s.to_string()));
    }
    tokens.extend(kept.into_iter().map(|(t, _)| t));
    let index = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        tokens,
        index,
        has_specials: reserve_specials,
    })
}

/// Encodes text as `[CLS] + ids`, truncated and PAD-filled to `max_len`.
///
/// Out-of-vocabulary tokens map to UNK. Returns the id sequence (always
/// exactly `max_len` long) and the unpadded length including CLS.
pub fn encode(
    text: &str,
    tok: &Tokenizer,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<(Vec<u32>, usize)> {
    if max_len < 2 {
        return Err(Error::InvalidConfig(format!(
            "encode needs max_len >= 2, got {max_len}"
        )));
    }
    if !vocab.has_specials {
        return Err(Error::InvalidConfig(
            "encode needs a vocabulary with reserved special tokens".into(),
        ));
    }
    let mut ids = Vec::with_capacity(max_len);
    ids.push(CLS as u32);
    for t in tok.tokenize(text) {
        if ids.len() == max_len {
            break;
        }
        ids.push(vocab.get(&t).unwrap_or(UNK) as u32);
    }
    let true_len = ids.len();
    ids.resize(max_len, PAD as u32);
    Ok((ids, true_len))
}
