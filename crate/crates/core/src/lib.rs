//! textcat: a self-contained text-classification toolkit.
//!
//! Everything is implemented from first principles on top of the standard
//! library: TF-IDF featurization with class-weighted linear SVM, random
//! forest and naive Bayes baselines; a small transformer encoder trained
//! from scratch or after in-corpus masked-language-model pretraining; two
//! ensemble schemes (multi-layer and dual-encoder); and Matthews
//! Correlation Coefficient evaluation across three task schemas
//! (single-label, multi-label, multi-output).

pub mod bundle;
pub mod classical;
pub mod corpus;
pub mod encoder;
pub mod ensemble;
pub mod error;
pub mod metrics;
pub mod tensor;
pub mod textprep;
pub mod tfidf;

pub use error::{Error, Result};
