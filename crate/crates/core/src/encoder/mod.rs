//! Transformer encoder.
