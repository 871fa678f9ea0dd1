//! Model persistence.
