//! Dense tensors with reverse-mode automatic differentiation.
