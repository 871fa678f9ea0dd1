//! CART decision trees with class-weighted Gini impurity.
//!
//! Splits are thresholds on raw sparse feature values (absent features read
//! as 0). Leaves keep the weighted class mass routed to them, so forests
//! can average probability vectors.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tfidf::SparseVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeHyper {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    /// Candidate features per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeHyper {
    fn default() -> Self {
        Self {
            max_depth: 40,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Weighted class mass routed to this leaf.
        dist: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Samples with `value <= threshold`.
        left: Box<Node>,
        /// Samples with `value > threshold`.
        right: Box<Node>,
    },
}

/// A fitted tree over one C-way target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_classes: usize,
    pub root: Node,
}

/// `1 - sum((m_c / m)^2)` over a weighted class-mass vector.
pub fn gini(mass: &[f64]) -> f64 {
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - mass
        .iter()
        .map(|&m| {
            let p = m / total;
            p * p
        })
        .sum::<f64>()
}

struct TreeBuilder<'a> {
    x: &'a [SparseVector],
    y: &'a [usize],
    sample_weights: &'a [f64],
    n_classes: usize,
    n_features: usize,
    hyper: &'a TreeHyper,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity_drop: f64,
}

impl<'a> TreeBuilder<'a> {
    fn mass_of(&self, idx: &[usize]) -> Vec<f64> {
        let mut mass = vec![0.0; self.n_classes];
        for &i in idx {
            mass[self.y[i]] += self.sample_weights[i];
        }
        mass
    }

    fn candidate_features(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        match self.hyper.max_features {
            Some(k) if k < self.n_features => {
                let mut picked = sample(rng, self.n_features, k).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..self.n_features).collect(),
        }
    }

    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        let parent_mass = self.mass_of(idx);
        let parent_total: f64 = parent_mass.iter().sum();
        let parent_gini = gini(&parent_mass);
        let mut best: Option<BestSplit> = None;
        let mut values: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        for feature in self.candidate_features(rng) {
            values.clear();
            values.extend(idx.iter().map(|&i| (self.x[i].get(feature), i)));
            values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if values[0].0 == values[values.len() - 1].0 {
                continue;
            }
            // Sweep split points between distinct neighbours, keeping a
            // running left-side class mass.
            let mut left_mass = vec![0.0; self.n_classes];
            let mut left_count = 0usize;
            for k in 0..values.len() - 1 {
                let (v, i) = values[k];
                left_mass[self.y[i]] += self.sample_weights[i];
                left_count += 1;
                let next_v = values[k + 1].0;
                if v == next_v {
                    continue;
                }
                let right_count = values.len() - left_count;
                if left_count < self.hyper.min_samples_leaf
                    || right_count < self.hyper.min_samples_leaf
                {
                    continue;
                }
                let left_total: f64 = left_mass.iter().sum();
                let right_mass: Vec<f64> = parent_mass
                    .iter()
                    .zip(&left_mass)
                    .map(|(p, l)| p - l)
                    .collect();
                let right_total = parent_total - left_total;
                let weighted = (left_total * gini(&left_mass)
                    + right_total * gini(&right_mass))
                    / parent_total;
                let drop = parent_gini - weighted;
                let threshold = v + 0.5 * (next_v - v);
                let better = match &best {
                    None => drop > 1e-12,
                    Some(b) => drop > b.impurity_drop + 1e-12,
                };
                if better {
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        impurity_drop: drop,
                    });
                }
            }
        }
        best
    }

    fn build(&self, idx: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> Node {
        let mass = self.mass_of(idx);
        let pure = mass.iter().filter(|&&m| m > 0.0).count() <= 1;
        if pure
            || depth >= self.hyper.max_depth
            || idx.len() < self.hyper.min_samples_split
        {
            return Node::Leaf { dist: mass };
        }
        let Some(split) = self.best_split(idx, rng) else {
            return Node::Leaf { dist: mass };
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[i].get(split.feature) <= split.threshold);
        if left_idx.is_empty() || right_idx.is_empty() {
            return Node::Leaf { dist: mass };
        }
        Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.build(&left_idx, depth + 1, rng)),
            right: Box::new(self.build(&right_idx, depth + 1, rng)),
        }
    }
}

/// Fits one CART tree on integer targets `y` in `0..n_classes`.
pub fn tree_train(
    x: &[SparseVector],
    y: &[usize],
    sample_weights: &[f64],
    n_classes: usize,
    hyper: &TreeHyper,
    rng: &mut ChaCha8Rng,
) -> DecisionTree {
    assert!(x.len() == y.len() && x.len() == sample_weights.len());
    assert!(x.len() >= 1);
    let builder = TreeBuilder {
        x,
        y,
        sample_weights,
        n_classes,
        n_features: x[0].dim,
        hyper,
    };
    let idx: Vec<usize> = (0..x.len()).collect();
    DecisionTree {
        n_classes,
        root: builder.build(&idx, 0, rng),
    }
}

impl DecisionTree {
    /// Leaf class-probability vector for `x`.
    pub fn predict_proba(&self, x: &SparseVector) -> Vec<f64> {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { dist } => {
                    let total: f64 = dist.iter().sum();
                    return if total > 0.0 {
                        dist.iter().map(|m| m / total).collect()
                    } else {
                        vec![1.0 / self.n_classes as f64; self.n_classes]
                    };
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x.get(*feature) <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn depth_of(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + depth_of(left).max(depth_of(right)),
            }
        }
        depth_of(&self.root)
    }

    /// Checks that every leaf's mass equals the weighted mass routed to it.
    pub fn leaf_mass_total(&self) -> f64 {
        fn mass_of(node: &Node) -> f64 {
            match node {
                Node::Leaf { dist } => dist.iter().sum(),
                Node::Split { left, right, .. } => mass_of(left) + mass_of(right),
            }
        }
        mass_of(&self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sv(dim: usize, entries: &[(usize, f64)]) -> SparseVector {
        SparseVector::new(dim, entries.to_vec())
    }

    #[test]
    fn gini_hand_values() {
        assert_eq!(gini(&[5.0, 5.0]), 0.5);
        assert_eq!(gini(&[10.0, 0.0]), 0.0);
        assert!((gini(&[3.0, 1.0]) - 0.375).abs() < 1e-15);
        assert_eq!(gini(&[]), 0.0);
    }

    #[test]
    fn separable_data_yields_pure_leaves() {
        let x = vec![
            sv(2, &[(0, 1.0)]),
            sv(2, &[(0, 0.9)]),
            sv(2, &[(1, 1.0)]),
            sv(2, &[(1, 0.8)]),
        ];
        let y = vec![0, 0, 1, 1];
        let w = vec![1.0; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = tree_train(&x, &y, &w, 2, &TreeHyper::default(), &mut rng);
        for (xi, &yi) in x.iter().zip(&y) {
            let proba = tree.predict_proba(xi);
            assert_eq!(proba[yi], 1.0);
        }
    }

    #[test]
    fn leaf_mass_is_conserved() {
        let x: Vec<SparseVector> = (0..30)
            .map(|i| sv(3, &[(i % 3, (i as f64) / 30.0)]))
            .collect();
        let y: Vec<usize> = (0..30).map(|i| i % 2).collect();
        let w: Vec<f64> = (0..30).map(|i| 1.0 + (i % 5) as f64 * 0.5).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = tree_train(&x, &y, &w, 2, &TreeHyper::default(), &mut rng);
        let total: f64 = w.iter().sum();
        assert!((tree.leaf_mass_total() - total).abs() < 1e-9);
    }

    #[test]
    fn class_weights_shift_the_split_choice() {
        // One class heavily upweighted dominates impurity, so its samples
        // end up pure even at depth 1.
        let x = vec![
            sv(1, &[(0, 0.1)]),
            sv(1, &[(0, 0.2)]),
            sv(1, &[(0, 0.3)]),
            sv(1, &[(0, 0.9)]),
        ];
        let y = vec![0, 0, 1, 1];
        let w = vec![1.0, 1.0, 100.0, 1.0];
        let hyper = TreeHyper {
            max_depth: 1,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let tree = tree_train(&x, &y, &w, 2, &hyper, &mut rng);
        // The single split must isolate the upweighted sample's side.
        let p = tree.predict_proba(&sv(1, &[(0, 0.3)]));
        assert!(p[1] > 0.9);
    }

    #[test]
    fn absent_features_read_as_zero() {
        let x = vec![sv(2, &[(1, 1.0)]), sv(2, &[])];
        let y = vec![1, 0];
        let w = vec![1.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tree = tree_train(&x, &y, &w, 2, &TreeHyper::default(), &mut rng);
        assert_eq!(tree.predict_proba(&sv(2, &[]))[0], 1.0);
        assert_eq!(tree.predict_proba(&sv(2, &[(1, 0.7)]))[1], 1.0);
    }
}
