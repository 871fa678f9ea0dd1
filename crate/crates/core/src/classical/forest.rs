//! Random forests (and the single-tree baseline) over sparse features.
//!
//! One forest per topic: bootstrap samples of size N, `ceil(sqrt(V))`
//! candidate features per split, prediction by averaging leaf probability
//! vectors over trees. Per-tree seeds derive from the master seed, so
//! identical seeds give bit-identical forests; trees train in parallel and
//! merge in tree-index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::svm::labels_from_scores;
use crate::classical::tree::{tree_train, DecisionTree, TreeHyper};
use crate::corpus::{ClassWeights, Labels, TaskKind, TaskSchema};
use crate::error::{Error, Result};
use crate::metrics::Prediction;
use crate::tfidf::SparseVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestHyper {
    pub n_estimators: usize,
    pub bootstrap: bool,
    pub seed: u64,
    pub tree: TreeHyper,
}

impl Default for ForestHyper {
    fn default() -> Self {
        Self {
            n_estimators: 150,
            bootstrap: true,
            seed: 0,
            tree: TreeHyper::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub schema: TaskSchema,
    pub hyper: ForestHyper,
    pub dim: usize,
    /// `trees[topic][k]`.
    pub trees: Vec<Vec<DecisionTree>>,
}

/// Single decision tree per topic (the plain-tree baseline).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeModel {
    pub schema: TaskSchema,
    pub hyper: TreeHyper,
    pub seed: u64,
    pub dim: usize,
    pub trees: Vec<DecisionTree>,
}

pub(crate) fn tree_seed(master: u64, topic: usize, k: usize) -> u64 {
    master.wrapping_add(
        0x9E37_79B9_7F4A_7C15u64.wrapping_mul((topic as u64) * 10_007 + k as u64 + 1),
    )
}

fn per_topic_targets(schema: &TaskSchema, y: &[Labels], topic: usize) -> Vec<usize> {
    let _ = schema;
    y.iter().map(|l| l.class_for_topic(topic)).collect()
}

fn per_topic_weights(weights: &ClassWeights, targets: &[usize], topic: usize) -> Vec<f64> {
    targets
        .iter()
        .map(|&c| weights.weight(topic, c))
        .collect()
}

fn validate_rows(x: &[SparseVector], y: &[Labels]) -> Result<()> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "tree training needs at least 2 rows with matching labels (got {} rows, {} labels)",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Fits one forest per topic of the schema.
pub fn forest_train(
    x: &[SparseVector],
    y: &[Labels],
    schema: &TaskSchema,
    weights: &ClassWeights,
    hyper: &ForestHyper,
) -> Result<RandomForestModel> {
    validate_rows(x, y)?;
    let dim = x[0].dim;
    let n = x.len();
    let classes = schema.classes_per_topic();
    let max_features = hyper
        .tree
        .max_features
        .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
        .clamp(1, dim);
    let tree_hyper = TreeHyper {
        max_features: Some(max_features),
        ..hyper.tree.clone()
    };
    let mut trees = Vec::with_capacity(schema.n_topics());
    for topic in 0..schema.n_topics() {
        let targets = per_topic_targets(schema, y, topic);
        let sw = per_topic_weights(weights, &targets, topic);
        let topic_trees: Vec<DecisionTree> = (0..hyper.n_estimators)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(hyper.seed, topic, k));
                if hyper.bootstrap {
                    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                    let bx: Vec<SparseVector> = idx.iter().map(|&i| x[i].clone()).collect();
                    let by: Vec<usize> = idx.iter().map(|&i| targets[i]).collect();
                    let bw: Vec<f64> = idx.iter().map(|&i| sw[i]).collect();
                    tree_train(&bx, &by, &bw, classes, &tree_hyper, &mut rng)
                } else {
                    tree_train(x, &targets, &sw, classes, &tree_hyper, &mut rng)
                }
            })
            .collect();
        trees.push(topic_trees);
    }
    Ok(RandomForestModel {
        schema: schema.clone(),
        hyper: hyper.clone(),
        dim,
        trees,
    })
}

/// Mean leaf probability vector over a topic's trees.
fn forest_proba(trees: &[DecisionTree], x: &SparseVector) -> Vec<f64> {
    let classes = trees[0].n_classes;
    let mut acc = vec![0.0; classes];
    for tree in trees {
        for (a, p) in acc.iter_mut().zip(tree.predict_proba(x)) {
            *a += p;
        }
    }
    for a in acc.iter_mut() {
        *a /= trees.len() as f64;
    }
    acc
}

/// Scores per schema: class probabilities (single/multi-output) or
/// probability margins `p(active) - p(inactive)` per topic (multi-label).
fn scores_from_probas(schema: &TaskSchema, per_topic: Vec<Vec<f64>>) -> Vec<f64> {
    match schema.kind {
        TaskKind::MultiLabel { .. } => per_topic.iter().map(|p| p[1] - p[0]).collect(),
        _ => per_topic.into_iter().flatten().collect(),
    }
}

pub fn forest_predict(model: &RandomForestModel, x: &SparseVector) -> Prediction {
    let per_topic: Vec<Vec<f64>> = model
        .trees
        .iter()
        .map(|trees| forest_proba(trees, x))
        .collect();
    let scores = scores_from_probas(&model.schema, per_topic);
    Prediction {
        labels: labels_from_scores(&model.schema, &scores),
        scores,
    }
}

/// Fits the single-tree baseline (all features considered at each split).
pub fn tree_model_train(
    x: &[SparseVector],
    y: &[Labels],
    schema: &TaskSchema,
    weights: &ClassWeights,
    hyper: &TreeHyper,
    seed: u64,
) -> Result<TreeModel> {
    validate_rows(x, y)?;
    let dim = x[0].dim;
    let classes = schema.classes_per_topic();
    let mut trees = Vec::with_capacity(schema.n_topics());
    for topic in 0..schema.n_topics() {
        let targets = per_topic_targets(schema, y, topic);
        let sw = per_topic_weights(weights, &targets, topic);
        let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(seed, topic, 0));
        trees.push(tree_train(x, &targets, &sw, classes, hyper, &mut rng));
    }
    Ok(TreeModel {
        schema: schema.clone(),
        hyper: hyper.clone(),
        seed,
        dim,
        trees,
    })
}

pub fn tree_model_predict(model: &TreeModel, x: &SparseVector) -> Prediction {
    let per_topic: Vec<Vec<f64>> = model.trees.iter().map(|t| t.predict_proba(x)).collect();
    let scores = scores_from_probas(&model.schema, per_topic);
    Prediction {
        labels: labels_from_scores(&model.schema, &scores),
        scores,
    }
}
