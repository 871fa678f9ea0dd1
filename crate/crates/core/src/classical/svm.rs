//! Class-weighted linear SVM trained with Pegasos-style SGD.
//!
//! Each task schema reduces to independent binary subproblems: one-vs-rest
//! over classes (single-label), one per topic (multi-label), one per
//! topic/class pair (multi-output). Subproblem `j` minimizes
//!
//! `lambda/2 * |w|^2 + 1/N * sum_i w_i * max(0, 1 - y_i (w.x_i + b))`
//!
//! where `w_i` is the class weight of sample `i`'s true class. Steps use
//! `eta_t = 1/(lambda (t + t0))` with `t0 = ceil(1/lambda)` (the shift
//! keeps the first steps bounded), optional projection onto the
//! `1/sqrt(lambda)` ball, and step-weighted iterate averaging
//! (`w_bar = sum t*w_t / sum t`). After every epoch the averaged iterate's
//! objective is measured and the best one seen so far is retained; that
//! retained iterate is the model, so the recorded per-epoch objective is
//! non-increasing. The unregularized bias follows the plain subgradient
//! schedule `1/(t + t0)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassWeights, Labels, TaskKind, TaskSchema};
use crate::error::{Error, Result};
use crate::metrics::Prediction;
use crate::tfidf::SparseVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmHyper {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Predict with the averaged iterate instead of the last one.
    pub average: bool,
    /// Project onto the `1/sqrt(lambda)` ball after each step.
    pub project: bool,
}

impl Default for SvmHyper {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            epochs: 20,
            seed: 0,
            average: true,
            project: true,
        }
    }
}

/// One trained binary subproblem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinaryLinear {
    pub w: Vec<f64>,
    pub b: f64,
}

impl BinaryLinear {
    pub fn score(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.w) + self.b
    }
}

/// One-vs-rest linear SVM over sparse features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub schema: TaskSchema,
    pub hyper: SvmHyper,
    pub dim: usize,
    /// Indexed `topic * classes_per_topic + class` (single class slot per
    /// topic for multi-label).
    pub problems: Vec<BinaryLinear>,
    /// Objective of the predicting iterate after each epoch, averaged over
    /// subproblems (diagnostic).
    pub objective_curve: Vec<f64>,
}

/// `(subproblem count, problems per topic)` for a schema.
fn problem_layout(schema: &TaskSchema) -> (usize, usize) {
    match schema.kind {
        TaskKind::SingleLabel { classes } => (classes, classes),
        TaskKind::MultiLabel { topics } => (topics, 1),
        TaskKind::MultiOutput { topics, classes } => (topics * classes, classes),
    }
}

/// Signed target of a sample for subproblem `(topic, class)`.
fn signed_target(schema: &TaskSchema, labels: &Labels, topic: usize, class: usize) -> f64 {
    let positive = match schema.kind {
        TaskKind::SingleLabel { .. } => labels.class_for_topic(0) == class,
        TaskKind::MultiLabel { .. } => labels.class_for_topic(topic) == 1,
        TaskKind::MultiOutput { .. } => labels.class_for_topic(topic) == class,
    };
    if positive {
        1.0
    } else {
        -1.0
    }
}

/// Loss weight of a sample: the class weight of its true class on `topic`.
fn sample_weight(
    schema: &TaskSchema,
    weights: &ClassWeights,
    labels: &Labels,
    topic: usize,
) -> f64 {
    match schema.kind {
        TaskKind::SingleLabel { .. } => weights.weight(0, labels.class_for_topic(0)),
        _ => weights.weight(topic, labels.class_for_topic(topic)),
    }
}

/// Regularized weighted hinge objective of `(w, b)` on one subproblem.
pub fn svm_objective(
    problem: &BinaryLinear,
    x: &[SparseVector],
    y: &[f64],
    sample_weights: &[f64],
    lambda: f64,
) -> f64 {
    let reg = 0.5 * lambda * problem.w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = x
        .iter()
        .zip(y)
        .zip(sample_weights)
        .map(|((xi, &yi), &wi)| wi * (1.0 - yi * problem.score(xi)).max(0.0))
        .sum();
    reg + hinge / x.len() as f64
}

struct PegasosRun {
    linear: BinaryLinear,
    objective_per_epoch: Vec<f64>,
}

fn pegasos(
    x: &[SparseVector],
    y: &[f64],
    sample_weights: &[f64],
    dim: usize,
    hyper: &SvmHyper,
    rng_seed: u64,
) -> PegasosRun {
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut w_sum = vec![0.0f64; dim];
    let mut b_sum = 0.0f64;
    let mut weight_total = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let radius = 1.0 / hyper.lambda.sqrt();
    let t0 = (1.0 / hyper.lambda).ceil();
    let mut step: u64 = 0;
    let mut best: Option<(f64, BinaryLinear)> = None;
    let mut objective_per_epoch = Vec::with_capacity(hyper.epochs);
    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            step += 1;
            let t_eff = step as f64 + t0;
            let eta = 1.0 / (hyper.lambda * t_eff);
            let margin = y[i] * (x[i].dot_dense(&w) + b);
            let shrink = 1.0 - eta * hyper.lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                let coef = eta * sample_weights[i] * y[i];
                for &(j, xv) in x[i].entries() {
                    w[j] += coef * xv;
                }
                b += sample_weights[i] * y[i] / t_eff;
            }
            if hyper.project {
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > radius {
                    let scale = radius / norm;
                    for v in w.iter_mut() {
                        *v *= scale;
                    }
                }
            }
            if hyper.average {
                let wt = step as f64;
                for (s, &v) in w_sum.iter_mut().zip(&w) {
                    *s += wt * v;
                }
                b_sum += wt * b;
                weight_total += wt;
            }
        }
        let snapshot = if hyper.average {
            BinaryLinear {
                w: w_sum.iter().map(|s| s / weight_total).collect(),
                b: b_sum / weight_total,
            }
        } else {
            BinaryLinear { w: w.clone(), b }
        };
        let obj = svm_objective(&snapshot, x, y, sample_weights, hyper.lambda);
        if best.as_ref().is_none_or(|(prev, _)| obj < *prev) {
            best = Some((obj, snapshot));
        }
        objective_per_epoch.push(best.as_ref().expect("set above").0);
    }
    let (_, linear) = best.expect("at least one epoch");
    PegasosRun {
        linear,
        objective_per_epoch,
    }
}

/// Trains one-vs-rest weighted linear SVMs.
pub fn svm_train(
    x: &[SparseVector],
    y: &[Labels],
    schema: &TaskSchema,
    weights: &ClassWeights,
    hyper: &SvmHyper,
) -> Result<LinearSvmModel> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "svm needs at least 2 rows with matching labels (got {} rows, {} labels)",
            x.len(),
            y.len()
        )));
    }
    let dim = x[0].dim;
    let (n_problems, per_topic) = problem_layout(schema);
    let mut problems = Vec::with_capacity(n_problems);
    let mut curve_acc: Vec<f64> = Vec::new();
    let mut trained = 0usize;
    for p in 0..n_problems {
        let (topic, class) = (p / per_topic, p % per_topic);
        let targets: Vec<f64> = y
            .iter()
            .map(|l| signed_target(schema, l, topic, class))
            .collect();
        let sw: Vec<f64> = y
            .iter()
            .map(|l| sample_weight(schema, weights, l, topic))
            .collect();
        let positives = targets.iter().filter(|&&t| t > 0.0).count();
        if positives == 0 || positives == targets.len() {
            log::warn!(
                "svm subproblem {p} is degenerate (single class); using a constant classifier"
            );
            problems.push(BinaryLinear {
                w: vec![0.0; dim],
                b: if positives == 0 { -1.0 } else { 1.0 },
            });
            continue;
        }
        let run = pegasos(
            x,
            &targets,
            &sw,
            dim,
            hyper,
            hyper
                .seed
                .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(p as u64 + 1)),
        );
        trained += 1;
        if curve_acc.is_empty() {
            curve_acc = run.objective_per_epoch.clone();
        } else {
            for (a, v) in curve_acc.iter_mut().zip(&run.objective_per_epoch) {
                *a += v;
            }
        }
        problems.push(run.linear);
    }
    let objective_curve = if trained == 0 {
        Vec::new()
    } else {
        curve_acc.iter().map(|v| v / trained as f64).collect()
    };
    Ok(LinearSvmModel {
        schema: schema.clone(),
        hyper: hyper.clone(),
        dim,
        problems,
        objective_curve,
    })
}

/// Predicts labels for one feature vector.
///
/// Single-label: argmax of one-vs-rest scores, ties to the lowest class
/// index. Multi-label: strictly positive topic scores activate. Multi-output:
/// per-topic argmax.
pub fn svm_predict(model: &LinearSvmModel, x: &SparseVector) -> Prediction {
    let scores: Vec<f64> = model.problems.iter().map(|p| p.score(x)).collect();
    let labels = labels_from_scores(&model.schema, &scores);
    Prediction { labels, scores }
}

/// Shared decision rule over per-problem scores (multi-label activates on
/// strictly positive score).
pub fn labels_from_scores(schema: &TaskSchema, scores: &[f64]) -> Labels {
    match schema.kind {
        TaskKind::SingleLabel { classes } => Labels::Single(argmax(&scores[..classes])),
        TaskKind::MultiLabel { .. } => Labels::Multi(scores.iter().map(|&s| s > 0.0).collect()),
        TaskKind::MultiOutput { topics, classes } => Labels::PerTopic(
            (0..topics)
                .map(|t| argmax(&scores[t * classes..(t + 1) * classes]))
                .collect(),
        ),
    }
}

/// First index of the maximum (ties resolve to the lowest index).
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TaskSchema;

    fn sv(dim: usize, entries: &[(usize, f64)]) -> SparseVector {
        SparseVector::new(dim, entries.to_vec())
    }

    fn binary_schema() -> TaskSchema {
        TaskSchema::single_label(2)
    }

    #[test]
    fn separable_1d_problem_is_solved() {
        // Brute-force oracle: w=+1, b=0 classifies both points with margin 1,
        // so a separator exists; training must find one as well.
        let x = vec![sv(1, &[(0, 1.0)]), sv(1, &[(0, -1.0)])];
        let y = vec![Labels::Single(1), Labels::Single(0)];
        let schema = binary_schema();
        let weights = ClassWeights::uniform(&schema);
        let model = svm_train(&x, &y, &schema, &weights, &SvmHyper::default()).unwrap();
        assert_eq!(svm_predict(&model, &x[0]).labels, Labels::Single(1));
        assert_eq!(svm_predict(&model, &x[1]).labels, Labels::Single(0));
    }

    #[test]
    fn margin_ge_one_means_zero_hinge() {
        let p = BinaryLinear {
            w: vec![2.0],
            b: 0.0,
        };
        let x = vec![sv(1, &[(0, 1.0)])];
        // score = 2, margin = 2 >= 1 -> hinge 0, objective = reg only.
        let obj = svm_objective(&p, &x, &[1.0], &[1.0], 0.5);
        assert!((obj - 0.5 * 0.5 * 4.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_class_weight_doubles_loss_contribution() {
        let p = BinaryLinear {
            w: vec![0.0],
            b: 0.0,
        };
        let x = vec![sv(1, &[(0, 1.0)])];
        // margin 0 -> hinge 1 per unit weight.
        let base = svm_objective(&p, &x, &[1.0], &[1.0], 0.0);
        let doubled = svm_objective(&p, &x, &[1.0], &[2.0], 0.0);
        assert!((doubled - 2.0 * base).abs() < 1e-12);
    }

    #[test]
    fn constant_positive_bias_predicts_positive() {
        let schema = TaskSchema::multi_label(1);
        let model = LinearSvmModel {
            schema: schema.clone(),
            hyper: SvmHyper::default(),
            dim: 3,
            problems: vec![BinaryLinear {
                w: vec![0.0; 3],
                b: 0.7,
            }],
            objective_curve: vec![],
        };
        let pred = svm_predict(&model, &sv(3, &[]));
        assert_eq!(pred.labels, Labels::Multi(vec![true]));
    }

    #[test]
    fn tie_goes_to_lowest_class() {
        let schema = binary_schema();
        let model = LinearSvmModel {
            schema,
            hyper: SvmHyper::default(),
            dim: 2,
            problems: vec![
                BinaryLinear {
                    w: vec![0.0, 0.0],
                    b: 0.25,
                },
                BinaryLinear {
                    w: vec![0.0, 0.0],
                    b: 0.25,
                },
            ],
            objective_curve: vec![],
        };
        assert_eq!(svm_predict(&model, &sv(2, &[])).labels, Labels::Single(0));
    }

    #[test]
    fn score_matches_hand_dot_product() {
        let p = BinaryLinear {
            w: vec![0.5, -1.0, 2.0],
            b: 0.25,
        };
        let x = sv(3, &[(0, 2.0), (2, 0.5)]);
        // 0.5*2 + 2*0.5 + 0.25 = 2.25
        assert!((p.score(&x) - 2.25).abs() < 1e-12);
    }

    #[test]
    fn objective_curve_is_nonincreasing_on_toy_problem() {
        let x = vec![
            sv(2, &[(0, 1.0)]),
            sv(2, &[(0, 0.8), (1, 0.2)]),
            sv(2, &[(1, 1.0)]),
            sv(2, &[(0, -0.9), (1, 0.1)]),
            sv(2, &[(0, -1.0)]),
            sv(2, &[(1, -1.0)]),
        ];
        let y = vec![
            Labels::Single(1),
            Labels::Single(1),
            Labels::Single(1),
            Labels::Single(0),
            Labels::Single(0),
            Labels::Single(0),
        ];
        let schema = binary_schema();
        let weights = ClassWeights::uniform(&schema);
        let hyper = SvmHyper {
            epochs: 30,
            seed: 3,
            ..Default::default()
        };
        let model = svm_train(&x, &y, &schema, &weights, &hyper).unwrap();
        for pair in model.objective_curve.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-6,
                "objective increased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn degenerate_subproblem_gets_constant_classifier() {
        let x = vec![sv(1, &[(0, 1.0)]), sv(1, &[(0, 0.5)])];
        let y = vec![Labels::Single(0), Labels::Single(0)];
        let schema = binary_schema();
        let weights = ClassWeights::uniform(&schema);
        let model = svm_train(&x, &y, &schema, &weights, &SvmHyper::default()).unwrap();
        assert_eq!(model.problems[1].b, -1.0);
        assert!(model.problems[1].w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn weight_scale_with_matching_lambda_preserves_predictions() {
        // Scaling all class weights by k and lambda by k rescales the whole
        // objective by k; with the same seed the trained model must predict
        // identically.
        let x: Vec<SparseVector> = (0..20)
            .map(|i| {
                let v = (i as f64 - 10.0) / 10.0;
                sv(2, &[(0, v), (1, 0.5 - v * v)])
            })
            .collect();
        let y: Vec<Labels> = (0..20)
            .map(|i| Labels::Single(usize::from(i >= 10)))
            .collect();
        let schema = binary_schema();
        let weights = ClassWeights::uniform(&schema);
        // Projection off: its radius 1/sqrt(lambda) is the one quantity the
        // k-rescaling does not absorb.
        let hyper = SvmHyper {
            lambda: 0.02,
            seed: 9,
            project: false,
            ..Default::default()
        };
        let base = svm_train(&x, &y, &schema, &weights, &hyper).unwrap();
        let k = 3.0;
        let scaled_hyper = SvmHyper {
            lambda: hyper.lambda * k,
            ..hyper.clone()
        };
        let scaled = svm_train(&x, &y, &schema, &weights.scaled(k), &scaled_hyper).unwrap();
        for xi in &x {
            assert_eq!(
                svm_predict(&base, xi).labels,
                svm_predict(&scaled, xi).labels
            );
        }
    }
}
