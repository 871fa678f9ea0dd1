//! Multinomial naive Bayes on raw term counts with Laplace smoothing.

use serde::{Deserialize, Serialize};

use crate::classical::svm::labels_from_scores;
use crate::corpus::{Labels, TaskKind, TaskSchema};
use crate::error::{Error, Result};
use crate::metrics::Prediction;
use crate::tfidf::SparseVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NbTopic {
    /// `ln(n_c / N)`; `-inf` for classes absent from training.
    pub log_prior: Vec<f64>,
    /// `log_like[c][v] = ln((count_cv + alpha) / (total_c + alpha * V))`.
    pub log_like: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub schema: TaskSchema,
    pub alpha: f64,
    pub dim: usize,
    pub per_topic: Vec<NbTopic>,
}

/// Fits a multinomial model per topic. `x` rows are raw term counts.
pub fn nb_train(
    x: &[SparseVector],
    y: &[Labels],
    schema: &TaskSchema,
    alpha: f64,
) -> Result<NaiveBayesModel> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "nb needs matching rows and labels (got {} rows, {} labels)",
            x.len(),
            y.len()
        )));
    }
    let dim = x[0].dim;
    let n = x.len() as f64;
    let classes = schema.classes_per_topic();
    let mut per_topic = Vec::with_capacity(schema.n_topics());
    for topic in 0..schema.n_topics() {
        let mut class_counts = vec![0usize; classes];
        let mut term_counts = vec![vec![0.0f64; dim]; classes];
        for (xi, yi) in x.iter().zip(y) {
            let c = yi.class_for_topic(topic);
            class_counts[c] += 1;
            for &(j, v) in xi.entries() {
                term_counts[c][j] += v;
            }
        }
        let log_prior = class_counts
            .iter()
            .map(|&k| {
                if k > 0 {
                    (k as f64 / n).ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let log_like = term_counts
            .into_iter()
            .map(|counts| {
                let total: f64 = counts.iter().sum();
                let denom = total + alpha * dim as f64;
                counts
                    .into_iter()
                    .map(|c| ((c + alpha) / denom).ln())
                    .collect()
            })
            .collect();
        per_topic.push(NbTopic {
            log_prior,
            log_like,
        });
    }
    Ok(NaiveBayesModel {
        schema: schema.clone(),
        alpha,
        dim,
        per_topic,
    })
}

/// Per-class log posterior (up to the shared evidence term).
fn log_posterior(topic: &NbTopic, x: &SparseVector) -> Vec<f64> {
    topic
        .log_prior
        .iter()
        .enumerate()
        .map(|(c, &prior)| {
            prior
                + x.entries()
                    .iter()
                    .map(|&(j, v)| v * topic.log_like[c][j])
                    .sum::<f64>()
        })
        .collect()
}

pub fn nb_predict(model: &NaiveBayesModel, x: &SparseVector) -> Prediction {
    let per_topic: Vec<Vec<f64>> = model
        .per_topic
        .iter()
        .map(|t| log_posterior(t, x))
        .collect();
    let scores: Vec<f64> = match model.schema.kind {
        TaskKind::MultiLabel { .. } => per_topic.iter().map(|p| p[1] - p[0]).collect(),
        _ => per_topic.into_iter().flatten().collect(),
    };
    Prediction {
        labels: labels_from_scores(&model.schema, &scores),
        scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TaskSchema;

    fn sv(dim: usize, entries: &[(usize, f64)]) -> SparseVector {
        SparseVector::new(dim, entries.to_vec())
    }

    #[test]
    fn single_doc_per_class_predicts_itself() {
        let x = vec![sv(2, &[(0, 3.0)]), sv(2, &[(1, 3.0)])];
        let y = vec![Labels::Single(0), Labels::Single(1)];
        let schema = TaskSchema::single_label(2);
        let model = nb_train(&x, &y, &schema, 1.0).unwrap();
        assert_eq!(nb_predict(&model, &x[0]).labels, Labels::Single(0));
        assert_eq!(nb_predict(&model, &x[1]).labels, Labels::Single(1));
    }

    #[test]
    fn unseen_terms_stay_finite() {
        let x = vec![sv(3, &[(0, 1.0)]), sv(3, &[(1, 1.0)])];
        let y = vec![Labels::Single(0), Labels::Single(1)];
        let schema = TaskSchema::single_label(2);
        let model = nb_train(&x, &y, &schema, 1.0).unwrap();
        let pred = nb_predict(&model, &sv(3, &[(2, 5.0)]));
        assert!(pred.scores.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn two_class_two_term_posterior_by_hand() {
        // Class 0 trains on "a a b", class 1 on "b b"; vocabulary {a, b}.
        // p(a|0)=3/5, p(b|0)=2/5; p(a|1)=1/4, p(b|1)=3/4; priors 1/2.
        let x = vec![sv(2, &[(0, 2.0), (1, 1.0)]), sv(2, &[(1, 2.0)])];
        let y = vec![Labels::Single(0), Labels::Single(1)];
        let schema = TaskSchema::single_label(2);
        let model = nb_train(&x, &y, &schema, 1.0).unwrap();
        let t = &model.per_topic[0];
        assert!((t.log_like[0][0] - (3.0f64 / 5.0).ln()).abs() < 1e-12);
        assert!((t.log_like[0][1] - (2.0f64 / 5.0).ln()).abs() < 1e-12);
        assert!((t.log_like[1][0] - 0.25f64.ln()).abs() < 1e-12);
        assert!((t.log_like[1][1] - 0.75f64.ln()).abs() < 1e-12);

        // Document "a b": score_0 = ln(0.5*0.6*0.4), score_1 = ln(0.5*0.25*0.75).
        let pred = nb_predict(&model, &sv(2, &[(0, 1.0), (1, 1.0)]));
        assert!((pred.scores[0] - 0.12f64.ln()).abs() < 1e-12);
        assert!((pred.scores[1] - 0.09375f64.ln()).abs() < 1e-12);
        assert_eq!(pred.labels, Labels::Single(0));
    }
}
