//! Confusion matrices, Matthews Correlation Coefficient and evaluation
//! reports.
//!
//! Three MCC variants cover the task schemas: the binary formula, the
//! multiclass R_k statistic, and a macro average of per-topic binary MCCs
//! for multi-label outputs. Any degenerate denominator yields 0 by
//! convention, so reported values always lie in [-1, 1] and are never NaN.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Labels, TaskKind, TaskSchema};
use crate::error::{Error, Result};

/// C×C counts; rows are true classes, columns predicted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: usize) -> Self {
        Self {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_counts(counts: Vec<Vec<usize>>) -> Self {
        let c = counts.len();
        assert!(counts.iter().all(|row| row.len() == c), "square matrix");
        Self { counts }
    }

    pub fn record(&mut self, true_class: usize, predicted: usize) {
        self.counts[true_class][predicted] += 1;
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, true_class: usize, predicted: usize) -> usize {
        self.counts[true_class][predicted]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.classes()).map(|k| self.counts[k][k]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.trace() as f64 / total as f64
        }
    }

    fn row_sums(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|r| r.iter().sum::<usize>() as f64)
            .collect()
    }

    fn col_sums(&self) -> Vec<f64> {
        (0..self.classes())
            .map(|j| self.counts.iter().map(|r| r[j] as f64).sum())
            .collect()
    }
}

/// Binary MCC from the four confusion counts.
///
/// `(tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn))`, with 0 returned
/// whenever a factor of the denominator vanishes.
pub fn mcc_binary(tp: usize, tn: usize, fp: usize, fn_: usize) -> f64 {
    let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / denom.sqrt()
}

/// Multiclass MCC (the R_k statistic).
///
/// `(N*tr(C) - t·p) / (sqrt(N^2 - |p|^2) * sqrt(N^2 - |t|^2))` with `t`/`p`
/// the row/column sums; 0 on a degenerate denominator.
pub fn mcc_multiclass(cm: &ConfusionMatrix) -> f64 {
    let n = cm.total() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let t = cm.row_sums();
    let p = cm.col_sums();
    let numer = n * cm.trace() as f64 - t.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
    let dt = n * n - t.iter().map(|x| x * x).sum::<f64>();
    let dp = n * n - p.iter().map(|x| x * x).sum::<f64>();
    if dt <= 0.0 || dp <= 0.0 {
        return 0.0;
    }
    numer / (dp.sqrt() * dt.sqrt())
}

/// Macro-averaged per-topic binary MCC over `K` topics.
///
/// Topics with a degenerate confusion contribute 0 (they are still counted
/// in the average).
pub fn mcc_multilabel(per_topic: &[ConfusionMatrix]) -> f64 {
    if per_topic.is_empty() {
        return 0.0;
    }
    let sum: f64 = per_topic
        .iter()
        .map(|cm| {
            debug_assert_eq!(cm.classes(), 2);
            mcc_binary(cm.count(1, 1), cm.count(0, 0), cm.count(0, 1), cm.count(1, 0))
        })
        .sum();
    sum / per_topic.len() as f64
}

/// Confusion counts of one evaluation, shaped by the task schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ConfusionSummary {
    Multiclass { matrix: ConfusionMatrix },
    PerTopic { matrices: Vec<ConfusionMatrix> },
}

/// Metrics of one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_id: String,
    pub seed: u64,
    pub n_examples: usize,
    pub mcc: f64,
    pub accuracy: f64,
    pub confusion: ConfusionSummary,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A prediction: labels plus raw per-output scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Labels,
    pub scores: Vec<f64>,
}

/// Anything that can classify raw texts under a schema.
pub trait Predictor {
    fn schema(&self) -> &TaskSchema;
    fn predict_batch(&self, texts: &[&str]) -> Result<Vec<Prediction>>;
}

/// Builds confusion counts from gold labels and predictions.
pub fn confusion_from_labels(
    schema: &TaskSchema,
    gold: &[&Labels],
    predicted: &[Labels],
) -> Result<ConfusionSummary> {
    if gold.len() != predicted.len() {
        return Err(Error::SchemaMismatch(format!(
            "{} gold labels vs {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    match schema.kind {
        TaskKind::SingleLabel { classes } => {
            let mut cm = ConfusionMatrix::zeros(classes);
            for (g, p) in gold.iter().zip(predicted) {
                cm.record(g.class_for_topic(0), p.class_for_topic(0));
            }
            Ok(ConfusionSummary::Multiclass { matrix: cm })
        }
        TaskKind::MultiLabel { topics } => {
            let mut cms = vec![ConfusionMatrix::zeros(2); topics];
            for (g, p) in gold.iter().zip(predicted) {
                for (t, cm) in cms.iter_mut().enumerate() {
                    cm.record(g.class_for_topic(t), p.class_for_topic(t));
                }
            }
            Ok(ConfusionSummary::PerTopic { matrices: cms })
        }
        TaskKind::MultiOutput { topics, classes } => {
            let mut cms = vec![ConfusionMatrix::zeros(classes); topics];
            for (g, p) in gold.iter().zip(predicted) {
                for (t, cm) in cms.iter_mut().enumerate() {
                    cm.record(g.class_for_topic(t), p.class_for_topic(t));
                }
            }
            Ok(ConfusionSummary::PerTopic { matrices: cms })
        }
    }
}

/// MCC of a confusion summary: R_k for multiclass, macro binary MCC for
/// multi-label, macro R_k for multi-output.
pub fn mcc_of(confusion: &ConfusionSummary) -> f64 {
    match confusion {
        ConfusionSummary::Multiclass { matrix } => mcc_multiclass(matrix),
        ConfusionSummary::PerTopic { matrices } => {
            if matrices.is_empty() {
                return 0.0;
            }
            if matrices.iter().all(|m| m.classes() == 2) {
                mcc_multilabel(matrices)
            } else {
                matrices.iter().map(mcc_multiclass).sum::<f64>() / matrices.len() as f64
            }
        }
    }
}

/// Accuracy of a confusion summary (mean per-topic accuracy for topic
/// lists).
pub fn accuracy_of(confusion: &ConfusionSummary) -> f64 {
    match confusion {
        ConfusionSummary::Multiclass { matrix } => matrix.accuracy(),
        ConfusionSummary::PerTopic { matrices } => {
            if matrices.is_empty() {
                return 0.0;
            }
            matrices.iter().map(ConfusionMatrix::accuracy).sum::<f64>() / matrices.len() as f64
        }
    }
}

/// Runs a predictor over a labeled corpus and assembles the report.
pub fn evaluate(model: &dyn Predictor, corpus: &Corpus, model_id: &str, seed: u64) -> Result<EvalReport> {
    if corpus.schema() != model.schema() {
        return Err(Error::SchemaMismatch(format!(
            "model schema {:?} vs corpus schema {:?}",
            model.schema().kind,
            corpus.schema().kind
        )));
    }
    let texts: Vec<&str> = corpus.texts().collect();
    let predictions = model.predict_batch(&texts)?;
    let gold: Vec<&Labels> = corpus.examples().iter().map(|e| &e.labels).collect();
    let predicted: Vec<Labels> = predictions.into_iter().map(|p| p.labels).collect();
    let confusion = confusion_from_labels(corpus.schema(), &gold, &predicted)?;
    Ok(EvalReport {
        model_id: model_id.to_string(),
        seed,
        n_examples: corpus.len(),
        mcc: mcc_of(&confusion),
        accuracy: accuracy_of(&confusion),
        confusion,
    })
}

/// Renders a model × task MCC grid as an aligned text table.
pub fn render_grid(task_names: &[&str], rows: &[(String, Vec<Option<f64>>)]) -> String {
    let name_width = rows
        .iter()
        .map(|(n, _)| n.len())
        .chain(["Model".len()])
        .max()
        .unwrap_or(5);
    let col_width = task_names.iter().map(|t| t.len().max(6)).collect::<Vec<_>>();
    let mut out = String::new();
    out.push_str(&format!("{:<name_width$}", "Model"));
    for (t, w) in task_names.iter().zip(&col_width) {
        out.push_str(&format!("  {t:>w$}"));
    }
    out.push('\n');
    out.push_str(&"-".repeat(name_width + col_width.iter().map(|w| w + 2).sum::<usize>()));
    out.push('\n');
    for (name, cells) in rows {
        out.push_str(&format!("{name:<name_width$}"));
        for (cell, w) in cells.iter().zip(&col_width) {
            match cell {
                Some(v) => out.push_str(&format!("  {:>w$.3}", v)),
                None => out.push_str(&format!("  {:>w$}", "-")),
            }
        }
        out.push('\n');
    }
    out
}
