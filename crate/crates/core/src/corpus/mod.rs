//! Labeled corpora, task schemas, train/validation splitting and class
//! weighting.
//!
//! A [`Corpus`] is an ordered, immutable collection of [`LabeledExample`]s
//! bound to one [`TaskSchema`]. Three schemas cover the benchmark tasks:
//! single-label (one class out of `C`), multi-label (`K` independent binary
//! topics) and multi-output (`K` topics, each with its own `C`-way class).

mod cache;
mod ingest;
mod synth;

pub use cache::{load_cache, save_cache};
pub use ingest::{ingest_csv, write_csv, ColumnMap, RejectedRow};
pub use synth::{domain_shift_benchmark, generate_synthetic, SynthSpec};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which kind of prediction target a task uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskKind {
    /// Exactly one of `classes` labels per example.
    SingleLabel { classes: usize },
    /// `topics` independent binary labels per example.
    MultiLabel { topics: usize },
    /// `topics` targets, each one of `classes` labels.
    MultiOutput { topics: usize, classes: usize },
}

/// A task schema: target kind plus human-readable names.
///
/// Name arity: one per class (single-label), one per topic (multi-label),
/// one per topic/class pair (multi-output).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSchema {
    pub kind: TaskKind,
    pub class_names: Vec<String>,
}

impl TaskSchema {
    pub fn new(kind: TaskKind, class_names: Vec<String>) -> Result<Self> {
        let arity = match kind {
            TaskKind::SingleLabel { classes } => {
                if classes < 2 {
                    return Err(Error::InvalidConfig(
                        "single-label schema needs at least 2 classes".into(),
                    ));
                }
                classes
            }
            TaskKind::MultiLabel { topics } => {
                if topics < 1 {
                    return Err(Error::InvalidConfig(
                        "multi-label schema needs at least 1 topic".into(),
                    ));
                }
                topics
            }
            TaskKind::MultiOutput { topics, classes } => {
                if topics < 1 || classes < 2 {
                    return Err(Error::InvalidConfig(
                        "multi-output schema needs topics >= 1 and classes >= 2".into(),
                    ));
                }
                topics * classes
            }
        };
        if class_names.len() != arity {
            return Err(Error::InvalidConfig(format!(
                "schema expects {} names, got {}",
                arity,
                class_names.len()
            )));
        }
        Ok(Self { kind, class_names })
    }

    /// Schema with generated names (`c0`, `t1`, `t2/c0`, ...).
    pub fn with_default_names(kind: TaskKind) -> Self {
        let class_names = match kind {
            TaskKind::SingleLabel { classes } => (0..classes).map(|c| format!("c{c}")).collect(),
            TaskKind::MultiLabel { topics } => (0..topics).map(|t| format!("t{t}")).collect(),
            TaskKind::MultiOutput { topics, classes } => (0..topics)
                .flat_map(|t| (0..classes).map(move |c| format!("t{t}/c{c}")))
                .collect(),
        };
        Self { kind, class_names }
    }

    pub fn single_label(classes: usize) -> Self {
        Self::with_default_names(TaskKind::SingleLabel { classes })
    }

    pub fn multi_label(topics: usize) -> Self {
        Self::with_default_names(TaskKind::MultiLabel { topics })
    }

    pub fn multi_output(topics: usize, classes: usize) -> Self {
        Self::with_default_names(TaskKind::MultiOutput { topics, classes })
    }

    /// Number of independent prediction targets (1 for single-label).
    pub fn n_topics(&self) -> usize {
        match self.kind {
            TaskKind::SingleLabel { .. } => 1,
            TaskKind::MultiLabel { topics } => topics,
            TaskKind::MultiOutput { topics, .. } => topics,
        }
    }

    /// Number of classes per target (2 for multi-label topics).
    pub fn classes_per_topic(&self) -> usize {
        match self.kind {
            TaskKind::SingleLabel { classes } => classes,
            TaskKind::MultiLabel { .. } => 2,
            TaskKind::MultiOutput { classes, .. } => classes,
        }
    }

    /// Width of a logit vector for this schema.
    pub fn logit_dim(&self) -> usize {
        match self.kind {
            TaskKind::SingleLabel { classes } => classes,
            TaskKind::MultiLabel { topics } => topics,
            TaskKind::MultiOutput { topics, classes } => topics * classes,
        }
    }
}

/// Per-example target under one of the three schemas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Labels {
    /// Single-label class index.
    Single(usize),
    /// Multi-label topic activations.
    Multi(Vec<bool>),
    /// Multi-output class index per topic.
    PerTopic(Vec<usize>),
}

impl Labels {
    /// Checks that the variant and its values fit `schema`.
    pub fn conforms(&self, schema: &TaskSchema) -> bool {
        match (self, schema.kind) {
            (Labels::Single(c), TaskKind::SingleLabel { classes }) => *c < classes,
            (Labels::Multi(v), TaskKind::MultiLabel { topics }) => v.len() == topics,
            (Labels::PerTopic(v), TaskKind::MultiOutput { topics, classes }) => {
                v.len() == topics && v.iter().all(|c| *c < classes)
            }
            _ => false,
        }
    }

    /// Class index for topic `t` (0/1 activation for multi-label).
    pub fn class_for_topic(&self, t: usize) -> usize {
        match self {
            Labels::Single(c) => *c,
            Labels::Multi(v) => usize::from(v[t]),
            Labels::PerTopic(v) => v[t],
        }
    }
}

/// One raw example: an opaque id, its text, and its target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub labels: Labels,
}

/// An immutable labeled dataset bound to a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    schema: TaskSchema,
    examples: Vec<LabeledExample>,
}

impl Corpus {
    /// Builds a corpus, validating every example against `schema`.
    pub fn new(schema: TaskSchema, examples: Vec<LabeledExample>) -> Result<Self> {
        for (i, ex) in examples.iter().enumerate() {
            if ex.text.trim().is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "example {} ('{}') has empty text",
                    i, ex.id
                )));
            }
            if !ex.labels.conforms(&schema) {
                return Err(Error::LabelOutOfRange {
                    row: i,
                    detail: format!("{:?} does not fit schema {:?}", ex.labels, schema.kind),
                });
            }
        }
        Ok(Self { schema, examples })
    }

    pub fn schema(&self) -> &TaskSchema {
        &self.schema
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.examples.iter().map(|e| e.text.as_str())
    }

    /// Per-class example counts, one vector per topic.
    ///
    /// Single-label corpora report one topic of `C` counts; multi-label
    /// report `K` topics of `{absent, present}` counts.
    pub fn class_counts(&self) -> Vec<Vec<usize>> {
        let topics = self.schema.n_topics();
        let classes = self.schema.classes_per_topic();
        let mut counts = vec![vec![0usize; classes]; topics];
        for ex in &self.examples {
            for (t, row) in counts.iter_mut().enumerate() {
                row[ex.labels.class_for_topic(t)] += 1;
            }
        }
        counts
    }

    fn subset(&self, idx: &[usize]) -> Corpus {
        Corpus {
            schema: self.schema.clone(),
            examples: idx.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }
}

/// Train/validation split parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

/// Partitions a corpus into `(train, validation)`.
///
/// Deterministic for a fixed seed. For stratified single-label corpora each
/// class keeps `floor(train_fraction * n_c)` examples in train, then the
/// remaining slots up to `round(train_fraction * n)` are assigned round-robin
/// over classes sorted by name. A class of size one goes entirely to train
/// (with a warning). Both halves preserve the input ordering.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must lie in (0,1), got {}",
            spec.train_fraction
        )));
    }
    let n = corpus.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let single =
        matches!(corpus.schema.kind, TaskKind::SingleLabel { .. });
    let train_idx: Vec<usize> = if spec.stratified && single {
        // Group by class, tagging each class with its display name.
        let mut by_class: BTreeMap<(String, usize), Vec<usize>> = BTreeMap::new();
        for (i, ex) in corpus.examples.iter().enumerate() {
            let c = ex.labels.class_for_topic(0);
            let name = corpus.schema.class_names[c].clone();
            by_class.entry((name, c)).or_default().push(i);
        }
        let mut takes: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut assigned = 0usize;
        for ((name, _), idx) in by_class.iter_mut() {
            idx.shuffle(&mut rng);
            let take = if idx.len() == 1 {
                log::warn!("class '{name}' has a single example; keeping it in train");
                1
            } else {
                (spec.train_fraction * idx.len() as f64).floor() as usize
            };
            assigned += take;
            takes.push((take, idx.clone()));
        }
        let target = (spec.train_fraction * n as f64).round() as usize;
        let mut leftover = target.saturating_sub(assigned);
        while leftover > 0 {
            let mut progressed = false;
            for (take, idx) in takes.iter_mut() {
                if leftover == 0 {
                    break;
                }
                if *take < idx.len() {
                    *take += 1;
                    leftover -= 1;
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
        let mut train: Vec<usize> = Vec::new();
        for (take, idx) in takes {
            train.extend_from_slice(&idx[..take]);
        }
        train
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let take = (spec.train_fraction * n as f64).round() as usize;
        let take = take.clamp(1, n - 1);
        order[..take].to_vec()
    };

    let mut in_train = vec![false; n];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let train: Vec<usize> = (0..n).filter(|&i| in_train[i]).collect();
    let val: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((corpus.subset(&train), corpus.subset(&val)))
}

/// Balancing loss weights, one map per topic.
///
/// `w_c = N / (C_present * n_c)` over the classes that actually occur, so
/// the weighted sample mass per topic stays `N`. Absent classes are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    per_topic: Vec<BTreeMap<usize, f64>>,
}

impl ClassWeights {
    /// Uniform weights (all present classes at 1.0) for `schema`.
    pub fn uniform(schema: &TaskSchema) -> Self {
        let topics = schema.n_topics();
        let classes = schema.classes_per_topic();
        let per_topic = (0..topics)
            .map(|_| (0..classes).map(|c| (c, 1.0)).collect())
            .collect();
        Self { per_topic }
    }

    /// Weight for `(topic, class)`, defaulting to 1.0 when absent.
    pub fn weight(&self, topic: usize, class: usize) -> f64 {
        self.per_topic
            .get(topic)
            .and_then(|m| m.get(&class))
            .copied()
            .unwrap_or(1.0)
    }

    pub fn topic(&self, topic: usize) -> &BTreeMap<usize, f64> {
        &self.per_topic[topic]
    }

    pub fn n_topics(&self) -> usize {
        self.per_topic.len()
    }

    /// Multiplies every weight by `k` (used by scale-invariance checks).
    pub fn scaled(&self, k: f64) -> Self {
        let per_topic = self
            .per_topic
            .iter()
            .map(|m| m.iter().map(|(&c, &w)| (c, w * k)).collect())
            .collect();
        Self { per_topic }
    }
}

/// Computes `w_c = N / (C_present * n_c)` per topic of the schema.
pub fn balanced_class_weights(corpus: &Corpus, schema: &TaskSchema) -> Result<ClassWeights> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if corpus.schema() != schema {
        return Err(Error::SchemaMismatch(
            "corpus schema differs from requested schema".into(),
        ));
    }
    let n = corpus.len() as f64;
    let per_topic = corpus
        .class_counts()
        .into_iter()
        .map(|counts| {
            let present = counts.iter().filter(|&&c| c > 0).count() as f64;
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(cls, &c)| (cls, n / (present * c as f64)))
                .collect()
        })
        .collect();
    Ok(ClassWeights { per_topic })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus_with_counts(counts: &[usize]) -> Corpus {
        let schema = TaskSchema::single_label(counts.len().max(2));
        let mut examples = Vec::new();
        for (c, &k) in counts.iter().enumerate() {
            for i in 0..k {
                examples.push(LabeledExample {
                    id: format!("{c}-{i}"),
                    text: format!("text {c} {i}"),
                    labels: Labels::Single(c),
                });
            }
        }
        Corpus::new(schema, examples).unwrap()
    }

    #[test]
    fn balanced_weights_8_2() {
        let corpus = corpus_with_counts(&[8, 2]);
        let w = balanced_class_weights(&corpus, corpus.schema()).unwrap();
        assert!((w.weight(0, 0) - 0.625).abs() < 1e-12);
        assert!((w.weight(0, 1) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn balanced_weights_9_1() {
        let corpus = corpus_with_counts(&[9, 1]);
        let w = balanced_class_weights(&corpus, corpus.schema()).unwrap();
        assert!((w.weight(0, 0) - 10.0 / 18.0).abs() < 1e-12);
        assert!((w.weight(0, 1) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_weights_symmetric() {
        let corpus = corpus_with_counts(&[5, 5]);
        let w = balanced_class_weights(&corpus, corpus.schema()).unwrap();
        assert_eq!(w.weight(0, 0), 1.0);
        assert_eq!(w.weight(0, 1), 1.0);
    }

    #[test]
    fn weighted_mass_is_preserved() {
        let corpus = corpus_with_counts(&[7, 2, 1]);
        let w = balanced_class_weights(&corpus, corpus.schema()).unwrap();
        let counts = &corpus.class_counts()[0];
        let mass: f64 = counts
            .iter()
            .enumerate()
            .map(|(c, &k)| k as f64 * w.weight(0, c))
            .sum();
        assert!((mass - corpus.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn split_60_40_at_08() {
        let corpus = corpus_with_counts(&[60, 40]);
        let (train, val) = split(&corpus, &SplitSpec::default()).unwrap();
        let tc = train.class_counts();
        let vc = val.class_counts();
        assert_eq!(tc[0], vec![48, 32]);
        assert_eq!(vc[0], vec![12, 8]);
    }

    #[test]
    fn split_single_class_5() {
        let corpus = corpus_with_counts(&[5]);
        let (train, val) = split(&corpus, &SplitSpec::default()).unwrap();
        assert_eq!(train.len(), 4);
        assert_eq!(val.len(), 1);
    }

    #[test]
    fn split_is_deterministic_and_a_partition() {
        let corpus = corpus_with_counts(&[13, 7, 5]);
        let spec = SplitSpec {
            seed: 42,
            ..Default::default()
        };
        let (t1, v1) = split(&corpus, &spec).unwrap();
        let (t2, v2) = split(&corpus, &spec).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(v1, v2);
        assert_eq!(t1.len() + v1.len(), corpus.len());
        let mut ids: Vec<&str> = t1
            .examples()
            .iter()
            .chain(v1.examples())
            .map(|e| e.id.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), corpus.len());
    }

    #[test]
    fn split_singleton_class_lands_in_train() {
        let corpus = corpus_with_counts(&[9, 1]);
        let (train, _) = split(&corpus, &SplitSpec::default()).unwrap();
        assert_eq!(train.class_counts()[0][1], 1);
    }

    #[test]
    fn schema_arity_is_checked() {
        assert!(TaskSchema::new(TaskKind::SingleLabel { classes: 3 }, vec!["a".into()]).is_err());
        assert!(TaskSchema::new(TaskKind::SingleLabel { classes: 1 }, vec!["a".into()]).is_err());
        let ok = TaskSchema::new(
            TaskKind::MultiOutput {
                topics: 2,
                classes: 2,
            },
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn labels_conformance() {
        let s = TaskSchema::single_label(3);
        assert!(Labels::Single(2).conforms(&s));
        assert!(!Labels::Single(3).conforms(&s));
        assert!(!Labels::Multi(vec![true, false, false]).conforms(&s));
        let m = TaskSchema::multi_label(9);
        let mut v = vec![false; 9];
        v[0] = true;
        v[4] = true;
        assert!(Labels::Multi(v).conforms(&m));
    }
}
