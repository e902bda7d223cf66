//! Random and majority baselines, TF-IDF softmax regression and a
//! shared-projection multi-task model.

pub mod features;
pub mod multitask;
pub mod softmax;

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use features::{document_tokens, fit_vocabulary, idf_value, ngrams, tokenize, FeatureVector, Vocabulary, VocabularyConfig, SEPARATOR};
pub use multitask::{
    multitask_gradient, multitask_objective, train_multitask, MultiTaskConfig, MultiTaskGradient, MultiTaskLinearModel,
    MultiTaskLog, TaskSchedule,
};
pub use softmax::{
    argmax, salient_features, softmax_gradient, softmax_in_place, softmax_objective, train_softmax, SalientFeatures,
    SoftmaxHead, TrainConfig, TrainingLog,
};

use crate::corpus::CorpusRecord;
use crate::eval::Task;
use crate::labels::StanceLabel;
use crate::lang::Language;
use crate::scalar::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("no term reaches the document frequency threshold")]
    EmptyVocabulary,
    #[error("feature index out of range: model dimension {expected}, input needs {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("training labels contain fewer than two classes")]
    DegenerateLabels,
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("task ratio must be positive, got {0}:{1}")]
    InvalidRatio(u32, u32),
    #[error("no training records")]
    EmptyInput,
    #[error("model does not predict {0}")]
    MissingTask(&'static str),
    #[error("model format version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("model file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Uniform i.i.d. label indices in `0..n_labels`.
pub fn baseline_random(n_labels: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| if n_labels <= 1 { 0 } else { rng.random_range(0..n_labels) }).collect()
}

/// Most frequent label index; ties go to the lowest index.
pub fn baseline_majority(labels: &[usize], n_labels: usize) -> Option<usize> {
    if labels.is_empty() {
        return None;
    }
    let mut counts = vec![0usize; n_labels.max(labels.iter().max().map_or(0, |m| m + 1))];
    for &y in labels {
        counts[y] += 1;
    }
    let best = *counts.iter().max()?;
    counts.iter().position(|&c| c == best)
}

/// Label predicted by a model, or `Joint` for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTask {
    Stance,
    Policy,
    Joint,
}

impl ModelTask {
    pub fn predicts(self, task: Task) -> bool {
        matches!((self, task), (ModelTask::Joint, _) | (ModelTask::Stance, Task::Stance) | (ModelTask::Policy, Task::Policy))
    }
}

/// Whether policy labels are per-language titles or superset ids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicySpace {
    #[default]
    Local,
    Superset,
}

/// Policy label of a record in `space`.
pub fn policy_label(record: &CorpusRecord, space: PolicySpace) -> String {
    match space {
        PolicySpace::Local => record.policy.clone(),
        PolicySpace::Superset => record.policy_superset_id.to_string(),
    }
}

pub fn record_tokens(record: &CorpusRecord) -> Vec<String> {
    document_tokens(&record.topic, &record.comment, record.language)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub task: ModelTask,
    #[serde(default)]
    pub policy_space: PolicySpace,
    #[serde(default)]
    pub vocabulary: VocabularyConfig,
    #[serde(default)]
    pub multitask: MultiTaskConfig,
}

impl ModelSpec {
    pub fn new(task: ModelTask) -> Self {
        Self { task, policy_space: PolicySpace::Local, vocabulary: VocabularyConfig::default(), multitask: MultiTaskConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", rename_all = "snake_case")]
pub enum ModelBody<T> {
    Single(SoftmaxHead<T>),
    Multitask(MultiTaskLinearModel<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainLog {
    Single(TrainingLog),
    Multitask(MultiTaskLog),
}

/// Versioned container: vocabulary, weights and label registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct LinearTextModel<T> {
    pub format_version: u32,
    pub task: ModelTask,
    pub policy_space: PolicySpace,
    pub languages: Vec<Language>,
    pub seed: u64,
    pub vocabulary: Vocabulary<T>,
    pub body: ModelBody<T>,
}

fn stance_names() -> Vec<String> {
    StanceLabel::ALL.iter().map(|l| l.as_str().to_string()).collect()
}

impl<T: Scalar> LinearTextModel<T> {
    /// Fits the vocabulary and weights on `records`.
    pub fn train(records: &[CorpusRecord], spec: &ModelSpec) -> Result<(Self, TrainLog), ModelError> {
        if records.is_empty() {
            return Err(ModelError::EmptyInput);
        }
        let docs: Vec<Vec<String>> = records.iter().map(record_tokens).collect();
        let vocabulary = Vocabulary::<T>::fit(&docs, spec.vocabulary)?;
        let xs: Vec<FeatureVector<T>> = docs.iter().map(|d| vocabulary.featurize(d)).collect();
        let stance: Vec<usize> = records.iter().map(|r| r.stance.index()).collect();
        let policy_names: Vec<String> = records
            .iter()
            .map(|r| policy_label(r, spec.policy_space))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let policy: Vec<usize> = records
            .iter()
            .map(|r| policy_names.binary_search(&policy_label(r, spec.policy_space)).expect("label collected above"))
            .collect();
        let dim = vocabulary.len();
        let train = &spec.multitask.train;
        let (body, log) = match spec.task {
            ModelTask::Stance => {
                let (h, log) = train_softmax(&xs, &stance, stance_names(), dim, train)?;
                (ModelBody::Single(h), TrainLog::Single(log))
            }
            ModelTask::Policy => {
                let (h, log) = train_softmax(&xs, &policy, policy_names, dim, train)?;
                (ModelBody::Single(h), TrainLog::Single(log))
            }
            ModelTask::Joint => {
                let (m, log) = train_multitask(&xs, &stance, &policy, stance_names(), policy_names, dim, &spec.multitask)?;
                (ModelBody::Multitask(m), TrainLog::Multitask(log))
            }
        };
        let languages = records.iter().map(|r| r.language).collect::<BTreeSet<_>>().into_iter().collect();
        let model = Self {
            format_version: MODEL_FORMAT_VERSION,
            task: spec.task,
            policy_space: spec.policy_space,
            languages,
            seed: train.seed,
            vocabulary,
            body,
        };
        Ok((model, log))
    }

    pub fn featurize(&self, record: &CorpusRecord) -> FeatureVector<T> {
        self.vocabulary.featurize(&record_tokens(record))
    }

    /// Label order of `task`.
    pub fn labels(&self, task: Task) -> Result<&[String], ModelError> {
        if !self.task.predicts(task) {
            return Err(ModelError::MissingTask(task.as_str()));
        }
        Ok(match &self.body {
            ModelBody::Single(h) => &h.labels,
            ModelBody::Multitask(m) => &m.head(task).labels,
        })
    }

    pub fn predict_index(&self, task: Task, x: &FeatureVector<T>) -> Result<usize, ModelError> {
        if !self.task.predicts(task) {
            return Err(ModelError::MissingTask(task.as_str()));
        }
        match &self.body {
            ModelBody::Single(h) => h.predict(x),
            ModelBody::Multitask(m) => m.predict(task, x),
        }
    }

    pub fn predict(&self, task: Task, record: &CorpusRecord) -> Result<String, ModelError> {
        let i = self.predict_index(task, &self.featurize(record))?;
        Ok(self.labels(task)?[i].clone())
    }

    /// Head over vocabulary terms; multi-task heads read the projection instead.
    pub fn head(&self) -> Option<&SoftmaxHead<T>> {
        match &self.body {
            ModelBody::Single(h) => Some(h),
            ModelBody::Multitask(_) => None,
        }
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let version: VersionProbe = serde_json::from_str(text)?;
        if version.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Version { found: version.format_version, expected: MODEL_FORMAT_VERSION });
        }
        let mut model: Self = serde_json::from_str(text)?;
        model.vocabulary.rebuild_index();
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Split;

    #[test]
    fn random_baseline_frequencies() {
        let preds = baseline_random(4, 4000, 11);
        for label in 0..4 {
            let f = preds.iter().filter(|&&p| p == label).count() as f64 / 4000.0;
            assert!((f - 0.25).abs() < 0.02, "{label}: {f}");
        }
        assert!(baseline_random(1, 10, 3).iter().all(|&p| p == 0));
        assert_eq!(baseline_random(4, 50, 5), baseline_random(4, 50, 5));
    }

    #[test]
    fn majority_ties_lowest() {
        assert_eq!(baseline_majority(&[1, 0, 1, 0], 2), Some(0));
        assert_eq!(baseline_majority(&[2, 2, 1], 4), Some(2));
        assert_eq!(baseline_majority(&[], 4), None);
    }

    fn record(i: usize, stance: StanceLabel, comment: &str, policy: &str) -> CorpusRecord {
        CorpusRecord {
            id: format!("{i:016x}"),
            language: Language::En,
            topic: "Deletion of Foo".into(),
            comment: comment.into(),
            comment_raw: None,
            stance,
            policy: policy.into(),
            policy_superset_id: if policy == "Wikipedia:Notability" { 0 } else { 1 },
            split: Split::Train,
        }
    }

    fn toy() -> Vec<CorpusRecord> {
        (0..40)
            .map(|i| match i % 2 {
                0 => record(i, StanceLabel::Delete, "not enough coverage here", "Wikipedia:Notability"),
                _ => record(i, StanceLabel::Keep, "clearly passes the bar", "Wikipedia:Verifiability"),
            })
            .collect()
    }

    #[test]
    fn train_predict_round_trip() {
        let records = toy();
        let mut spec = ModelSpec::new(ModelTask::Stance);
        spec.multitask.train.epochs = 20;
        let (model, _) = LinearTextModel::<f64>::train(&records, &spec).unwrap();
        assert_eq!(model.predict(Task::Stance, &records[0]).unwrap(), "delete");
        assert_eq!(model.predict(Task::Stance, &records[1]).unwrap(), "keep");
        assert!(matches!(model.predict(Task::Policy, &records[0]), Err(ModelError::MissingTask(_))));

        let loaded = LinearTextModel::<f64>::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(loaded.predict(Task::Stance, &records[1]).unwrap(), "keep");
    }

    #[test]
    fn joint_model_predicts_both() {
        let records = toy();
        let mut spec = ModelSpec::new(ModelTask::Joint);
        spec.multitask.hidden = 8;
        spec.multitask.train.epochs = 40;
        spec.multitask.train.batch = 8;
        spec.multitask.train.lr = 0.5;
        spec.policy_space = PolicySpace::Superset;
        let (model, log) = LinearTextModel::<f64>::train(&records, &spec).unwrap();
        let TrainLog::Multitask(log) = log else { panic!("expected multitask log") };
        assert_eq!((log.stance_updates, log.policy_updates), (150, 50));
        assert_eq!(model.labels(Task::Policy).unwrap(), ["0", "1"]);
        assert_eq!(model.predict(Task::Stance, &records[0]).unwrap(), "delete");
        assert_eq!(model.predict(Task::Policy, &records[1]).unwrap(), "1");
    }

    #[test]
    fn rejects_other_versions() {
        let records = toy();
        let (model, _) = LinearTextModel::<f32>::train(&records, &ModelSpec::new(ModelTask::Policy)).unwrap();
        let json = model.to_json().unwrap().replacen("\"format_version\":1", "\"format_version\":9", 1);
        assert!(matches!(LinearTextModel::<f32>::from_json(&json), Err(ModelError::Version { found: 9, .. })));
    }
}
