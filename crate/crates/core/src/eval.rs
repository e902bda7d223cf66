//! Confusion matrices, F1 and accuracy, and the evaluation report format.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Tolerance used when a report's metrics are re-derived from its matrix.
pub const REPORT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("gold has {gold} labels, predictions have {predicted}")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("label `{0}` is not in the label order")]
    UnknownLabel(String),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
}

/// Rows are gold labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let c = labels.len();
        Self { labels, counts: vec![vec![0; c]; c] }
    }

    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        Self { labels, counts }
    }

    /// Builds from label indices into `labels`.
    pub fn from_indices(labels: Vec<String>, gold: &[usize], predicted: &[usize]) -> Result<Self, EvalError> {
        if gold.len() != predicted.len() {
            return Err(EvalError::LengthMismatch { gold: gold.len(), predicted: predicted.len() });
        }
        let mut cm = Self::zeros(labels);
        let c = cm.labels.len();
        for (&g, &p) in gold.iter().zip(predicted) {
            if g >= c || p >= c {
                return Err(EvalError::UnknownLabel(g.max(p).to_string()));
            }
            cm.counts[g][p] += 1;
        }
        Ok(cm)
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    fn is_well_formed(&self) -> bool {
        let c = self.labels.len();
        self.counts.len() == c && self.counts.iter().all(|r| r.len() == c)
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.labels.iter().map(String::len).max().unwrap_or(0).max(8);
        write!(f, "{:>width$}", "")?;
        for l in &self.labels {
            write!(f, " {l:>width$}")?;
        }
        writeln!(f)?;
        for (l, row) in self.labels.iter().zip(&self.counts) {
            write!(f, "{l:>width$}")?;
            for v in row {
                write!(f, " {v:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Counts gold/predicted pairs under the given label order.
pub fn confusion<L: AsRef<str>>(gold: &[L], predicted: &[L], labels: &[L]) -> Result<ConfusionMatrix, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::LengthMismatch { gold: gold.len(), predicted: predicted.len() });
    }
    let names: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_ref(), i)).collect();
    let lookup = |l: &L| index.get(l.as_ref()).copied().ok_or_else(|| EvalError::UnknownLabel(l.as_ref().to_string()));
    let mut cm = ConfusionMatrix::zeros(names);
    for (g, p) in gold.iter().zip(predicted) {
        cm.counts[lookup(g)?][lookup(p)?] += 1;
    }
    Ok(cm)
}

fn ratio<T: Scalar>(num: u64, den: u64) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::of(num as f64) / T::of(den as f64)
    }
}

/// F1 per label in matrix order; zero wherever a denominator vanishes.
pub fn per_label_f1<T: Scalar>(cm: &ConfusionMatrix) -> Vec<T> {
    (0..cm.num_labels())
        .map(|i| {
            let tp = cm.counts[i][i];
            let precision: T = ratio(tp, cm.col_sum(i));
            let recall: T = ratio(tp, cm.row_sum(i));
            if precision + recall == T::zero() {
                T::zero()
            } else {
                T::of(2.0) * precision * recall / (precision + recall)
            }
        })
        .collect()
}

/// Mean F1 over every label in the matrix, including labels never seen.
pub fn macro_f1<T: Scalar>(cm: &ConfusionMatrix) -> Result<T, EvalError> {
    if cm.num_labels() == 0 || cm.total() == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let f1 = per_label_f1::<T>(cm);
    Ok(f1.iter().copied().sum::<T>() / T::of_usize(f1.len()))
}

pub fn accuracy<T: Scalar>(cm: &ConfusionMatrix) -> Result<T, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    Ok(ratio(cm.trace(), cm.total()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Stance,
    Policy,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Stance => "stance",
            Task::Policy => "policy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setup {
    Single,
    Multitask,
    MultilingualSingle,
    MultilingualMultitask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub schema_version: u32,
    pub task: Task,
    /// Language code, or `multi` for pooled evaluation.
    pub language: String,
    pub setup: Setup,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_label_f1: BTreeMap<String, f64>,
    pub confusion: ConfusionMatrix,
    pub model_id: String,
    pub seed: u64,
}

impl EvalReport {
    pub fn from_confusion(
        task: Task,
        language: &str,
        setup: Setup,
        confusion: ConfusionMatrix,
        model_id: &str,
        seed: u64,
    ) -> Result<Self, EvalError> {
        let per_label = per_label_f1::<f64>(&confusion);
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            task,
            language: language.to_string(),
            setup,
            accuracy: accuracy(&confusion)?,
            macro_f1: macro_f1(&confusion)?,
            per_label_f1: confusion.labels.iter().cloned().zip(per_label).collect(),
            confusion,
            model_id: model_id.to_string(),
            seed,
        })
    }
}

/// Checks a report against its own confusion matrix. Returns every violation.
pub fn validate_report(report: &EvalReport) -> Result<(), Vec<String>> {
    let mut problems = Vec::new();
    let cm = &report.confusion;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        problems.push(format!("schema_version {} (expected {REPORT_SCHEMA_VERSION})", report.schema_version));
    }
    if !cm.is_well_formed() {
        problems.push("confusion matrix is not square over its labels".into());
        return Err(problems);
    }
    if report.task == Task::Stance && cm.num_labels() != 4 {
        problems.push(format!("stance report has {} labels, expected 4", cm.num_labels()));
    }
    let keys: Vec<&String> = report.per_label_f1.keys().collect();
    let mut labels: Vec<&String> = cm.labels.iter().collect();
    labels.sort();
    if keys != labels {
        problems.push("per_label_f1 keys differ from the matrix labels".into());
    }
    let close = |a: f64, b: f64| (a - b).abs() <= REPORT_TOLERANCE;
    for (label, f1) in cm.labels.iter().zip(per_label_f1::<f64>(cm)) {
        if let Some(&reported) = report.per_label_f1.get(label) {
            if !close(reported, f1) {
                problems.push(format!("per_label_f1[{label}] = {reported}, matrix gives {f1}"));
            }
        }
    }
    if !report.per_label_f1.is_empty() {
        let mean = report.per_label_f1.values().sum::<f64>() / report.per_label_f1.len() as f64;
        if !close(mean, report.macro_f1) {
            problems.push(format!("macro_f1 {} is not the mean of per_label_f1 ({mean})", report.macro_f1));
        }
    }
    match (macro_f1::<f64>(cm), accuracy::<f64>(cm)) {
        (Ok(m), Ok(a)) => {
            if !close(m, report.macro_f1) {
                problems.push(format!("macro_f1 {} differs from the matrix ({m})", report.macro_f1));
            }
            if !close(a, report.accuracy) {
                problems.push(format!("accuracy {} differs from the matrix ({a})", report.accuracy));
            }
        }
        _ => problems.push("confusion matrix is empty".into()),
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn small_confusion() {
        let cm = confusion(&["d", "d", "k"], &["d", "k", "k"], &["d", "k"]).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 1], vec![0, 1]]);
        assert!(matches!(confusion(&["d"], &["d", "k"], &["d", "k"]), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(confusion(&["x"], &["d"], &["d", "k"]), Err(EvalError::UnknownLabel(_))));
    }

    #[test]
    fn perfect_and_empty() {
        let cm = ConfusionMatrix::from_indices(labels(&["a", "b", "c"]), &[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap();
        assert_eq!(per_label_f1::<f64>(&cm), vec![1.0, 1.0, 1.0]);
        assert_eq!(macro_f1::<f64>(&cm).unwrap(), 1.0);
        assert_eq!(accuracy::<f32>(&cm).unwrap(), 1.0);
        let empty = ConfusionMatrix::zeros(labels(&["a"]));
        assert_eq!(macro_f1::<f64>(&empty), Err(EvalError::EmptyMatrix));
        assert_eq!(accuracy::<f64>(&empty), Err(EvalError::EmptyMatrix));
    }

    #[test]
    fn unseen_labels_score_zero_but_count() {
        let cm = ConfusionMatrix::from_indices(labels(&["a", "b", "c", "d"]), &[0, 0], &[0, 0]).unwrap();
        assert_eq!(per_label_f1::<f64>(&cm), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(macro_f1::<f64>(&cm).unwrap(), 0.25);
    }

    #[test]
    fn report_validates_and_detects_tampering() {
        let cm = confusion(&["keep", "delete", "merge", "comment"], &["keep", "delete", "keep", "comment"], &[
            "comment", "delete", "keep", "merge",
        ])
        .unwrap();
        let report = EvalReport::from_confusion(Task::Stance, "en", Setup::Single, cm, "m", 1).unwrap();
        assert_eq!(validate_report(&report), Ok(()));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"setup\":\"single\""));
        let back: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);

        let mut bad = report.clone();
        bad.macro_f1 += 0.01;
        assert!(validate_report(&bad).is_err());
        let mut bad = report;
        bad.confusion.counts[1][2] += 1;
        assert!(validate_report(&bad).unwrap_err().len() >= 2);
    }
}
