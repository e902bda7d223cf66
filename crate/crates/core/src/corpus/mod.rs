//! Corpus records, deterministic splits and JSONL files.

mod lint;
mod stats;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::labels::StanceLabel;
use crate::lang::Language;

pub use lint::{lint_records, LintFinding, LintKind};
pub use stats::{compute_stats, render_policy_chart, DatasetStats, LanguageStats, PolicyShare};
pub use text::{anonymize, make_topic, parse_topic_overrides, scrub_policy_mentions, turkish_genitive};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{language} corpus has {found} records, fewer than the {required} required for its test split")]
    TooFewRecords { language: Language, found: usize, required: usize },
    #[error("split ratios must be non-negative and sum to 1 (got {0:?})")]
    InvalidPlan([f64; 3]),
    #[error("line {line}: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Dev,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Test, Split::Dev];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Dev => "dev",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub id: String,
    #[serde(rename = "lang")]
    pub language: Language,
    pub topic: String,
    pub comment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment_raw: Option<String>,
    pub stance: StanceLabel,
    pub policy: String,
    pub policy_superset_id: u32,
    pub split: Split,
}

/// First 16 hex digits of sha256 over language, article and comment index.
pub fn record_id(language: Language, article_title: &str, comment_index: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(language.code().as_bytes());
    hasher.update([0x1f]);
    hasher.update(article_title.as_bytes());
    hasher.update([0x1f]);
    hasher.update(comment_index.to_string().as_bytes());
    hex::encode(hasher.finalize())[..16].to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub test: f64,
    pub dev: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.80, test: 0.15, dev: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitPlan {
    pub ratios: SplitRatios,
    pub seed: u64,
    pub tr_min_test: usize,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self { ratios: SplitRatios::default(), seed: 0, tr_min_test: 200 }
    }
}

impl SplitPlan {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let r = self.ratios;
        let all = [r.train, r.test, r.dev];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(CorpusError::InvalidPlan(all));
        }
        Ok(())
    }

    /// Test and dev sizes for `n` records of `language`.
    pub fn sizes(&self, language: Language, n: usize) -> Result<(usize, usize), CorpusError> {
        self.validate()?;
        let mut test = (self.ratios.test * n as f64).round() as usize;
        if language == Language::Tr {
            if n < self.tr_min_test {
                return Err(CorpusError::TooFewRecords { language, found: n, required: self.tr_min_test });
            }
            test = test.max(self.tr_min_test);
        }
        let test = test.min(n);
        let dev = ((self.ratios.dev * n as f64).round() as usize).min(n - test);
        Ok((test, dev))
    }
}

fn shuffle_key(seed: u64, id: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(id.as_bytes());
    hasher.finalize().into()
}

/// Orders each language's records by a seeded hash of their id, then cuts
/// test, dev and train in that order.
pub fn assign_splits(records: &mut [CorpusRecord], plan: &SplitPlan) -> Result<(), CorpusError> {
    let mut by_language: BTreeMap<Language, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_language.entry(r.language).or_default().push(i);
    }
    for (language, mut indices) in by_language {
        let (test, dev) = plan.sizes(language, indices.len())?;
        indices.sort_by_cached_key(|&i| (shuffle_key(plan.seed, &records[i].id), records[i].id.clone()));
        for (rank, i) in indices.into_iter().enumerate() {
            records[i].split = if rank < test {
                Split::Test
            } else if rank < test + dev {
                Split::Dev
            } else {
                Split::Train
            };
        }
    }
    Ok(())
}

/// One JSON object per line. `include_raw = false` drops `comment_raw`.
pub fn emit_jsonl(records: &[CorpusRecord], path: &Path, include_raw: bool) -> Result<(), CorpusError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_jsonl(records, &mut out, include_raw)?;
    out.flush()?;
    Ok(())
}

pub fn write_jsonl<W: Write>(records: &[CorpusRecord], out: &mut W, include_raw: bool) -> Result<(), CorpusError> {
    for r in records {
        let line = if include_raw || r.comment_raw.is_none() {
            serde_json::to_string(r)
        } else {
            serde_json::to_string(&CorpusRecord { comment_raw: None, ..r.clone() })
        }
        .expect("records serialize");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn load_jsonl(path: &Path) -> Result<Vec<CorpusRecord>, CorpusError> {
    read_jsonl(BufReader::new(File::open(path)?))
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| CorpusError::SchemaViolation { line: i + 1, message: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(language: Language, i: usize) -> CorpusRecord {
        CorpusRecord {
            id: record_id(language, "Article", i),
            language,
            topic: "Deletion of Article".into(),
            comment: format!("comment {i}"),
            comment_raw: None,
            stance: StanceLabel::Keep,
            policy: "Wikipedia:Notability".into(),
            policy_superset_id: 0,
            split: Split::Train,
        }
    }

    fn counts(records: &[CorpusRecord]) -> [usize; 3] {
        let c = |s| records.iter().filter(|r| r.split == s).count();
        [c(Split::Train), c(Split::Test), c(Split::Dev)]
    }

    #[test]
    fn en_split_shape_and_determinism() {
        let mut a: Vec<_> = (0..1000).map(|i| record(Language::En, i)).collect();
        let mut b = a.clone();
        b.reverse();
        assign_splits(&mut a, &SplitPlan::with_seed(7)).unwrap();
        assign_splits(&mut b, &SplitPlan::with_seed(7)).unwrap();
        assert_eq!(counts(&a), [800, 150, 50]);
        let map_a: BTreeMap<_, _> = a.iter().map(|r| (r.id.clone(), r.split)).collect();
        let map_b: BTreeMap<_, _> = b.iter().map(|r| (r.id.clone(), r.split)).collect();
        assert_eq!(map_a, map_b);
        let mut c = a.clone();
        assign_splits(&mut c, &SplitPlan::with_seed(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tr_minimum_test_size() {
        let mut recs: Vec<_> = (0..930).map(|i| record(Language::Tr, i)).collect();
        assign_splits(&mut recs, &SplitPlan::with_seed(1)).unwrap();
        let [train, test, dev] = counts(&recs);
        assert_eq!(test, 200);
        assert_eq!(train + test + dev, 930);
        assert!((46..=47).contains(&dev));
        let mut small: Vec<_> = (0..150).map(|i| record(Language::Tr, i)).collect();
        assert!(matches!(
            assign_splits(&mut small, &SplitPlan::with_seed(1)),
            Err(CorpusError::TooFewRecords { found: 150, .. })
        ));
    }

    #[test]
    fn invalid_ratios_rejected() {
        let plan = SplitPlan { ratios: SplitRatios { train: 0.8, test: 0.15, dev: 0.1 }, ..SplitPlan::default() };
        assert!(plan.validate().is_err());
    }

    #[test]
    fn jsonl_round_trip_and_schema() {
        let recs: Vec<_> = (0..3).map(|i| record(Language::De, i)).collect();
        let mut buf = Vec::new();
        write_jsonl(&recs, &mut buf, true).unwrap();
        assert_eq!(read_jsonl(buf.as_slice()).unwrap(), recs);
        assert!(read_jsonl("".as_bytes()).unwrap().is_empty());

        let line = String::from_utf8(buf).unwrap().lines().next().unwrap().replace("\"keep\"", "\"abstain\"");
        let bad = format!("\n{line}\n");
        match read_jsonl(bad.as_bytes()) {
            Err(CorpusError::SchemaViolation { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let extra = r#"{"id":"x","lang":"en","topic":"t","comment":"c","stance":"keep","policy":"p","policy_superset_id":0,"split":"train","user":"A"}"#;
        assert!(matches!(read_jsonl(extra.as_bytes()), Err(CorpusError::SchemaViolation { line: 1, .. })));
    }

    #[test]
    fn field_names_match_schema() {
        let mut r = record(Language::En, 0);
        r.comment_raw = Some("raw".into());
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        let mut expected =
            ["id", "lang", "topic", "comment", "comment_raw", "stance", "policy", "policy_superset_id", "split"];
        expected.sort();
        assert_eq!(keys, expected);
    }

    #[test]
    fn ids_are_stable() {
        assert_eq!(record_id(Language::En, "A", 0), record_id(Language::En, "A", 0));
        assert_ne!(record_id(Language::En, "A", 0), record_id(Language::De, "A", 0));
        assert_eq!(record_id(Language::En, "A", 0).len(), 16);
    }
}
