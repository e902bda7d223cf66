//! Stance labels and the per-language vote lexicons.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::lang::Language;

const BUNDLED_LEXICON: &str = include_str!("../data/lexicon/stance.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StanceLabel {
    Comment,
    Delete,
    Keep,
    Merge,
}

impl StanceLabel {
    /// Registry order used by every model and report.
    pub const ALL: [StanceLabel; 4] = [
        StanceLabel::Comment,
        StanceLabel::Delete,
        StanceLabel::Keep,
        StanceLabel::Merge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Comment => "comment",
            StanceLabel::Delete => "delete",
            StanceLabel::Keep => "keep",
            StanceLabel::Merge => "merge",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| LexiconError::Syntax { line: 0, message: format!("unknown label `{s}`") })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    NoVote,
    UnknownToken,
    Ambiguous,
}

impl DiscardReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DiscardReason::NoVote => "no_vote",
            DiscardReason::UnknownToken => "unknown_token",
            DiscardReason::Ambiguous => "ambiguous",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("no lexicon entries for language `{0}`")]
    MissingLexicon(Language),
    #[error("variant `{surface}` listed twice for `{language}`")]
    DuplicateVariant { language: Language, surface: String },
    #[error("lexicon line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Qualifiers dropped from the front of a vote before lookup.
pub const QUALIFIERS: &[&str] = &["speedy", "strong", "weak", "schnell", "hızlı"];

const SEPARATORS: &[&str] = &[" or ", "/", ",", " and ", "&", " oder ", " veya ", " ya da ", " und ", " ve "];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceLexicon {
    pub language: Language,
    pub variants: BTreeMap<String, StanceLabel>,
    canonical: BTreeMap<StanceLabel, String>,
}

impl StanceLexicon {
    /// Parses the tab-separated lexicon format, keeping rows for `language`.
    pub fn parse(text: &str, language: Language) -> Result<Self, LexiconError> {
        let mut variants = BTreeMap::new();
        let mut canonical = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [lang, surface, label] = cols[..] else {
                return Err(LexiconError::Syntax {
                    line: i + 1,
                    message: format!("expected 3 tab-separated columns, found {}", cols.len()),
                });
            };
            let lang: Language = lang
                .parse()
                .map_err(|e| LexiconError::Syntax { line: i + 1, message: format!("{e}") })?;
            if lang != language {
                continue;
            }
            let label: StanceLabel = label
                .parse()
                .map_err(|_| LexiconError::Syntax { line: i + 1, message: format!("unknown label `{label}`") })?;
            let surface = language.lowercase(surface);
            if variants.insert(surface.clone(), label).is_some() {
                return Err(LexiconError::DuplicateVariant { language, surface });
            }
            canonical.entry(label).or_insert(surface);
        }
        if StanceLabel::ALL.iter().any(|l| !canonical.contains_key(l)) {
            return Err(LexiconError::MissingLexicon(language));
        }
        Ok(Self { language, variants, canonical })
    }

    pub fn load_file(path: &Path, language: Language) -> Result<Self, LexiconError> {
        Self::parse(&std::fs::read_to_string(path)?, language)
    }

    /// Canonical surface string of `label` in this language.
    pub fn canonical(&self, label: StanceLabel) -> &str {
        &self.canonical[&label]
    }

    pub fn lookup(&self, surface: &str) -> Option<StanceLabel> {
        self.variants.get(surface).copied()
    }

    /// Maps a raw vote to a label or a discard reason.
    pub fn normalize(&self, vote_raw: Option<&str>) -> Result<StanceLabel, DiscardReason> {
        let vote = vote_raw.ok_or(DiscardReason::NoVote)?;
        let cleaned = clean(&self.language.lowercase(vote));
        if cleaned.is_empty() {
            return Err(DiscardReason::NoVote);
        }
        if let Some(label) = self.lookup_qualified(&cleaned) {
            return Ok(label);
        }
        let parts = split_alternatives(&cleaned);
        if parts.len() < 2 {
            return Err(DiscardReason::UnknownToken);
        }
        let mut found: Vec<StanceLabel> = parts.iter().filter_map(|p| self.lookup_qualified(p)).collect();
        found.sort();
        found.dedup();
        match found.len() {
            0 => Err(DiscardReason::UnknownToken),
            1 => Ok(found[0]),
            _ => Err(DiscardReason::Ambiguous),
        }
    }

    fn lookup_qualified(&self, text: &str) -> Option<StanceLabel> {
        self.lookup(strip_qualifiers(text))
    }
}

fn clean(text: &str) -> String {
    text.trim_matches(|c: char| !c.is_alphanumeric())
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn strip_qualifiers(mut text: &str) -> &str {
    loop {
        let before = text;
        for q in QUALIFIERS {
            if let Some(rest) = text.strip_prefix(q) {
                if rest.is_empty() || rest.starts_with(|c: char| c.is_whitespace() || c == '-') {
                    text = rest.trim_start_matches(|c: char| c.is_whitespace() || c == '-');
                }
            }
        }
        if text == before {
            return text;
        }
    }
}

fn split_alternatives(text: &str) -> Vec<String> {
    let mut parts = vec![text.to_string()];
    for sep in SEPARATORS {
        parts = parts
            .iter()
            .flat_map(|p| p.split(sep).map(clean).collect::<Vec<_>>())
            .filter(|p| !p.is_empty())
            .collect();
    }
    parts
}

static BUNDLED: LazyLock<BTreeMap<Language, StanceLexicon>> = LazyLock::new(|| {
    Language::ALL
        .into_iter()
        .map(|l| (l, StanceLexicon::parse(BUNDLED_LEXICON, l).expect("bundled lexicon is valid")))
        .collect()
});

/// The lexicon shipped with the crate.
pub fn load_lexicon(language: Language) -> Result<StanceLexicon, LexiconError> {
    StanceLexicon::parse(BUNDLED_LEXICON, language)
}

/// Normalizes with the bundled lexicon.
pub fn normalize_stance(vote_raw: Option<&str>, language: Language) -> Result<StanceLabel, DiscardReason> {
    BUNDLED[&language].normalize(vote_raw)
}

/// Counts of votes that matched no lexicon entry, for curation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnknownVotes {
    pub counts: BTreeMap<Language, BTreeMap<String, u64>>,
}

impl UnknownVotes {
    pub fn record(&mut self, language: Language, vote: &str) {
        *self.counts.entry(language).or_default().entry(vote.to_string()).or_default() += 1;
    }
}
