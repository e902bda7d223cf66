//! Residue checks on built records: traces of editors, timestamps or policy
//! links that anonymization and scrubbing should have removed.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::CorpusRecord;
use crate::lang::Language;
use crate::wikitext::{extract_policy_links, timestamp_pattern, PolicyPrefixSet, USER_LINK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LintKind {
    UserLink,
    UserMention,
    Timestamp,
    Tildes,
    PolicyLink,
    Markup,
    EmptyComment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub id: String,
    #[serde(rename = "lang")]
    pub language: Language,
    pub kind: LintKind,
    pub excerpt: String,
}

static USER_MENTION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(?:user(?:[ _]talk)?|benutzer(?:in)?|kullanıcı)\s*:\s*\S+").expect("user mention regex")
});
static MARKUP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[\[|\]\]|\{\{|\}\}").expect("markup regex"));

fn excerpt(text: &str) -> String {
    text.chars().take(60).collect()
}

/// Findings for every record, in record order.
pub fn lint_records(records: &[CorpusRecord]) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for r in records {
        let mut push = |kind, text: &str| {
            out.push(LintFinding { id: r.id.clone(), language: r.language, kind, excerpt: excerpt(text) });
        };
        let text = r.comment.as_str();
        if text.trim().is_empty() {
            push(LintKind::EmptyComment, "");
            continue;
        }
        if let Some(m) = USER_LINK.find(text) {
            push(LintKind::UserLink, m.as_str());
        } else if let Some(m) = USER_MENTION.find(text) {
            push(LintKind::UserMention, m.as_str());
        }
        if let Some(m) = timestamp_pattern(r.language).find(text) {
            push(LintKind::Timestamp, m.as_str());
        }
        if text.contains("~~~") {
            push(LintKind::Tildes, "~~~");
        }
        let links = extract_policy_links(text, &PolicyPrefixSet::for_language(r.language));
        if let Some(first) = links.first() {
            push(LintKind::PolicyLink, first);
        }
        if let Some(m) = MARKUP.find(text) {
            push(LintKind::Markup, &text[m.start()..]);
        }
    }
    out
}
