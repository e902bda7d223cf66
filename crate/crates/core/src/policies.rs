//! Per-language canonical policy registries.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lang::{normalize_title, Language};

/// Default frequency thresholds.
pub fn default_min_count(language: Language) -> u64 {
    match language {
        Language::En => 100,
        Language::De => 10,
        Language::Tr => 2,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("merge cycle through {0:?}")]
    CycleDetected(Vec<String>),
    #[error("curation line {line}: {message}")]
    Curation { line: usize, message: String },
    #[error("merge parent `{parent}` of `{child}` is not curated as a policy")]
    ParentNotPolicy { child: String, parent: String },
    #[error("min_count must be at least 1")]
    ZeroThreshold,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyPage {
    pub title: String,
    pub language: Language,
    pub full_text: String,
    pub is_policy: bool,
}

/// Manual verdicts and merge edges for one language.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curation {
    pub verdicts: BTreeMap<String, bool>,
    pub merges: BTreeMap<String, String>,
}

impl Curation {
    /// Lines are `verdict(title)=policy|not_policy` or `merge(child)=parent`.
    pub fn parse(text: &str, language: Language) -> Result<Self, PolicyError> {
        let mut curation = Curation::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| PolicyError::Curation { line: i + 1, message: message.to_string() };
            let (head, value) = line.rsplit_once(")=").ok_or_else(|| err("expected `kind(title)=value`"))?;
            let (kind, title) = head.split_once('(').ok_or_else(|| err("expected `kind(title)=value`"))?;
            let title = normalize_title(language, title);
            let value = value.trim();
            match kind.trim() {
                "verdict" => {
                    let verdict = match value {
                        "policy" => true,
                        "not_policy" => false,
                        _ => return Err(err("verdict must be `policy` or `not_policy`")),
                    };
                    curation.verdicts.insert(title, verdict);
                }
                "merge" => {
                    curation.merges.insert(title, normalize_title(language, value));
                }
                other => return Err(err(&format!("unknown entry kind `{other}`"))),
            }
        }
        Ok(curation)
    }

    pub fn load(path: &Path, language: Language) -> Result<Self, PolicyError> {
        Self::parse(&std::fs::read_to_string(path)?, language)
    }

    /// Curation shipped with the crate.
    pub fn bundled(language: Language) -> Self {
        let text = match language {
            Language::En => include_str!("../data/policies/en.curation"),
            Language::De => include_str!("../data/policies/de.curation"),
            Language::Tr => include_str!("../data/policies/tr.curation"),
        };
        Self::parse(text, language).expect("bundled curation parses")
    }

    pub fn is_policy(&self, title: &str) -> bool {
        self.verdicts.get(title).copied().unwrap_or(false)
    }

    /// Pages carrying the curated verdict.
    pub fn pages(&self, language: Language, texts: &BTreeMap<String, String>) -> Vec<PolicyPage> {
        self.verdicts
            .keys()
            .chain(self.merges.keys())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|title| PolicyPage {
                title: title.clone(),
                language,
                full_text: texts.get(title).cloned().unwrap_or_default(),
                is_policy: self.is_policy(title),
            })
            .collect()
    }
}

static LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[\[([^\[\]|#]+)").expect("link regex"));

fn linked_titles(page: &PolicyPage, redirects: &BTreeMap<String, String>) -> BTreeSet<String> {
    LINK.captures_iter(&page.full_text)
        .map(|c| {
            let t = normalize_title(page.language, &c[1]);
            redirects.get(&t).cloned().unwrap_or(t)
        })
        .collect()
}

/// Sub-policy to parent map. An edge needs both a curation entry and a link
/// from the child's page text to the parent; chains are flattened.
pub fn build_merge_map(
    pages: &[PolicyPage],
    curation: &Curation,
    redirects: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, String>, PolicyError> {
    let by_title: BTreeMap<&str, &PolicyPage> = pages.iter().map(|p| (p.title.as_str(), p)).collect();
    let mut edges = BTreeMap::new();
    for (child, parent) in &curation.merges {
        let Some(page) = by_title.get(child.as_str()) else {
            log::warn!(target: "policies", "merge of `{child}` skipped: page text unavailable");
            continue;
        };
        if !linked_titles(page, redirects).contains(parent) {
            log::warn!(target: "policies", "merge of `{child}` skipped: no link to `{parent}`");
            continue;
        }
        edges.insert(child.clone(), parent.clone());
    }

    let mut flat = BTreeMap::new();
    for child in edges.keys() {
        let mut chain = vec![child.clone()];
        let mut current = child;
        while let Some(next) = edges.get(current) {
            if chain.contains(next) {
                chain.push(next.clone());
                return Err(PolicyError::CycleDetected(chain));
            }
            chain.push(next.clone());
            current = next;
        }
        if !curation.is_policy(current) {
            return Err(PolicyError::ParentNotPolicy { child: child.clone(), parent: current.clone() });
        }
        flat.insert(child.clone(), current.clone());
    }
    Ok(flat)
}

/// Titles whose count reaches `min_count`.
pub fn filter_infrequent(counts: &BTreeMap<String, u64>, min_count: u64) -> Result<BTreeSet<String>, PolicyError> {
    if min_count == 0 {
        return Err(PolicyError::ZeroThreshold);
    }
    Ok(counts
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(t, _)| t.clone())
        .collect())
}

/// First policy cited.
pub fn select_primary_policy(targets: &[String]) -> Option<&String> {
    targets.first()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryDiagnostics {
    pub unresolved: u64,
    pub not_policy: u64,
    pub below_threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyRegistry {
    pub language: Language,
    pub canonical: BTreeSet<String>,
    pub redirect_map: BTreeMap<String, String>,
    pub merge_map: BTreeMap<String, String>,
    pub counts: BTreeMap<String, u64>,
    pub min_count: u64,
    #[serde(default)]
    pub diagnostics: RegistryDiagnostics,
}

impl PolicyRegistry {
    /// Follows normalize, redirect and merge; `None` outside the curated set.
    pub fn canonicalize(&self, raw_target: &str) -> Option<String> {
        self.resolve_merged(raw_target).filter(|t| self.canonical.contains(t))
    }

    fn resolve_merged(&self, raw_target: &str) -> Option<String> {
        let normalized = normalize_title(self.language, raw_target);
        if normalized.is_empty() {
            return None;
        }
        let resolved = self.redirect_map.get(&normalized).cloned().unwrap_or(normalized);
        Some(self.merge_map.get(&resolved).cloned().unwrap_or(resolved))
    }

    /// Canonical titles of `raw_targets` in order, unknown ones dropped.
    pub fn canonicalize_all(&self, raw_targets: &[String]) -> Vec<String> {
        raw_targets.iter().filter_map(|t| self.canonicalize(t)).collect()
    }

    /// Builds the registry from the raw policy targets of every parsed comment.
    /// Counts are taken after merging and cover every mention.
    pub fn build(
        language: Language,
        comment_targets: &[Vec<String>],
        redirect_map: BTreeMap<String, String>,
        merge_map: BTreeMap<String, String>,
        curation: &Curation,
        min_count: u64,
    ) -> Result<Self, PolicyError> {
        let mut staging = PolicyRegistry {
            language,
            canonical: curation.verdicts.iter().filter(|(_, &v)| v).map(|(t, _)| t.clone()).collect(),
            redirect_map,
            merge_map,
            counts: BTreeMap::new(),
            min_count,
            diagnostics: RegistryDiagnostics::default(),
        };
        let mut all_counts: BTreeMap<String, u64> = BTreeMap::new();
        for target in comment_targets.iter().flatten() {
            let Some(title) = staging.resolve_merged(target) else {
                staging.diagnostics.unresolved += 1;
                continue;
            };
            if staging.canonical.contains(&title) {
                *all_counts.entry(title).or_default() += 1;
            } else if staging.redirect_map.contains_key(&normalize_title(language, target))
                || curation.verdicts.contains_key(&title)
            {
                staging.diagnostics.not_policy += 1;
            } else {
                staging.diagnostics.unresolved += 1;
            }
        }
        let retained = filter_infrequent(&all_counts, min_count)?;
        staging.diagnostics.below_threshold = all_counts.len() as u64 - retained.len() as u64;
        staging.counts = all_counts.into_iter().filter(|(t, _)| retained.contains(t)).collect();
        staging.merge_map.retain(|_, parent| retained.contains(parent));
        staging.canonical = retained;
        Ok(staging)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }
}
