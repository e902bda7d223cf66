use serde::{Deserialize, Serialize};

use super::Span;
use crate::lang::Language;

/// Link prefixes that mark a policy citation in one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyPrefixSet {
    pub language: Language,
    prefixes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrefixError {
    #[error("prefix set must not be empty")]
    Empty,
    #[error("prefix `{0}` does not start with `[[`")]
    NotALink(String),
}

impl PolicyPrefixSet {
    pub fn new(language: Language, prefixes: Vec<String>) -> Result<Self, PrefixError> {
        if prefixes.is_empty() {
            return Err(PrefixError::Empty);
        }
        if let Some(bad) = prefixes.iter().find(|p| !p.starts_with("[[")) {
            return Err(PrefixError::NotALink(bad.clone()));
        }
        Ok(Self { language, prefixes })
    }

    pub fn for_language(language: Language) -> Self {
        let prefixes = match language {
            Language::En | Language::De => vec!["[[WP:".to_string(), "[[Wikipedia:".to_string()],
            Language::Tr => vec!["[[VP:".to_string(), "[[Vikipedi:".to_string()],
        };
        Self { language, prefixes }
    }

    /// A set matching nothing. Only useful for tests and ablations.
    pub fn empty(language: Language) -> Self {
        Self {
            language,
            prefixes: Vec::new(),
        }
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    /// Namespace part of each prefix (`WP`, `Wikipedia`, ...).
    pub fn namespaces(&self) -> impl Iterator<Item = &str> {
        self.prefixes
            .iter()
            .map(|p| p.trim_start_matches("[[").trim_end_matches(':'))
    }

    /// Length of the prefix matching `text` at its start, ASCII case-insensitively.
    pub(crate) fn match_at(&self, text: &str) -> Option<usize> {
        self.prefixes.iter().find_map(|p| {
            let candidate = text.get(..p.len())?;
            candidate.eq_ignore_ascii_case(p).then_some(p.len())
        })
    }
}

/// A policy link found in a comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyLink {
    pub target: String,
    /// Bytes covered by the whole `[[...]]` link.
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkDiagnostic {
    UnclosedLink { offset: usize },
}

/// Scans `text` left to right for policy links. Unclosed links are skipped
/// and reported.
pub fn scan_policy_links(text: &str, prefixes: &PolicyPrefixSet) -> (Vec<PolicyLink>, Vec<LinkDiagnostic>) {
    let mut links = Vec::new();
    let mut diagnostics = Vec::new();
    let mut pos = 0;
    while let Some(rel) = text[pos..].find("[[") {
        let start = pos + rel;
        let Some(prefix_len) = prefixes.match_at(&text[start..]) else {
            pos = start + 2;
            continue;
        };
        let body_start = start + 2;
        let rest = &text[body_start..];
        let close = rest.find("]]");
        let reopen = rest[prefix_len - 2..].find("[[").map(|i| i + prefix_len - 2);
        match close {
            Some(c) if reopen.is_none_or(|r| c < r) => {
                let inner = &rest[..c];
                let target = inner.split('|').next().unwrap_or(inner).trim();
                links.push(PolicyLink {
                    target: target.to_string(),
                    span: Span::new(start, body_start + c + 2),
                });
                pos = body_start + c + 2;
            }
            _ => {
                diagnostics.push(LinkDiagnostic::UnclosedLink { offset: start });
                pos = start + prefix_len;
            }
        }
    }
    (links, diagnostics)
}

/// Ordered targets of the policy links in `text`; duplicates retained.
pub fn extract_policy_links(text: &str, prefixes: &PolicyPrefixSet) -> Vec<String> {
    let (links, diagnostics) = scan_policy_links(text, prefixes);
    for d in diagnostics {
        let LinkDiagnostic::UnclosedLink { offset } = d;
        log::warn!(target: "wikitext", "unclosed policy link at byte {offset} ignored");
    }
    links.into_iter().map(|l| l.target).collect()
}

/// The first bold-marked vote with the bytes it occupies (markup included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vote {
    pub text: String,
    pub span: Span,
}

/// Finds the first `'''...'''` run and normalizes its content: link brackets
/// and italics removed, lowercased for `language`, outer punctuation trimmed.
pub fn find_vote(text: &str, language: Language) -> Option<Vote> {
    let open = text.find("'''")?;
    let quote_run = text[open..].bytes().take_while(|&b| b == b'\'').count();
    // ''''' opens bold+italic; '''' is a literal apostrophe plus bold
    let content_start = open + if quote_run >= 5 { 5 } else { 3 };
    let close_rel = text[content_start..].find("'''")?;
    let content_end = content_start + close_rel;
    let close_run = text[content_end..].bytes().take_while(|&b| b == b'\'').count();
    let span_end = content_end + close_run.min(5);

    let raw = &text[content_start..content_end];
    if raw.contains('\n') {
        return None;
    }
    let cleaned = strip_links(raw).replace("''", "");
    let lowered = language.lowercase(&cleaned);
    let trimmed = lowered
        .trim_matches(|c: char| !c.is_alphanumeric())
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    (!trimmed.is_empty()).then(|| Vote {
        text: trimmed,
        span: Span::new(open, span_end),
    })
}

/// First bold vote, lowercased; `None` when the text has no bold markup.
pub fn extract_vote(comment_text: &str) -> Option<String> {
    find_vote(comment_text, Language::En).map(|v| v.text)
}

/// Replaces `[[target|label]]` by `label` and `[[target]]` by `target`.
pub(crate) fn strip_links(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("[[") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find("]]") {
            Some(end) => {
                let inner = &after[..end];
                out.push_str(inner.rsplit('|').next().unwrap_or(inner));
                rest = &after[end + 2..];
            }
            None => {
                out.push_str(&rest[start..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en() -> PolicyPrefixSet {
        PolicyPrefixSet::for_language(Language::En)
    }

    #[test]
    fn vote_examples() {
        assert_eq!(
            extract_vote("'''Delete''' blatant advertising. Fails [[WP:NOTE]]."),
            Some("delete".into())
        );
        assert_eq!(extract_vote("no bold markup here"), None);
        assert_eq!(
            extract_vote("'''Speedy keep''' per above, '''not''' convinced"),
            Some("speedy keep".into())
        );
        assert_eq!(extract_vote("'''[[delete]]''' blatant"), Some("delete".into()));
        assert_eq!(extract_vote("'''''Keep.''''' obviously"), Some("keep".into()));
        assert_eq!(extract_vote("'''Keep''"), None);
        assert_eq!(extract_vote("'''...'''"), None);
    }

    #[test]
    fn vote_uses_turkish_casing() {
        let text = "'''SİLİNSİN''' bence";
        let v = find_vote(text, Language::Tr).unwrap();
        assert_eq!(v.text, "silinsin");
        assert_eq!(&text[v.span.start..v.span.end], "'''SİLİNSİN'''");
    }

    #[test]
    fn vote_span_covers_markup() {
        let text = "x '''Keep''' y";
        let v = find_vote(text, Language::En).unwrap();
        assert_eq!(&text[v.span.start..v.span.end], "'''Keep'''");
    }

    #[test]
    fn policy_link_examples() {
        assert_eq!(
            extract_policy_links(
                "Fails [[WP:NOTE]]. The whole article reads like an advertisement",
                &en()
            ),
            vec!["WP:NOTE"]
        );
        assert!(extract_policy_links("plain text", &en()).is_empty());
        assert_eq!(
            extract_policy_links("[[WP:V|verifiability]] and later [[WP:RS]]", &en()),
            vec!["WP:V", "WP:RS"]
        );
    }

    #[test]
    fn policy_links_are_case_insensitive_and_keep_duplicates() {
        assert_eq!(
            extract_policy_links("[[wp:GNG]] [[Wikipedia:Notability]] [[WP:GNG]] [[User:X]]", &en()),
            vec!["wp:GNG", "Wikipedia:Notability", "WP:GNG"]
        );
        let tr = PolicyPrefixSet::for_language(Language::Tr);
        assert_eq!(extract_policy_links("[[VP:KD|kayda değerlik]] [[WP:X]]", &tr), vec!["VP:KD"]);
    }

    #[test]
    fn unclosed_links_are_ignored_with_diagnostic() {
        let (links, diags) = scan_policy_links("see [[WP:NOTE and [[WP:V]] too", &en());
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].target, "WP:V");
        assert_eq!(diags, vec![LinkDiagnostic::UnclosedLink { offset: 4 }]);
        let (links, diags) = scan_policy_links("trailing [[WP:NOTE", &en());
        assert!(links.is_empty());
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn empty_prefix_set_matches_nothing() {
        let none = PolicyPrefixSet::empty(Language::En);
        assert!(extract_policy_links("[[WP:NOTE]] [[Wikipedia:V]]", &none).is_empty());
    }

    #[test]
    fn prefix_set_validation() {
        assert_eq!(PolicyPrefixSet::new(Language::En, vec![]), Err(PrefixError::Empty));
        assert!(matches!(
            PolicyPrefixSet::new(Language::En, vec!["WP:".into()]),
            Err(PrefixError::NotALink(_))
        ));
    }

    #[test]
    fn strip_links_takes_labels() {
        assert_eq!(strip_links("[[a|b]] c [[d]] [[e"), "b c d [[e");
    }
}
