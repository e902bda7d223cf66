//! Languages covered by the corpus and the per-language text conventions
//! (casing, namespace names, date formats) that the rest of the crate needs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A Wikipedia language edition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    De,
    Tr,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::En, Language::De, Language::Tr];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
            Language::Tr => "tr",
        }
    }

    /// Local name of the project namespace (namespace 4).
    pub fn project_namespace(self) -> &'static str {
        match self {
            Language::En | Language::De => "Wikipedia",
            Language::Tr => "Vikipedi",
        }
    }

    /// Namespace aliases that MediaWiki expands to [`Self::project_namespace`].
    pub fn project_aliases(self) -> &'static [&'static str] {
        match self {
            Language::En | Language::De => &["WP", "Wikipedia", "Project"],
            Language::Tr => &["VP", "Vikipedi", "Project", "WP", "Wikipedia"],
        }
    }

    /// Lowercases with Turkish dotted/dotless i rules applied for `tr` only.
    pub fn lowercase(self, text: &str) -> String {
        match self {
            Language::Tr => turkish_lowercase(text),
            _ => text.to_lowercase(),
        }
    }

    /// Earliest archive year covered for this language.
    pub fn first_year(self) -> u16 {
        match self {
            Language::Tr => 2006,
            _ => 2005,
        }
    }
}

/// Last archive year covered by the corpus.
pub const LAST_YEAR: u16 = 2022;
/// First archive year accepted by any language.
pub const FIRST_YEAR: u16 = 2005;

pub fn turkish_lowercase(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            'I' => out.push('ı'),
            'İ' => out.push('i'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unsupported language code `{0}` (expected en, de or tr)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "de" => Ok(Language::De),
            "tr" => Ok(Language::Tr),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}

/// Normalizes a wiki page title the way MediaWiki does for lookups:
/// underscores become spaces, runs of whitespace collapse, a leading colon and
/// any `#fragment` are dropped, project-namespace aliases are expanded and the
/// first letter of the page name is uppercased.
pub fn normalize_title(language: Language, raw: &str) -> String {
    let mut title = raw.replace('_', " ");
    if let Some(hash) = title.find('#') {
        title.truncate(hash);
    }
    let title = title.split_whitespace().collect::<Vec<_>>().join(" ");
    let title = title.trim_start_matches(':').trim();
    if title.is_empty() {
        return String::new();
    }
    match title.split_once(':') {
        Some((ns, rest)) => {
            let ns_trim = ns.trim();
            let expanded = language
                .project_aliases()
                .iter()
                .find(|alias| alias.eq_ignore_ascii_case(ns_trim))
                .map(|_| language.project_namespace());
            match expanded {
                Some(ns) => format!("{}:{}", ns, upper_first(language, rest.trim())),
                None => upper_first(language, title),
            }
        }
        None => upper_first(language, title),
    }
}

fn upper_first(language: Language, s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        None => String::new(),
        Some(first) => {
            let mut out = String::with_capacity(s.len());
            match (language, first) {
                (Language::Tr, 'i') => out.push('İ'),
                (Language::Tr, 'ı') => out.push('I'),
                _ => out.extend(first.to_uppercase()),
            }
            out.push_str(chars.as_str());
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turkish_casing_is_explicit() {
        assert_eq!(Language::Tr.lowercase("İstanbul IRMAK"), "istanbul ırmak");
        assert_eq!(Language::En.lowercase("ISTANBUL"), "istanbul");
    }

    #[test]
    fn titles_expand_project_aliases() {
        assert_eq!(normalize_title(Language::En, "WP:NOTE"), "Wikipedia:NOTE");
        assert_eq!(normalize_title(Language::En, "wp:note#Section"), "Wikipedia:Note");
        assert_eq!(
            normalize_title(Language::Tr, "VP:kayda_değerlik"),
            "Vikipedi:Kayda değerlik"
        );
        assert_eq!(normalize_title(Language::De, ":foo  bar"), "Foo bar");
        assert_eq!(normalize_title(Language::En, "Wikipedia:Notability"), "Wikipedia:Notability");
    }

    #[test]
    fn language_parses() {
        assert_eq!("TR".parse::<Language>().unwrap(), Language::Tr);
        assert!("fr".parse::<Language>().is_err());
    }
}
