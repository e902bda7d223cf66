use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;

use crate::lang::Language;
use crate::wikitext::{scan_policy_links, PolicyPrefixSet, Span};

pub(crate) fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn remove_spans(text: &str, spans: &[Span]) -> String {
    let mut sorted: Vec<Span> = spans.iter().copied().filter(|s| s.end <= text.len()).collect();
    sorted.sort();
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for span in sorted {
        if span.end <= pos {
            continue;
        }
        let start = span.start.max(pos);
        out.push_str(&text[pos..start]);
        out.push(' ');
        pos = span.end;
    }
    out.push_str(&text[pos..]);
    out
}

/// Removes policy links (piped or not), bare shortcut tokens such as
/// `WP:NOTE`, and unclosed policy-link openers; collapses whitespace.
pub fn scrub_policy_mentions(text: &str, prefixes: &PolicyPrefixSet) -> String {
    let (links, _) = scan_policy_links(text, prefixes);
    let without_links = remove_spans(text, &links.iter().map(|l| l.span).collect::<Vec<_>>());

    let namespaces: Vec<String> = prefixes.namespaces().map(regex::escape).collect();
    if namespaces.is_empty() {
        return collapse_whitespace(&without_links);
    }
    let bare = Regex::new(&format!(r"(?i)(?:\[\[\s*)?\b(?:{}):[^\s\[\]|]*", namespaces.join("|")))
        .expect("bare shortcut regex");
    let mut spans = Vec::new();
    for m in bare.find_iter(&without_links) {
        let preceded_by_word = without_links[..m.start()]
            .chars()
            .next_back()
            .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '/');
        if preceded_by_word && !m.as_str().starts_with("[[") {
            continue;
        }
        let token = m.as_str();
        let keep_tail = trailing_punctuation(token);
        spans.push(Span::new(m.start(), m.end() - keep_tail));
    }
    collapse_whitespace(&remove_spans(&without_links, &spans))
}

/// Length of sentence punctuation at the end of a bare token.
fn trailing_punctuation(token: &str) -> usize {
    let opens = token.matches('(').count();
    let mut closes = token.matches(')').count();
    let mut len = 0;
    for c in token.chars().rev() {
        let strip = match c {
            '.' | ',' | ';' | '!' | '?' | '"' | '\'' | ':' => true,
            ')' if closes > opens => {
                closes -= 1;
                true
            }
            _ => false,
        };
        if !strip {
            break;
        }
        len += c.len_utf8();
    }
    len
}

/// Removes the given spans and collapses whitespace.
pub fn anonymize(text: &str, spans: &[Span]) -> String {
    collapse_whitespace(&remove_spans(text, spans))
}

/// Turkish genitive suffix for a proper noun, apostrophe included.
pub fn turkish_genitive(title: &str) -> String {
    let lowered = Language::Tr.lowercase(title);
    let letters: Vec<char> = lowered.chars().filter(|c| c.is_alphabetic()).collect();
    let is_vowel = |c: &char| "aeıioöuü".contains(*c);
    let last_vowel = letters.iter().rev().find(|c| is_vowel(c)).copied().unwrap_or('e');
    let ends_in_vowel = letters.last().is_some_and(is_vowel);
    let vowel = match last_vowel {
        'a' | 'ı' => 'ı',
        'e' | 'i' => 'i',
        'o' | 'u' => 'u',
        _ => 'ü',
    };
    let buffer = if ends_in_vowel { "n" } else { "" };
    format!("'{buffer}{vowel}n")
}

/// Topic string for an article; an override for the exact title wins.
pub fn make_topic(article_title: &str, language: Language, overrides: Option<&BTreeMap<String, String>>) -> String {
    if let Some(topic) = overrides.and_then(|o| o.get(article_title)) {
        return topic.clone();
    }
    match language {
        Language::En => format!("Deletion of {article_title}"),
        Language::De => format!("Löschung von {article_title}"),
        Language::Tr => format!("{article_title}{} silinmesi", turkish_genitive(article_title)),
    }
}

static OVERRIDE_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^([^\t]+)\t(.+)$").expect("override regex"));

/// Tab-separated `title, topic` lines; `#` comments.
pub fn parse_topic_overrides(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| OVERRIDE_LINE.captures(l).map(|c| (c[1].trim().to_string(), c[2].trim().to_string())))
        .collect()
}
