//! Detection of editor signatures and signature timestamps.

use std::sync::LazyLock;

use regex::Regex;

use super::Span;
use crate::lang::Language;

/// User-page and user-talk links in any of the three languages.
pub static USER_LINK: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\[\[\s*:?\s*(?:user(?:[ _]talk)?|benutzer(?:in)?(?:[ _]diskussion)?|bd|kullanıcı(?:[ _]mesaj)?|special:contributions/|spezial:beiträge/|özel:katkılar/)\s*:?[^\[\]]*\]\]",
    )
    .expect("user link regex")
});

const EN_MONTHS: &str = "January|February|March|April|May|June|July|August|September|October|November|December";
const DE_MONTHS: &str = "Januar|Jänner|Februar|März|April|Mai|Juni|Juli|August|September|Oktober|November|Dezember|Jan\\.|Feb\\.|Mär\\.|Apr\\.|Jun\\.|Jul\\.|Aug\\.|Sep\\.|Sept\\.|Okt\\.|Nov\\.|Dez\\.";
const TR_MONTHS: &str = "Ocak|Şubat|Mart|Nisan|Mayıs|Haziran|Temmuz|Ağustos|Eylül|Ekim|Kasım|Aralık";
const ZONES: &str = "UTC|CET|CEST|MEZ|MESZ|EET|EEST|TRT|GMT";

fn timestamp_regex(months: &str) -> Regex {
    Regex::new(&format!(
        r"\b\d{{1,2}}[:.]\d{{2}},\s*\d{{1,2}}\.?\s+(?:{months})\s+\d{{4}}\s*\((?:{ZONES})\)"
    ))
    .expect("timestamp regex")
}

static EN_TIMESTAMP: LazyLock<Regex> = LazyLock::new(|| timestamp_regex(EN_MONTHS));
static DE_TIMESTAMP: LazyLock<Regex> = LazyLock::new(|| timestamp_regex(DE_MONTHS));
static TR_TIMESTAMP: LazyLock<Regex> = LazyLock::new(|| timestamp_regex(TR_MONTHS));

pub fn timestamp_pattern(language: Language) -> &'static Regex {
    match language {
        Language::En => &EN_TIMESTAMP,
        Language::De => &DE_TIMESTAMP,
        Language::Tr => &TR_TIMESTAMP,
    }
}

fn is_dash(c: char) -> bool {
    matches!(c, '-' | '–' | '—' | '~')
}

fn is_joiner(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '|' | '·' | '•' | '/' | ',' | ';' | '-' | '–' | '—')
}

/// Signature spans (user links, with any leading dashes, adjacent user links
/// merged) and timestamp spans, each sorted and non-overlapping. Offsets are bytes.
pub fn detect_signatures(comment_text: &str, language: Language) -> (Vec<Span>, Vec<Span>) {
    let text = comment_text;
    let mut signatures: Vec<Span> = Vec::new();
    for m in USER_LINK.find_iter(text) {
        let mut start = m.start();
        let before = &text[..start];
        let trimmed = before.trim_end();
        let dashes = trimmed.len() - trimmed.trim_end_matches(is_dash).len();
        if dashes > 0 {
            start = trimmed.len() - dashes;
        }
        let span = Span::new(start, m.end());
        match signatures.last_mut() {
            Some(prev) if text[prev.end..span.start.max(prev.end)].chars().all(is_joiner) => {
                prev.end = span.end;
            }
            _ => signatures.push(span),
        }
    }
    for span in &mut signatures {
        let covered = &text[span.start..span.end];
        let mut open = covered.matches('(').count() as isize - covered.matches(')').count() as isize;
        while open > 0 && text[span.end..].starts_with(')') {
            span.end += 1;
            open -= 1;
        }
    }

    let mut timestamps: Vec<Span> = timestamp_pattern(language)
        .find_iter(text)
        .map(|m| Span::new(m.start(), m.end()))
        .filter(|ts| !signatures.iter().any(|s| s.overlaps(ts)))
        .collect();
    timestamps.sort();
    (signatures, timestamps)
}
