//! Deletion-discussion archive parsing.

mod markup;
mod signature;

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ingest::CachedPage;
use crate::lang::{normalize_title, Language};

pub use markup::{
    extract_policy_links, extract_vote, find_vote, scan_policy_links, LinkDiagnostic, PolicyLink,
    PolicyPrefixSet, PrefixError, Vote,
};
pub use signature::{detect_signatures, timestamp_pattern, USER_LINK};

/// Half-open byte range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawComment {
    pub text: String,
    /// Normalized first bold run, if any.
    pub vote_raw: Option<String>,
    /// Bytes of `text` holding the bold vote markup.
    pub vote_span: Option<Span>,
    pub policy_targets: Vec<String>,
    pub signature_spans: Vec<Span>,
    pub timestamp_spans: Vec<Span>,
}

impl RawComment {
    pub fn from_text(text: &str, language: Language, prefixes: &PolicyPrefixSet) -> Self {
        let vote = find_vote(text, language);
        let (signature_spans, timestamp_spans) = detect_signatures(text, language);
        Self {
            text: text.to_string(),
            vote_raw: vote.as_ref().map(|v| v.text.clone()),
            vote_span: vote.map(|v| v.span),
            policy_targets: extract_policy_links(text, prefixes),
            signature_spans,
            timestamp_spans,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDiscussion {
    pub article_title: String,
    pub language: Language,
    pub comments: Vec<RawComment>,
}

static HEADING: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(={1,6})\s*(.*?)\s*(={1,6})\s*$").expect("heading regex"));
static WIKILINK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[\[([^\[\]|]+)(?:\|[^\[\]]*)?\]\]").expect("wikilink regex"));
static MARKUP_ONLY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:\{\{[^{}]*\}\}|<[^<>]*>|\s)*$").expect("markup-only regex")
});

const NON_ARTICLE_NAMESPACES: &[&str] = &[
    "wikipedia", "wp", "vikipedi", "vp", "user", "user talk", "benutzer", "benutzer diskussion",
    "kullanıcı", "kullanıcı mesaj", "category", "kategorie", "kategori", "file", "datei", "dosya",
    "image", "bild", "template", "vorlage", "şablon", "help", "hilfe", "yardım", "portal",
    "special", "spezial", "özel", "talk", "diskussion", "tartışma", "wikipedia talk",
];

const ARCHIVE_NOTICES: &[&str] = &[
    "the following discussion is an archived debate",
    "the result was",
    "please do not modify it",
    "subsequent comments should be made",
    "the above discussion is preserved",
    "diese seite ist archiviert",
    "bu tartışma arşivlenmiştir",
];

/// Article named by a heading: the target of its first non-project wikilink.
fn heading_article(language: Language, heading: &str) -> Option<String> {
    WIKILINK.captures_iter(heading).find_map(|c| {
        let target = c[1].trim().trim_start_matches(':').trim();
        let namespace = target.split_once(':').map(|(ns, _)| ns.trim().to_lowercase());
        if target.is_empty() || namespace.is_some_and(|ns| NON_ARTICLE_NAMESPACES.contains(&ns.as_str())) {
            return None;
        }
        Some(normalize_title(language, target))
    })
}

fn is_boilerplate(content: &str) -> bool {
    let trimmed = content.trim();
    if trimmed.starts_with("{|") || trimmed.starts_with("|}") || trimmed.starts_with("----") {
        return true;
    }
    if MARKUP_ONLY.is_match(trimmed) {
        return true;
    }
    let lowered = trimmed.to_lowercase();
    ARCHIVE_NOTICES.iter().any(|n| lowered.contains(n))
}

fn list_marker_len(line: &str) -> usize {
    line.bytes().take_while(|b| matches!(b, b'*' | b':' | b'#')).count()
}

struct Section {
    article: String,
    level: usize,
    comments: Vec<Span>,
}

/// Splits the section body lines into comment spans over the page text.
struct CommentBuilder {
    current: Option<Span>,
    previous_blank: bool,
}

impl CommentBuilder {
    fn new() -> Self {
        Self { current: None, previous_blank: true }
    }

    fn flush(&mut self, out: &mut Vec<Span>) {
        if let Some(span) = self.current.take() {
            if !span.is_empty() {
                out.push(span);
            }
        }
    }

    fn line(&mut self, text: &str, offset: usize, out: &mut Vec<Span>) {
        let line = text.trim_end_matches('\r');
        if line.trim().is_empty() {
            self.flush(out);
            self.previous_blank = true;
            return;
        }
        let marker = list_marker_len(line);
        let content = &line[marker..];
        let lead = content.len() - content.trim_start().len();
        let start = offset + marker + lead;
        let end = offset + line.trim_end().len();
        let blank_before = std::mem::replace(&mut self.previous_blank, false);
        if is_boilerplate(content) {
            self.flush(out);
            return;
        }
        match (&mut self.current, marker > 0 || blank_before) {
            (Some(span), false) => span.end = end,
            _ => {
                self.flush(out);
                self.current = Some(Span::new(start, end));
            }
        }
    }
}

/// Parses one archive page into discussions.
pub fn parse_archive(page: &CachedPage) -> Vec<RawDiscussion> {
    let discussions = parse_wikitext(page.language, &page.wikitext);
    if discussions.is_empty() {
        log::warn!(target: "wikitext", "page `{}` ({}) holds no discussions", page.title, page.language);
    }
    discussions
}

/// Parses archive wikitext. A heading linking a nominated article opens a
/// discussion that runs until the next heading at the same or a higher level.
pub fn parse_wikitext(language: Language, wikitext: &str) -> Vec<RawDiscussion> {
    let prefixes = PolicyPrefixSet::for_language(language);
    let mut sections: Vec<Section> = Vec::new();
    let mut open: Option<(Section, CommentBuilder)> = None;

    let mut offset = 0;
    for raw_line in wikitext.split_inclusive('\n') {
        let line = raw_line.trim_end_matches('\n');
        let line_offset = offset;
        offset += raw_line.len();

        if let Some(caps) = HEADING.captures(line.trim_end_matches('\r')) {
            let level = caps[1].len().min(caps[3].len());
            let article = heading_article(language, &caps[2]);
            let closes = match &open {
                Some((section, _)) => article.is_some() || level <= section.level,
                None => false,
            };
            if closes {
                if let Some((mut section, mut builder)) = open.take() {
                    builder.flush(&mut section.comments);
                    sections.push(section);
                }
            }
            if let Some(article) = article {
                open = Some((Section { article, level, comments: Vec::new() }, CommentBuilder::new()));
            } else if let Some((section, builder)) = &mut open {
                // a subheading inside a discussion separates comments
                builder.flush(&mut section.comments);
                builder.previous_blank = true;
            }
            continue;
        }
        if let Some((section, builder)) = &mut open {
            builder.line(line, line_offset, &mut section.comments);
        }
    }
    if let Some((mut section, mut builder)) = open.take() {
        builder.flush(&mut section.comments);
        sections.push(section);
    }

    sections
        .into_iter()
        .map(|s| RawDiscussion {
            article_title: s.article,
            language,
            comments: s
                .comments
                .iter()
                .map(|span| RawComment::from_text(&wikitext[span.start..span.end], language, &prefixes))
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = "\
== [[Alpha]] ==
Nominated because it is an advert. ~~~~
* '''Delete''' fails [[WP:NOTE]]. --[[User:A|A]] 12:01, 5 May 2007 (UTC)
** '''Comment''' really? --[[User:B|B]] 12:05, 5 May 2007 (UTC)
== [[Beta (band)|Beta]] ==
* '''Keep''' notable.
== [[Gamma]] ==
:''The following discussion is an archived debate. Please do not modify it.''
{{afd top}}
* '''Merge''' into [[Alpha]]
  which covers it.
";

    #[test]
    fn sections_become_discussions_in_order() {
        let discussions = parse_wikitext(Language::En, THREE);
        let titles: Vec<_> = discussions.iter().map(|d| d.article_title.as_str()).collect();
        assert_eq!(titles, ["Alpha", "Beta (band)", "Gamma"]);
        assert_eq!(discussions[0].comments.len(), 3);
        assert_eq!(discussions[0].comments[0].vote_raw, None);
        assert_eq!(discussions[0].comments[1].vote_raw.as_deref(), Some("delete"));
        assert_eq!(discussions[0].comments[1].policy_targets, ["WP:NOTE"]);
        assert_eq!(discussions[0].comments[2].text, "'''Comment''' really? --[[User:B|B]] 12:05, 5 May 2007 (UTC)");
        assert_eq!(discussions[1].comments.len(), 1);
    }

    #[test]
    fn boilerplate_skipped_and_continuations_joined() {
        let discussions = parse_wikitext(Language::En, THREE);
        let gamma = &discussions[2];
        assert_eq!(gamma.comments.len(), 1);
        assert_eq!(gamma.comments[0].text, "'''Merge''' into [[Alpha]]\n  which covers it.");
    }

    #[test]
    fn empty_page_yields_nothing() {
        assert!(parse_wikitext(Language::En, "").is_empty());
        assert!(parse_wikitext(Language::En, "just prose, no headings").is_empty());
    }

    #[test]
    fn project_headings_are_not_articles() {
        let text = "== [[Wikipedia:Löschregeln]] ==\n* x\n== [[Foo]] ==\n* '''Behalten'''\n";
        let d = parse_wikitext(Language::De, text);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].article_title, "Foo");
    }

    #[test]
    fn subheadings_stay_inside_discussion() {
        let text = "== [[Foo]] ==\n* a\n=== Relisted ===\n* b\n= Next day =\n* c\n";
        let d = parse_wikitext(Language::En, text);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].comments.iter().map(|c| c.text.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn comment_texts_are_slices_of_the_page() {
        let mut pos = 0;
        for d in parse_wikitext(Language::En, THREE) {
            for c in d.comments {
                let found = THREE[pos..].find(&c.text).expect("comment text in order");
                pos += found + c.text.len();
            }
        }
    }
}
