//! Fetching archive pages, title resolutions and interlanguage links from the
//! MediaWiki Action API, backed by an on-disk cache.
//!
//! All reads go through the cache first; only misses reach the [`Transport`].
//! In offline mode misses fail with [`IngestError::NetworkUnavailable`]
//! instead of touching the network.

mod cache;
mod fixture;
mod manifest;
mod transport;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use cache::{encode_key, PageCache, CACHE_ENV};
pub use fixture::{FixturePage, FixtureTransport, FixtureWiki, SiteFile};
pub use manifest::SnapshotManifest;
pub use transport::{HttpResponse, HttpTransport, Transport, MIN_REQUEST_INTERVAL};

use crate::lang::{normalize_title, Language, FIRST_YEAR, LAST_YEAR};

const BATCH: usize = 50;
const MAX_RETRIES: u32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("network unavailable: {0}")]
    NetworkUnavailable(String),
    #[error("rate limited by the API (retry after {retry_after_secs}s)")]
    RateLimited { retry_after_secs: u64 },
    #[error("malformed API response: {0}")]
    MalformedResponse(String),
    #[error("page does not exist: {0}")]
    MissingPage(String),
    #[error("date range {from}-{to} outside the supported span {FIRST_YEAR}-{LAST_YEAR}")]
    InvalidDateRange { from: u16, to: u16 },
    #[error("empty title in request")]
    EmptyTitle,
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a language's deletion discussions live.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiSource {
    pub language: Language,
    pub api_endpoint: String,
    /// Title of the archive index; archive pages are its subpages.
    pub archive_root: String,
    /// Regex with one capture group extracting the year from an archive page
    /// title. Pages whose title yields no year are dated by their latest revision.
    pub title_year_pattern: Option<String>,
    /// Title prefix of per-discussion pages transcluded into archive pages.
    pub transclusion_prefix: Option<String>,
}

impl WikiSource {
    /// Default archive traversal for each language.
    ///
    /// * en: daily logs `Wikipedia:Articles for deletion/Log/<year> <Month> <day>`,
    ///   which transclude one subpage per discussion.
    /// * de: daily pages `Wikipedia:Löschkandidaten/<day>. <Monat> <year>` with
    ///   the discussions inline.
    /// * tr: one subpage per discussion under `Vikipedi:Silinmeye aday sayfalar/`,
    ///   dated by revision timestamp.
    pub fn for_language(language: Language) -> Self {
        let api_endpoint = format!("https://{}.wikipedia.org/w/api.php", language.code());
        match language {
            Language::En => Self {
                language,
                api_endpoint,
                archive_root: "Wikipedia:Articles for deletion/Log".into(),
                title_year_pattern: Some(r"/Log/(\d{4})\b".into()),
                transclusion_prefix: Some("Wikipedia:Articles for deletion/".into()),
            },
            Language::De => Self {
                language,
                api_endpoint,
                archive_root: "Wikipedia:Löschkandidaten".into(),
                title_year_pattern: Some(r"(\d{4})$".into()),
                transclusion_prefix: None,
            },
            Language::Tr => Self {
                language,
                api_endpoint,
                archive_root: "Vikipedi:Silinmeye aday sayfalar".into(),
                title_year_pattern: None,
                transclusion_prefix: None,
            },
        }
    }

    fn list_prefix(&self) -> String {
        let root = self
            .archive_root
            .split_once(':')
            .map(|(_, rest)| rest)
            .unwrap_or(&self.archive_root);
        format!("{root}/")
    }
}

/// A page revision as stored in the cache.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedPage {
    pub title: String,
    pub language: Language,
    pub wikitext: String,
    /// Unix seconds at fetch time.
    pub fetched_at: u64,
    pub revision_id: u64,
    #[serde(default)]
    pub revision_timestamp: String,
}

impl CachedPage {
    fn revision_year(&self) -> Option<u16> {
        self.revision_timestamp.get(..4)?.parse().ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TitleResolution {
    pub raw_target: String,
    pub resolved_title: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CachedListing {
    titles: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CachedResolution {
    resolved_title: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CachedLangLinks {
    links: BTreeMap<Language, String>,
}

const MISSING: &str = "missing";

/// Cache-first MediaWiki client.
pub struct Client {
    cache: PageCache,
    transport: Option<Box<dyn Transport>>,
    requests: AtomicU64,
    manifest: Mutex<SnapshotManifest>,
    pin_revisions: bool,
    retry_sleep_cap: Duration,
}

impl Client {
    pub fn new(cache: PageCache, transport: Box<dyn Transport>) -> Self {
        Self {
            cache,
            transport: Some(transport),
            requests: AtomicU64::new(0),
            manifest: Mutex::new(SnapshotManifest::default()),
            pin_revisions: false,
            retry_sleep_cap: Duration::from_secs(120),
        }
    }

    /// A client that never issues requests; cache misses are errors.
    pub fn offline(cache: PageCache) -> Self {
        Self {
            transport: None,
            ..Self::new(cache, Box::new(FixtureTransport::new()))
        }
    }

    /// Pins page fetches to the revisions listed in `manifest`.
    pub fn with_pinned_manifest(mut self, manifest: SnapshotManifest) -> Self {
        self.manifest = Mutex::new(manifest);
        self.pin_revisions = true;
        self
    }

    pub fn is_offline(&self) -> bool {
        self.transport.is_none()
    }

    pub fn cache(&self) -> &PageCache {
        &self.cache
    }

    /// Number of API requests issued by this client.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    /// Revisions of every page served so far (pinned revisions included).
    pub fn manifest(&self) -> SnapshotManifest {
        self.manifest.lock().expect("manifest poisoned").clone()
    }

    fn query(&self, source: &WikiSource, params: &[(&str, &str)]) -> Result<Value, IngestError> {
        let transport = self.transport.as_ref().ok_or_else(|| {
            IngestError::NetworkUnavailable("offline mode: cache miss cannot be fetched".into())
        })?;
        let mut owned: Vec<(String, String)> = vec![
            ("action".into(), "query".into()),
            ("format".into(), "json".into()),
            ("formatversion".into(), "2".into()),
        ];
        owned.extend(params.iter().map(|(k, v)| (k.to_string(), v.to_string())));
        let mut attempt = 0;
        loop {
            self.requests.fetch_add(1, Ordering::SeqCst);
            let response = transport.get(&source.api_endpoint, &owned)?;
            match response.status {
                200 => break parse_body(&response.body),
                429 => {
                    let wait = response.retry_after.unwrap_or(Duration::from_secs(5));
                    if attempt >= MAX_RETRIES || wait > self.retry_sleep_cap {
                        return Err(IngestError::RateLimited {
                            retry_after_secs: wait.as_secs(),
                        });
                    }
                    attempt += 1;
                    log::warn!(target: "ingest", "rate limited by {}, retrying in {:?}", source.api_endpoint, wait);
                    thread::sleep(wait);
                }
                s if s >= 500 => {
                    return Err(IngestError::NetworkUnavailable(format!(
                        "{} answered HTTP {s}",
                        source.api_endpoint
                    )))
                }
                s => {
                    return Err(IngestError::MalformedResponse(format!(
                        "{} answered HTTP {s}",
                        source.api_endpoint
                    )))
                }
            }
        }
    }

    /// Fetches all archive pages dated within `[from, to]` (inclusive), plus the
    /// discussion subpages they transclude.
    pub fn fetch_archive_pages(
        &self,
        source: &WikiSource,
        date_range: [u16; 2],
    ) -> Result<Vec<CachedPage>, IngestError> {
        let [from, to] = date_range;
        if from > to || from < FIRST_YEAR || to > LAST_YEAR {
            return Err(IngestError::InvalidDateRange { from, to });
        }
        let from = from.max(source.language.first_year());
        if from > to {
            return Ok(Vec::new());
        }
        let year_re = source
            .title_year_pattern
            .as_deref()
            .map(Regex::new)
            .transpose()
            .map_err(|e| IngestError::Cache(format!("bad title_year_pattern: {e}")))?;

        let listing = self.list_archive(source)?;
        let in_range = |year: u16| (from..=to).contains(&year);
        let mut dated = Vec::new();
        let mut undated = Vec::new();
        for title in listing {
            let year = year_re
                .as_ref()
                .and_then(|re| re.captures(&title))
                .and_then(|c| c.get(1))
                .and_then(|m| m.as_str().parse::<u16>().ok());
            match year {
                Some(y) if in_range(y) => dated.push(title),
                Some(_) => {}
                None => undated.push(title),
            }
        }

        let mut pages = self.fetch_pages(source, &dated)?;
        if !undated.is_empty() {
            let extra = self.fetch_pages(source, &undated)?;
            pages.extend(extra.into_iter().filter(|p| p.revision_year().is_some_and(in_range)));
            pages.sort_by(|a, b| a.title.cmp(&b.title));
        }

        let Some(prefix) = source.transclusion_prefix.as_deref() else {
            return Ok(pages);
        };
        let mut out = Vec::with_capacity(pages.len());
        for page in pages {
            let subpages = transcluded_titles(source, &page.wikitext, prefix);
            out.push(page);
            if !subpages.is_empty() {
                out.extend(self.fetch_pages(source, &subpages)?);
            }
        }
        Ok(out)
    }

    fn list_archive(&self, source: &WikiSource) -> Result<Vec<String>, IngestError> {
        let key = source.archive_root.as_str();
        if let Some(cached) = self.cache.load::<CachedListing>(source.language, "lists", key)? {
            return Ok(cached.titles);
        }
        let prefix = source.list_prefix();
        let mut titles = Vec::new();
        let mut cont: Option<String> = None;
        loop {
            let mut params = vec![
                ("list", "allpages"),
                ("apnamespace", "4"),
                ("apprefix", prefix.as_str()),
                ("aplimit", "max"),
                ("apfilterredir", "nonredirects"),
            ];
            if let Some(c) = cont.as_deref() {
                params.push(("apcontinue", c));
            }
            let body = self.query(source, &params)?;
            let list = body["query"]["allpages"]
                .as_array()
                .ok_or_else(|| IngestError::MalformedResponse("allpages list missing".into()))?;
            for item in list {
                let title = item["title"]
                    .as_str()
                    .ok_or_else(|| IngestError::MalformedResponse("allpages entry without title".into()))?;
                titles.push(title.to_string());
            }
            cont = body["continue"]["apcontinue"].as_str().map(str::to_string);
            if cont.is_none() {
                break;
            }
        }
        self.cache.store(
            source.language,
            "lists",
            key,
            &CachedListing {
                titles: titles.clone(),
            },
        )?;
        Ok(titles)
    }

    /// Fetches the current (or pinned) revision of each title, cache first.
    /// Missing pages are skipped with a warning. Output follows input order.
    pub fn fetch_pages(&self, source: &WikiSource, titles: &[String]) -> Result<Vec<CachedPage>, IngestError> {
        let language = source.language;
        let mut found: HashMap<String, CachedPage> = HashMap::new();
        let mut missing_titles = Vec::new();
        let mut missing_revids = Vec::new();
        for title in titles {
            if found.contains_key(title) {
                continue;
            }
            let pinned = self.pinned_revision(language, title);
            match self.cache.load_page(language, title)? {
                Some(page) if pinned.is_none_or(|r| r == page.revision_id) => {
                    found.insert(title.clone(), page);
                }
                _ => match pinned {
                    Some(rev) => missing_revids.push(rev.to_string()),
                    None if self.known_missing(language, title)? => {}
                    None => missing_titles.push(title.clone()),
                },
            }
        }
        missing_titles.dedup();
        for chunk in missing_titles.chunks(BATCH) {
            let joined = chunk.join("|");
            let body = self.query(
                source,
                &[
                    ("prop", "revisions"),
                    ("rvprop", "ids|timestamp|content"),
                    ("rvslots", "main"),
                    ("titles", joined.as_str()),
                ],
            )?;
            self.absorb_revisions(language, &body, &mut found)?;
            // Remember absent pages so offline reruns see the same result.
            for title in chunk.iter().filter(|t| !found.contains_key(*t)) {
                self.cache.store(language, MISSING, title, &true)?;
            }
        }
        for chunk in missing_revids.chunks(BATCH) {
            let joined = chunk.join("|");
            let body = self.query(
                source,
                &[
                    ("prop", "revisions"),
                    ("rvprop", "ids|timestamp|content"),
                    ("rvslots", "main"),
                    ("revids", joined.as_str()),
                ],
            )?;
            self.absorb_revisions(language, &body, &mut found)?;
        }
        let mut out = Vec::with_capacity(titles.len());
        let mut seen = std::collections::HashSet::new();
        for title in titles {
            if !seen.insert(title) {
                continue;
            }
            match found.get(title) {
                Some(page) => {
                    self.record_revision(language, &page.title, page.revision_id);
                    out.push(page.clone());
                }
                None => log::warn!(target: "ingest", "page missing on {}: {title}", language),
            }
        }
        Ok(out)
    }

    fn known_missing(&self, language: Language, title: &str) -> Result<bool, IngestError> {
        Ok(self.cache.load::<bool>(language, MISSING, title)?.unwrap_or(false))
    }

    fn pinned_revision(&self, language: Language, title: &str) -> Option<u64> {
        if !self.pin_revisions {
            return None;
        }
        self.manifest.lock().expect("manifest poisoned").get(language, title)
    }

    fn record_revision(&self, language: Language, title: &str, revid: u64) {
        self.manifest
            .lock()
            .expect("manifest poisoned")
            .insert(language, title, revid);
    }

    fn absorb_revisions(
        &self,
        language: Language,
        body: &Value,
        found: &mut HashMap<String, CachedPage>,
    ) -> Result<(), IngestError> {
        let pages = body["query"]["pages"]
            .as_array()
            .ok_or_else(|| IngestError::MalformedResponse("pages array missing".into()))?;
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        for page in pages {
            if page.get("missing").is_some() || page.get("invalid").is_some() {
                continue;
            }
            let title = page["title"]
                .as_str()
                .ok_or_else(|| IngestError::MalformedResponse("page without title".into()))?;
            let rev = &page["revisions"][0];
            let wikitext = rev["slots"]["main"]["content"]
                .as_str()
                .ok_or_else(|| IngestError::MalformedResponse(format!("no content for {title}")))?;
            let revision_id = rev["revid"]
                .as_u64()
                .ok_or_else(|| IngestError::MalformedResponse(format!("no revid for {title}")))?;
            let cached = CachedPage {
                title: title.to_string(),
                language,
                wikitext: wikitext.to_string(),
                fetched_at: now,
                revision_id,
                revision_timestamp: rev["timestamp"].as_str().unwrap_or_default().to_string(),
            };
            self.cache.store_page(&cached)?;
            found.insert(title.to_string(), cached);
        }
        Ok(())
    }

    /// Resolves shortcut and redirect titles to the page they point at.
    /// Order-preserving; unresolvable targets map to `None`.
    pub fn resolve_titles(
        &self,
        source: &WikiSource,
        targets: &[String],
    ) -> Result<Vec<TitleResolution>, IngestError> {
        let language = source.language;
        let mut known: HashMap<String, Option<String>> = HashMap::new();
        let mut pending = Vec::new();
        let mut queued = std::collections::HashSet::new();
        for target in targets {
            let key = query_form(target);
            if key.is_empty() {
                return Err(IngestError::EmptyTitle);
            }
            if known.contains_key(target) || queued.contains(target) {
                continue;
            }
            match self.cache.load::<CachedResolution>(language, "resolve", target)? {
                Some(c) => {
                    known.insert(target.clone(), c.resolved_title);
                }
                None => {
                    queued.insert(target.clone());
                    pending.push(target.clone());
                }
            }
        }
        for chunk in pending.chunks(BATCH) {
            let joined = chunk.iter().map(|t| query_form(t)).collect::<Vec<_>>().join("|");
            let body = self.query(source, &[("titles", joined.as_str()), ("redirects", "1")])?;
            let resolved = follow_resolution(&body, chunk.iter().map(|t| query_form(t)))?;
            for (target, result) in chunk.iter().zip(resolved) {
                self.cache.store(
                    language,
                    "resolve",
                    target,
                    &CachedResolution {
                        resolved_title: result.clone(),
                    },
                )?;
                known.insert(target.clone(), result);
            }
        }
        Ok(targets
            .iter()
            .map(|t| TitleResolution {
                raw_target: t.clone(),
                resolved_title: known.get(t).cloned().flatten(),
            })
            .collect())
    }

    /// Interlanguage links of each title, restricted to en/de/tr.
    pub fn fetch_interwiki(
        &self,
        source: &WikiSource,
        policy_titles: &[String],
    ) -> Result<BTreeMap<String, BTreeMap<Language, String>>, IngestError> {
        let language = source.language;
        let mut out = BTreeMap::new();
        let mut pending = Vec::new();
        for title in policy_titles {
            if title.trim().is_empty() {
                return Err(IngestError::EmptyTitle);
            }
            match self.cache.load::<CachedLangLinks>(language, "langlinks", title)? {
                Some(c) => {
                    out.insert(title.clone(), c.links);
                }
                None => {
                    if !pending.contains(title) {
                        pending.push(title.clone());
                    }
                }
            }
        }
        for chunk in pending.chunks(BATCH) {
            let joined = chunk.join("|");
            let mut links: HashMap<String, BTreeMap<Language, String>> = HashMap::new();
            let mut present: HashMap<String, bool> = HashMap::new();
            let mut norm: HashMap<String, String> = HashMap::new();
            let mut cont: Option<String> = None;
            loop {
                let mut params = vec![("prop", "langlinks"), ("lllimit", "max"), ("titles", joined.as_str())];
                if let Some(c) = cont.as_deref() {
                    params.push(("llcontinue", c));
                }
                let body = self.query(source, &params)?;
                for n in body["query"]["normalized"].as_array().into_iter().flatten() {
                    if let (Some(f), Some(t)) = (n["from"].as_str(), n["to"].as_str()) {
                        norm.insert(f.to_string(), t.to_string());
                    }
                }
                let pages = body["query"]["pages"]
                    .as_array()
                    .ok_or_else(|| IngestError::MalformedResponse("pages array missing".into()))?;
                for page in pages {
                    let title = page["title"]
                        .as_str()
                        .ok_or_else(|| IngestError::MalformedResponse("page without title".into()))?;
                    let exists = page.get("missing").is_none() && page.get("invalid").is_none();
                    present.insert(title.to_string(), exists);
                    let entry = links.entry(title.to_string()).or_default();
                    for ll in page["langlinks"].as_array().into_iter().flatten() {
                        let (Some(code), Some(foreign)) = (ll["lang"].as_str(), ll["title"].as_str()) else {
                            return Err(IngestError::MalformedResponse("langlink without lang/title".into()));
                        };
                        if let Ok(lang) = code.parse::<Language>() {
                            if lang != language {
                                entry.insert(lang, foreign.to_string());
                            }
                        }
                    }
                }
                cont = body["continue"]["llcontinue"].as_str().map(str::to_string);
                if cont.is_none() {
                    break;
                }
            }
            for title in chunk {
                let local = norm.get(title).cloned().unwrap_or_else(|| title.clone());
                if !present.get(&local).copied().unwrap_or(false) {
                    return Err(IngestError::MissingPage(title.clone()));
                }
                let found = links.remove(&local).unwrap_or_default();
                self.cache.store(
                    language,
                    "langlinks",
                    title,
                    &CachedLangLinks { links: found.clone() },
                )?;
                out.insert(title.clone(), found);
            }
        }
        Ok(out)
    }
}

fn parse_body(body: &str) -> Result<Value, IngestError> {
    let value: Value =
        serde_json::from_str(body).map_err(|e| IngestError::MalformedResponse(format!("invalid JSON: {e}")))?;
    if let Some(err) = value.get("error") {
        return Err(IngestError::MalformedResponse(format!(
            "{}: {}",
            err["code"].as_str().unwrap_or("error"),
            err["info"].as_str().unwrap_or("")
        )));
    }
    if !value.is_object() {
        return Err(IngestError::MalformedResponse("response is not an object".into()));
    }
    Ok(value)
}

/// Title as sent to the API: fragment dropped, whitespace trimmed.
fn query_form(target: &str) -> String {
    let t = target.split('#').next().unwrap_or("");
    t.trim().to_string()
}

fn follow_resolution(
    body: &Value,
    targets: impl Iterator<Item = String>,
) -> Result<Vec<Option<String>>, IngestError> {
    let query = &body["query"];
    let mut normalized = HashMap::new();
    for n in query["normalized"].as_array().into_iter().flatten() {
        if let (Some(f), Some(t)) = (n["from"].as_str(), n["to"].as_str()) {
            normalized.insert(f.to_string(), t.to_string());
        }
    }
    let mut redirects = HashMap::new();
    for r in query["redirects"].as_array().into_iter().flatten() {
        if let (Some(f), Some(t)) = (r["from"].as_str(), r["to"].as_str()) {
            redirects.insert(f.to_string(), t.to_string());
        }
    }
    let mut exists = HashMap::new();
    for p in query["pages"]
        .as_array()
        .ok_or_else(|| IngestError::MalformedResponse("pages array missing".into()))?
    {
        if let Some(title) = p["title"].as_str() {
            let ok = p.get("missing").is_none() && p.get("invalid").is_none();
            exists.insert(title.to_string(), ok);
        }
    }
    Ok(targets
        .map(|t| {
            let mut current = normalized.get(&t).cloned().unwrap_or(t);
            for _ in 0..8 {
                match redirects.get(&current) {
                    Some(next) => current = next.clone(),
                    None => break,
                }
            }
            exists.get(&current).copied().unwrap_or(false).then_some(current)
        })
        .collect())
}

fn transcluded_titles(source: &WikiSource, wikitext: &str, prefix: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = wikitext;
    while let Some(start) = rest.find("{{") {
        let after = &rest[start + 2..];
        let Some(end) = after.find("}}") else { break };
        let inner = after[..end].trim();
        let name = inner.split('|').next().unwrap_or("").trim();
        let title = normalize_title(source.language, name);
        let log_root = format!("{}/", source.archive_root);
        if title.starts_with(prefix) && !title.starts_with(&log_root) && !out.contains(&title) {
            out.push(title);
        }
        rest = &after[end + 2..];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transclusions_are_collected_in_order() {
        let source = WikiSource::for_language(Language::En);
        let text = "<noinclude>{{AfD log header}}</noinclude>\n{{Wikipedia:Articles for deletion/Foo}}\n\
                    {{Wikipedia:Articles for deletion/Log/2007 May 4}}\n{{ WP:Articles_for_deletion/Bar }}\n\
                    {{Wikipedia:Articles for deletion/Foo}}";
        assert_eq!(
            transcluded_titles(&source, text, "Wikipedia:Articles for deletion/"),
            vec![
                "Wikipedia:Articles for deletion/Foo".to_string(),
                "Wikipedia:Articles for deletion/Bar".to_string()
            ]
        );
    }

    #[test]
    fn api_errors_surface_as_malformed() {
        let err = parse_body(r#"{"error":{"code":"badvalue","info":"nope"}}"#).unwrap_err();
        assert!(matches!(err, IngestError::MalformedResponse(m) if m.contains("badvalue")));
        assert!(matches!(parse_body("<html>"), Err(IngestError::MalformedResponse(_))));
    }

    #[test]
    fn sources_are_unique_per_language() {
        let endpoints: std::collections::HashSet<_> = Language::ALL
            .iter()
            .map(|&l| WikiSource::for_language(l).api_endpoint)
            .collect();
        assert_eq!(endpoints.len(), 3);
        assert!(Language::ALL
            .iter()
            .all(|&l| !WikiSource::for_language(l).archive_root.is_empty()));
    }
}
