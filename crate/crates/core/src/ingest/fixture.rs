//! Offline stand-in for the MediaWiki Action API.
//!
//! A fixture directory holds one subdirectory per language:
//!
//! ```text
//! <dir>/<lang>/site.json      redirects and language links
//! <dir>/<lang>/pages/*.wiki   one page per file
//! ```
//!
//! A page file starts with `key: value` header lines (`title`, `revid`,
//! `timestamp`), then a line containing only `---`, then the raw wikitext.
//! [`FixtureTransport`] answers the handful of query shapes the client issues
//! (`list=allpages`, `prop=revisions`, `prop=langlinks`, `redirects=1`) with
//! JSON in the same `formatversion=2` shape the live API returns.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::transport::{HttpResponse, Transport};
use super::{IngestError, WikiSource};
use crate::lang::{normalize_title, Language};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixturePage {
    pub revid: u64,
    pub timestamp: String,
    pub wikitext: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SiteFile {
    #[serde(default)]
    pub redirects: BTreeMap<String, String>,
    /// title -> language code -> foreign title; codes outside en/de/tr are allowed
    #[serde(default)]
    pub langlinks: BTreeMap<String, BTreeMap<String, String>>,
}

/// In-memory contents of one fixture wiki.
#[derive(Debug, Clone)]
pub struct FixtureWiki {
    pub language: Language,
    pub pages: BTreeMap<String, FixturePage>,
    pub site: SiteFile,
    /// Maximum number of titles returned per `list=allpages` batch.
    pub list_batch: usize,
}

impl FixtureWiki {
    pub fn new(language: Language) -> Self {
        Self {
            language,
            pages: BTreeMap::new(),
            site: SiteFile::default(),
            list_batch: 500,
        }
    }

    pub fn with_page(mut self, title: &str, revid: u64, timestamp: &str, wikitext: &str) -> Self {
        self.pages.insert(
            title.to_string(),
            FixturePage {
                revid,
                timestamp: timestamp.to_string(),
                wikitext: wikitext.to_string(),
            },
        );
        self
    }

    pub fn with_redirect(mut self, from: &str, to: &str) -> Self {
        self.site.redirects.insert(from.to_string(), to.to_string());
        self
    }

    pub fn with_langlink(mut self, title: &str, lang: &str, foreign: &str) -> Self {
        self.site
            .langlinks
            .entry(title.to_string())
            .or_default()
            .insert(lang.to_string(), foreign.to_string());
        self
    }

    pub fn load(dir: &Path, language: Language) -> Result<Self, IngestError> {
        let mut wiki = FixtureWiki::new(language);
        let site_path = dir.join("site.json");
        if site_path.exists() {
            let raw = fs::read_to_string(&site_path)?;
            wiki.site = serde_json::from_str(&raw)
                .map_err(|e| IngestError::Cache(format!("{}: {e}", site_path.display())))?;
        }
        let pages_dir = dir.join("pages");
        if pages_dir.is_dir() {
            let mut entries: Vec<_> = fs::read_dir(&pages_dir)?.collect::<Result<_, _>>()?;
            entries.sort_by_key(|e| e.file_name());
            for entry in entries {
                let path = entry.path();
                if path.extension().and_then(|e| e.to_str()) != Some("wiki") {
                    continue;
                }
                let raw = fs::read_to_string(&path)?;
                let (title, page) = parse_page_file(&raw)
                    .ok_or_else(|| IngestError::Cache(format!("malformed fixture page {}", path.display())))?;
                wiki.pages.insert(title, page);
            }
        }
        Ok(wiki)
    }

    fn normalize(&self, raw: &str) -> String {
        normalize_title(self.language, raw)
    }

    fn namespace_of(&self, title: &str) -> i64 {
        let project = format!("{}:", self.language.project_namespace());
        if title.starts_with(&project) {
            4
        } else if let Some((ns, _)) = title.split_once(':') {
            match ns {
                "User" | "Benutzer" | "Kullanıcı" => 2,
                "Category" | "Kategorie" | "Kategori" => 14,
                "Template" | "Vorlage" | "Şablon" => 10,
                _ => 0,
            }
        } else {
            0
        }
    }

    fn strip_namespace<'a>(&self, title: &'a str) -> &'a str {
        match self.namespace_of(title) {
            0 => title,
            _ => title.split_once(':').map(|(_, rest)| rest).unwrap_or(title),
        }
    }
}

fn parse_page_file(raw: &str) -> Option<(String, FixturePage)> {
    let (header, body) = raw.split_once("\n---\n")?;
    let mut title = None;
    let mut revid = None;
    let mut timestamp = String::from("2000-01-01T00:00:00Z");
    for line in header.lines() {
        let (key, value) = line.split_once(':')?;
        let value = value.trim();
        match key.trim() {
            "title" => title = Some(value.to_string()),
            "revid" => revid = value.parse().ok(),
            "timestamp" => timestamp = value.to_string(),
            _ => return None,
        }
    }
    Some((
        title?,
        FixturePage {
            revid: revid?,
            timestamp,
            wikitext: body.to_string(),
        },
    ))
}

/// Serves fixture wikis in place of the network and counts the requests it answers.
#[derive(Debug, Default)]
pub struct FixtureTransport {
    wikis: HashMap<String, FixtureWiki>,
    requests: AtomicU64,
}

impl FixtureTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_wiki(mut self, wiki: FixtureWiki) -> Self {
        let endpoint = WikiSource::for_language(wiki.language).api_endpoint;
        self.wikis.insert(endpoint, wiki);
        self
    }

    /// Loads every `<dir>/<lang>` subdirectory present.
    pub fn load(dir: &Path) -> Result<Self, IngestError> {
        let mut transport = Self::new();
        for language in Language::ALL {
            let sub = dir.join(language.code());
            if sub.is_dir() {
                transport = transport.with_wiki(FixtureWiki::load(&sub, language)?);
            }
        }
        Ok(transport)
    }

    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    fn answer(&self, wiki: &FixtureWiki, params: &BTreeMap<&str, &str>) -> Result<Value, String> {
        if params.get("action") != Some(&"query") || params.get("format") != Some(&"json") {
            return Err("only action=query&format=json is supported".into());
        }
        if params.get("list") == Some(&"allpages") {
            return Ok(list_allpages(wiki, params));
        }
        match params.get("prop").copied() {
            Some("revisions") => Ok(revisions(wiki, params)),
            Some("langlinks") => Ok(langlinks(wiki, params)),
            None if params.contains_key("titles") => Ok(resolve(wiki, params)),
            other => Err(format!("unsupported query shape (prop={other:?})")),
        }
    }
}

fn list_allpages(wiki: &FixtureWiki, params: &BTreeMap<&str, &str>) -> Value {
    let ns: i64 = params.get("apnamespace").and_then(|v| v.parse().ok()).unwrap_or(0);
    let prefix = params.get("apprefix").copied().unwrap_or("");
    let from = params.get("apcontinue").copied().unwrap_or("");
    let limit = match params.get("aplimit").copied() {
        Some("max") | None => wiki.list_batch,
        Some(n) => n.parse::<usize>().unwrap_or(10).min(wiki.list_batch),
    };
    let mut matching = wiki
        .pages
        .keys()
        .filter(|t| !wiki.site.redirects.contains_key(*t))
        .filter(|t| wiki.namespace_of(t) == ns)
        .map(|t| (wiki.strip_namespace(t), t))
        .filter(|(name, _)| name.starts_with(prefix) && *name >= from)
        .collect::<Vec<_>>();
    matching.sort();
    let mut out = json!({"batchcomplete": true, "query": {"allpages": []}});
    let list: Vec<Value> = matching
        .iter()
        .take(limit)
        .map(|(_, title)| json!({"pageid": page_id(title), "ns": ns, "title": title}))
        .collect();
    out["query"]["allpages"] = Value::Array(list);
    if let Some((next, _)) = matching.get(limit) {
        out["continue"] = json!({"apcontinue": next, "continue": "-||"});
    }
    out
}

fn page_id(title: &str) -> u64 {
    // stable, positive, not meaningful
    title.bytes().fold(7u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64)) % 1_000_000_007
}

struct Normalized {
    normalized: Vec<Value>,
    redirects: Vec<Value>,
    finals: Vec<String>,
}

fn normalize_and_redirect(wiki: &FixtureWiki, titles: &[&str], follow: bool) -> Normalized {
    let mut normalized = Vec::new();
    let mut redirects = Vec::new();
    let mut finals = Vec::new();
    for raw in titles {
        let norm = wiki.normalize(raw);
        if norm != *raw {
            normalized.push(json!({"fromencoded": false, "from": raw, "to": norm}));
        }
        let mut current = norm;
        if follow {
            let mut hops = 0;
            while let Some(target) = wiki.site.redirects.get(&current) {
                let target = wiki.normalize(target);
                redirects.push(json!({"from": current, "to": target}));
                current = target;
                hops += 1;
                if hops > 5 {
                    break;
                }
            }
        }
        finals.push(current);
    }
    Normalized {
        normalized,
        redirects,
        finals,
    }
}

fn page_stub(wiki: &FixtureWiki, title: &str) -> Value {
    if title.is_empty() {
        return json!({"title": title, "invalid": true});
    }
    let ns = wiki.namespace_of(title);
    if wiki.pages.contains_key(title) {
        json!({"pageid": page_id(title), "ns": ns, "title": title})
    } else {
        json!({"ns": ns, "title": title, "missing": true})
    }
}

fn split_titles<'a>(params: &BTreeMap<&str, &'a str>, key: &str) -> Vec<&'a str> {
    params
        .get(key)
        .map(|v| v.split('|').collect())
        .unwrap_or_default()
}

fn resolve(wiki: &FixtureWiki, params: &BTreeMap<&str, &str>) -> Value {
    let titles = split_titles(params, "titles");
    let follow = params.get("redirects").is_some();
    let n = normalize_and_redirect(wiki, &titles, follow);
    let mut pages: Vec<Value> = Vec::new();
    for title in &n.finals {
        if !pages.iter().any(|p| p["title"] == *title) {
            pages.push(page_stub(wiki, title));
        }
    }
    json!({"batchcomplete": true, "query": {"normalized": n.normalized, "redirects": n.redirects, "pages": pages}})
}

fn revisions(wiki: &FixtureWiki, params: &BTreeMap<&str, &str>) -> Value {
    let mut pages = Vec::new();
    let mut normalized = Vec::new();
    let mut redirects = Vec::new();
    let titles: Vec<String> = if let Some(revids) = params.get("revids") {
        revids
            .split('|')
            .filter_map(|r| r.parse::<u64>().ok())
            .filter_map(|r| {
                wiki.pages
                    .iter()
                    .find(|(_, p)| p.revid == r)
                    .map(|(t, _)| t.clone())
            })
            .collect()
    } else {
        let raw = split_titles(params, "titles");
        let n = normalize_and_redirect(wiki, &raw, params.contains_key("redirects"));
        normalized = n.normalized;
        redirects = n.redirects;
        n.finals
    };
    for title in titles {
        let mut stub = page_stub(wiki, &title);
        if let Some(page) = wiki.pages.get(&title) {
            stub["revisions"] = json!([{
                "revid": page.revid,
                "timestamp": page.timestamp,
                "slots": {"main": {"contentmodel": "wikitext", "content": page.wikitext}}
            }]);
        }
        pages.push(stub);
    }
    json!({"batchcomplete": true, "query": {"normalized": normalized, "redirects": redirects, "pages": pages}})
}

fn langlinks(wiki: &FixtureWiki, params: &BTreeMap<&str, &str>) -> Value {
    let titles = split_titles(params, "titles");
    let n = normalize_and_redirect(wiki, &titles, params.contains_key("redirects"));
    let mut pages = Vec::new();
    for title in &n.finals {
        let mut stub = page_stub(wiki, title);
        if wiki.pages.contains_key(title) {
            if let Some(links) = wiki.site.langlinks.get(title) {
                let list: Vec<Value> = links
                    .iter()
                    .map(|(lang, foreign)| json!({"lang": lang, "title": foreign}))
                    .collect();
                stub["langlinks"] = Value::Array(list);
            }
        }
        pages.push(stub);
    }
    json!({"batchcomplete": true, "query": {"normalized": n.normalized, "pages": pages}})
}

impl Transport for FixtureTransport {
    fn get(&self, endpoint: &str, params: &[(String, String)]) -> Result<HttpResponse, IngestError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let wiki = match self.wikis.get(endpoint) {
            Some(w) => w,
            None => {
                return Err(IngestError::NetworkUnavailable(format!(
                    "no fixture wiki for endpoint {endpoint}"
                )))
            }
        };
        let map: BTreeMap<&str, &str> = params.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let body = match self.answer(wiki, &map) {
            Ok(value) => value,
            Err(info) => json!({"error": {"code": "badquery", "info": info}}),
        };
        Ok(HttpResponse::ok(body.to_string()))
    }
}
