//! On-disk page cache.
//!
//! Layout: `<root>/<lang>/<percent-encoded title>.json` for pages, plus
//! `<root>/<lang>/_<kind>/<percent-encoded key>.json` for listings, title
//! resolutions and language links. Every write goes to a temporary file in
//! the target directory and is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{CachedPage, IngestError};
use crate::lang::Language;

/// Environment variable naming the default cache root.
pub const CACHE_ENV: &str = "WIKISTANCE_CACHE";

const KEEP: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.');
const MAX_STEM: usize = 180;

/// Percent-encodes a title into a file stem. Stems that would exceed common
/// file-name limits are truncated and suffixed with a content hash.
pub fn encode_key(key: &str) -> String {
    let mut encoded = utf8_percent_encode(key, KEEP).to_string();
    if encoded.starts_with('.') {
        encoded.replace_range(0..1, "%2E");
    }
    if encoded.len() > MAX_STEM {
        let digest = hex::encode(&Sha256::digest(key.as_bytes())[..8]);
        let mut cut = MAX_STEM - 17;
        // never split a %XX escape
        while encoded.as_bytes()[..cut].iter().rev().take(2).any(|&b| b == b'%') {
            cut -= 1;
        }
        encoded.truncate(cut);
        encoded.push('~');
        encoded.push_str(&digest);
    }
    encoded
}

#[derive(Debug, Clone)]
pub struct PageCache {
    root: PathBuf,
}

impl PageCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// Cache rooted at `$WIKISTANCE_CACHE`, falling back to `./cache`.
    pub fn from_env() -> Self {
        let root = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("cache"));
        Self::new(root)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn page_path(&self, language: Language, title: &str) -> PathBuf {
        self.root
            .join(language.code())
            .join(format!("{}.json", encode_key(title)))
    }

    fn aux_path(&self, language: Language, kind: &str, key: &str) -> PathBuf {
        self.root
            .join(language.code())
            .join(format!("_{kind}"))
            .join(format!("{}.json", encode_key(key)))
    }

    pub fn load_page(&self, language: Language, title: &str) -> Result<Option<CachedPage>, IngestError> {
        read_json(&self.page_path(language, title))
    }

    pub fn store_page(&self, page: &CachedPage) -> Result<(), IngestError> {
        write_json_atomic(&self.page_path(page.language, &page.title), page)
    }

    pub fn load<T: DeserializeOwned>(
        &self,
        language: Language,
        kind: &str,
        key: &str,
    ) -> Result<Option<T>, IngestError> {
        read_json(&self.aux_path(language, kind, key))
    }

    pub fn store<T: Serialize>(
        &self,
        language: Language,
        kind: &str,
        key: &str,
        value: &T,
    ) -> Result<(), IngestError> {
        write_json_atomic(&self.aux_path(language, kind, key), value)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>, IngestError> {
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| IngestError::Cache(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(IngestError::Io(e)),
    }
}

pub(crate) fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), IngestError> {
    let dir = path
        .parent()
        .ok_or_else(|| IngestError::Cache(format!("no parent directory for {}", path.display())))?;
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    let body = serde_json::to_vec_pretty(value)
        .map_err(|e| IngestError::Cache(format!("serialize {}: {e}", path.display())))?;
    tmp.write_all(&body)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| IngestError::Io(e.error))?;
    Ok(())
}
