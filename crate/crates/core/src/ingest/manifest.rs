use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cache::write_json_atomic;
use super::IngestError;
use crate::lang::Language;

/// Revision ids pinned per page, so a rebuild reads the same snapshot.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    #[serde(default)]
    pub pages: BTreeMap<Language, BTreeMap<String, u64>>,
}

impl SnapshotManifest {
    pub fn get(&self, language: Language, title: &str) -> Option<u64> {
        self.pages.get(&language)?.get(title).copied()
    }

    pub fn insert(&mut self, language: Language, title: &str, revid: u64) {
        self.pages
            .entry(language)
            .or_default()
            .insert(title.to_string(), revid);
    }

    pub fn len(&self) -> usize {
        self.pages.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let raw = fs::read_to_string(path)?;
        serde_json::from_str(&raw).map_err(|e| IngestError::Cache(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), IngestError> {
        write_json_atomic(path, self)
    }
}
