//! Cross-language policy alignment through interwiki links.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::lang::{normalize_title, Language};
use crate::policies::PolicyRegistry;

pub type PolicyKey = (Language, String);

#[derive(Debug, thiserror::Error)]
pub enum AlignError {
    #[error("conflicting interwiki links: {0:?}")]
    ConflictingLinks(Vec<Conflict>),
    #[error("two registries for `{0}`")]
    DuplicateRegistry(Language),
    #[error("`{title}` is not a canonical {language} policy")]
    UnknownPolicy { language: Language, title: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conflict {
    /// One title links to several titles in the same language.
    Counterparts { from: PolicyKey, language: Language, titles: Vec<String> },
    /// A component holds several titles of one language.
    Component { language: Language, titles: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InterwikiLink {
    pub from: PolicyKey,
    pub to: PolicyKey,
}

/// Undirected language links between policy pages.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterwikiTable {
    pub links: BTreeSet<InterwikiLink>,
}

impl InterwikiTable {
    pub fn insert(&mut self, from: PolicyKey, to: PolicyKey) {
        self.links.insert(InterwikiLink { from, to });
    }

    /// Adds the output of an interwiki fetch for `language`.
    pub fn extend_from_fetch(&mut self, language: Language, fetched: &BTreeMap<String, BTreeMap<Language, String>>) {
        for (title, foreign) in fetched {
            for (lang, foreign_title) in foreign {
                self.insert((language, title.clone()), (*lang, normalize_title(*lang, foreign_title)));
            }
        }
    }

    /// Tab-separated `lang, title, foreign_lang, foreign_title`; `#` comments.
    pub fn parse(text: &str) -> Result<Self, AlignError> {
        let mut table = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [a, ta, b, tb] = cols[..] else {
                return Err(AlignError::Syntax { line: i + 1, message: "expected 4 columns".into() });
            };
            let la: Language = a.parse().map_err(|e| AlignError::Syntax { line: i + 1, message: format!("{e}") })?;
            let lb: Language = b.parse().map_err(|e| AlignError::Syntax { line: i + 1, message: format!("{e}") })?;
            table.insert((la, normalize_title(la, ta)), (lb, normalize_title(lb, tb)));
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, AlignError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_tsv(&self) -> String {
        self.links
            .iter()
            .map(|l| format!("{}\t{}\t{}\t{}\n", l.from.0, l.from.1, l.to.0, l.to.1))
            .collect()
    }
}

/// Curated edge cuts and additions, `cut(lang:title)=lang:title` and
/// `link(lang:title)=lang:title`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignOverrides {
    pub cut: BTreeSet<(PolicyKey, PolicyKey)>,
    pub link: BTreeSet<(PolicyKey, PolicyKey)>,
}

fn parse_key(text: &str) -> Option<PolicyKey> {
    let (lang, title) = text.trim().split_once(':')?;
    let lang: Language = lang.parse().ok()?;
    Some((lang, normalize_title(lang, title)))
}

fn ordered(a: PolicyKey, b: PolicyKey) -> (PolicyKey, PolicyKey) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl AlignOverrides {
    pub fn parse(text: &str) -> Result<Self, AlignError> {
        let mut overrides = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || AlignError::Syntax { line: i + 1, message: format!("cannot read `{line}`") };
            let (head, value) = line.rsplit_once(")=").ok_or_else(bad)?;
            let (kind, key) = head.split_once('(').ok_or_else(bad)?;
            let pair = ordered(parse_key(key).ok_or_else(bad)?, parse_key(value).ok_or_else(bad)?);
            match kind {
                "cut" => overrides.cut.insert(pair),
                "link" => overrides.link.insert(pair),
                _ => return Err(bad()),
            };
        }
        Ok(overrides)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentEntry {
    pub id: u32,
    pub display_title: String,
    pub members: BTreeMap<Language, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<AlignmentEntry>", into = "Vec<AlignmentEntry>")]
pub struct PolicyAlignment {
    pub superset: Vec<AlignmentEntry>,
    projection: HashMap<PolicyKey, u32>,
}

impl From<Vec<AlignmentEntry>> for PolicyAlignment {
    fn from(superset: Vec<AlignmentEntry>) -> Self {
        let projection = superset
            .iter()
            .flat_map(|e| e.members.iter().map(move |(l, t)| ((*l, t.clone()), e.id)))
            .collect();
        Self { superset, projection }
    }
}

impl From<PolicyAlignment> for Vec<AlignmentEntry> {
    fn from(a: PolicyAlignment) -> Self {
        a.superset
    }
}

impl PolicyAlignment {
    pub fn len(&self) -> usize {
        self.superset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.superset.is_empty()
    }

    pub fn project(&self, language: Language, local_title: &str) -> Result<u32, AlignError> {
        self.projection
            .get(&(language, local_title.to_string()))
            .copied()
            .ok_or_else(|| AlignError::UnknownPolicy { language, title: local_title.to_string() })
    }

    pub fn entry(&self, id: u32) -> Option<&AlignmentEntry> {
        self.superset.get(id as usize)
    }

    /// Number of cross-language identifications: Σ component sizes − components.
    pub fn identifications(&self) -> usize {
        self.superset.iter().map(|e| e.members.len() - 1).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.superset).expect("alignment serializes")
    }
}

pub fn project_label(language: Language, local_title: &str, alignment: &PolicyAlignment) -> Result<u32, AlignError> {
    alignment.project(language, local_title)
}

/// Merges the registries into one label space. Interwiki links between
/// canonical titles are unioned into components; each component is one entry.
pub fn align(
    registries: &[&PolicyRegistry],
    interwiki: &InterwikiTable,
    overrides: &AlignOverrides,
) -> Result<PolicyAlignment, AlignError> {
    let mut nodes: Vec<PolicyKey> = Vec::new();
    let mut seen = BTreeSet::new();
    for r in registries {
        if !seen.insert(r.language) {
            return Err(AlignError::DuplicateRegistry(r.language));
        }
        nodes.extend(r.canonical.iter().map(|t| (r.language, t.clone())));
    }
    nodes.sort();
    let index: HashMap<&PolicyKey, usize> = nodes.iter().enumerate().map(|(i, k)| (k, i)).collect();

    let mut edges: BTreeSet<(PolicyKey, PolicyKey)> = interwiki
        .links
        .iter()
        .filter(|l| l.from.0 != l.to.0)
        .map(|l| ordered(l.from.clone(), l.to.clone()))
        .filter(|(a, b)| index.contains_key(a) && index.contains_key(b))
        .collect();
    edges.retain(|e| !overrides.cut.contains(e));
    for e in &overrides.link {
        if !index.contains_key(&e.0) {
            return Err(AlignError::UnknownPolicy { language: e.0 .0, title: e.0 .1.clone() });
        }
        if !index.contains_key(&e.1) {
            return Err(AlignError::UnknownPolicy { language: e.1 .0, title: e.1 .1.clone() });
        }
        edges.insert(e.clone());
    }

    let mut conflicts = Vec::new();
    let mut counterparts: BTreeMap<(&PolicyKey, Language), BTreeSet<&str>> = BTreeMap::new();
    for (a, b) in &edges {
        counterparts.entry((a, b.0)).or_default().insert(&b.1);
        counterparts.entry((b, a.0)).or_default().insert(&a.1);
    }
    for ((from, language), titles) in &counterparts {
        if titles.len() > 1 {
            conflicts.push(Conflict::Counterparts {
                from: (*from).clone(),
                language: *language,
                titles: titles.iter().map(|t| t.to_string()).collect(),
            });
        }
    }

    let mut uf = UnionFind::<usize>::new(nodes.len());
    for (a, b) in &edges {
        uf.union(index[a], index[b]);
    }
    let mut components: BTreeMap<usize, BTreeMap<Language, Vec<String>>> = BTreeMap::new();
    for (i, (lang, title)) in nodes.iter().enumerate() {
        components.entry(uf.find(i)).or_default().entry(*lang).or_default().push(title.clone());
    }
    if conflicts.is_empty() {
        for members in components.values() {
            for (language, titles) in members {
                if titles.len() > 1 {
                    conflicts.push(Conflict::Component { language: *language, titles: titles.clone() });
                }
            }
        }
    }
    if !conflicts.is_empty() {
        return Err(AlignError::ConflictingLinks(conflicts));
    }

    let mut entries: Vec<(String, BTreeMap<Language, String>)> = components
        .into_values()
        .map(|members| {
            let members: BTreeMap<Language, String> =
                members.into_iter().map(|(l, mut t)| (l, t.remove(0))).collect();
            let display = match members.get(&Language::En) {
                Some(en) => en.clone(),
                None => {
                    let (lang, title) = members
                        .iter()
                        .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)))
                        .expect("components are non-empty");
                    format!("{lang}:{title}")
                }
            };
            (display, members)
        })
        .collect();
    entries.sort();
    let superset = entries
        .into_iter()
        .enumerate()
        .map(|(id, (display_title, members))| AlignmentEntry { id: id as u32, display_title, members })
        .collect::<Vec<_>>();
    Ok(PolicyAlignment::from(superset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::RegistryDiagnostics;

    fn registry(language: Language, titles: &[&str]) -> PolicyRegistry {
        PolicyRegistry {
            language,
            canonical: titles.iter().map(|t| t.to_string()).collect(),
            redirect_map: BTreeMap::new(),
            merge_map: BTreeMap::new(),
            counts: titles.iter().map(|t| (t.to_string(), 1)).collect(),
            min_count: 1,
            diagnostics: RegistryDiagnostics::default(),
        }
    }

    fn key(l: Language, t: &str) -> PolicyKey {
        (l, t.to_string())
    }

    #[test]
    fn notability_forms_one_entry() {
        let en = registry(Language::En, &["Wikipedia:Notability", "Wikipedia:Verifiability"]);
        let de = registry(Language::De, &["Wikipedia:Relevanzkriterien"]);
        let tr = registry(Language::Tr, &["Vikipedi:Kayda değerlik", "Vikipedi:Tarafsız bakış açısı"]);
        let mut iw = InterwikiTable::default();
        iw.insert(key(Language::En, "Wikipedia:Notability"), key(Language::De, "Wikipedia:Relevanzkriterien"));
        iw.insert(key(Language::De, "Wikipedia:Relevanzkriterien"), key(Language::Tr, "Vikipedi:Kayda değerlik"));
        let a = align(&[&en, &de, &tr], &iw, &AlignOverrides::default()).unwrap();
        assert_eq!(a.len(), 3);
        let id = a.project(Language::De, "Wikipedia:Relevanzkriterien").unwrap();
        assert_eq!(a.project(Language::En, "Wikipedia:Notability").unwrap(), id);
        assert_eq!(a.project(Language::Tr, "Vikipedi:Kayda değerlik").unwrap(), id);
        let entry = a.entry(id).unwrap();
        assert_eq!(entry.display_title, "Wikipedia:Notability");
        assert_eq!(entry.members.len(), 3);
        let single = a.project(Language::Tr, "Vikipedi:Tarafsız bakış açısı").unwrap();
        assert_eq!(a.entry(single).unwrap().display_title, "tr:Vikipedi:Tarafsız bakış açısı");
        assert_eq!(a.identifications(), 2);
        assert!(matches!(a.project(Language::Tr, "Vikipedi:Yok"), Err(AlignError::UnknownPolicy { .. })));
    }

    #[test]
    fn conflicts_reported_and_cut_by_override() {
        let en = registry(Language::En, &["A"]);
        let de = registry(Language::De, &["B", "C"]);
        let mut iw = InterwikiTable::default();
        iw.insert(key(Language::En, "A"), key(Language::De, "B"));
        iw.insert(key(Language::En, "A"), key(Language::De, "C"));
        assert!(matches!(
            align(&[&en, &de], &iw, &AlignOverrides::default()),
            Err(AlignError::ConflictingLinks(_))
        ));
        let overrides = AlignOverrides::parse("cut(en:A)=de:C\n").unwrap();
        let a = align(&[&en, &de], &iw, &overrides).unwrap();
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn json_round_trip_rebuilds_projection() {
        let en = registry(Language::En, &["A", "B"]);
        let a = align(&[&en], &InterwikiTable::default(), &AlignOverrides::default()).unwrap();
        let back: PolicyAlignment = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.project(Language::En, "B").unwrap(), 1);
    }

    #[test]
    fn tsv_round_trip() {
        let t = InterwikiTable::parse("# c\nen\tWP:N\tde\tWikipedia:Relevanzkriterien\n").unwrap();
        let link = t.links.iter().next().unwrap();
        assert_eq!(link.from, key(Language::En, "Wikipedia:N"));
        assert_eq!(InterwikiTable::parse(&t.to_tsv()).unwrap(), t);
    }
}
