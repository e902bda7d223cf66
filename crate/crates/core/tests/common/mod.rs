#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use tempfile::TempDir;
use wikistance::corpus::SplitPlan;
use wikistance::ingest::{Client, FixtureTransport, PageCache};
use wikistance::pipeline::{build_corpus, BuildOptions, BuildOutput, LanguageInputs};
use wikistance::align::{AlignOverrides, InterwikiTable};
use wikistance::policies::{PolicyRegistry, RegistryDiagnostics};
use wikistance::Language;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_client(cache: &TempDir) -> Client {
    let transport = FixtureTransport::load(&fixtures().join("wiki")).expect("fixture wiki loads");
    Client::new(PageCache::new(cache.path()), Box::new(transport))
}

pub fn fixture_inputs() -> Vec<LanguageInputs> {
    Language::ALL
        .iter()
        .map(|&l| LanguageInputs { min_count: 1, ..LanguageInputs::bundled(l).unwrap() })
        .collect()
}

pub fn fixture_options() -> BuildOptions {
    BuildOptions { years: [2005, 2022], plan: SplitPlan { seed: 7, tr_min_test: 2, ..SplitPlan::default() } }
}

pub fn build_fixture() -> BuildOutput {
    let cache = TempDir::new().unwrap();
    let client = fixture_client(&cache);
    build_corpus(&client, &fixture_inputs(), &fixture_options(), None, &AlignOverrides::default()).unwrap()
}

/// Registry from a one-title-per-line file, every title counted once.
pub fn registry_from_file(language: Language, path: &std::path::Path) -> PolicyRegistry {
    let titles: Vec<String> =
        std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.is_empty()).map(str::to_string).collect();
    PolicyRegistry {
        language,
        canonical: titles.iter().cloned().collect(),
        redirect_map: BTreeMap::new(),
        merge_map: BTreeMap::new(),
        counts: titles.iter().map(|t| (t.clone(), 1)).collect(),
        min_count: 1,
        diagnostics: RegistryDiagnostics::default(),
    }
}

pub fn align_registries() -> Vec<PolicyRegistry> {
    Language::ALL.iter().map(|&l| registry_from_file(l, &fixtures().join(format!("align/{l}.policies")))).collect()
}

pub fn align_interwiki() -> InterwikiTable {
    InterwikiTable::load(&fixtures().join("align/interwiki.tsv")).unwrap()
}

/// `key=value` lines written next to the alignment fixture.
pub fn align_expected(key: &str) -> usize {
    let text = std::fs::read_to_string(fixtures().join("align/expected.txt")).unwrap();
    text.lines().find_map(|l| l.strip_prefix(&format!("{key}="))).unwrap().parse().unwrap()
}
