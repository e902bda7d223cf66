//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use wikistance::corpus::{SplitPlan, SplitRatios};
use wikistance::lang::{FIRST_YEAR, LAST_YEAR};
use wikistance::textmodels::{ModelTask, VocabularyConfig};
use wikistance::{Error, Language};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSettings {
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub l2: Option<f64>,
    pub batch: Option<usize>,
    pub hidden: Option<usize>,
    pub ngram_range: Option<[usize; 2]>,
    pub min_df: Option<u64>,
    pub parallel: Option<bool>,
}

/// Keys accepted in a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lang: Option<Vec<Language>>,
    pub from: Option<u16>,
    pub to: Option<u16>,
    pub cache: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
    pub seed: Option<u64>,
    pub offline: Option<bool>,
    pub out: Option<PathBuf>,
    pub min_count: Option<u64>,
    pub tr_min_test: Option<usize>,
    pub split: Option<SplitRatios>,
    pub multilingual: Option<bool>,
    pub task: Option<ModelTask>,
    pub model: Option<ModelSettings>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Validated settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub languages: Vec<Language>,
    pub years: [u16; 2],
    pub cache: PathBuf,
    pub fixture: Option<PathBuf>,
    pub seed: u64,
    pub offline: bool,
    pub out: Option<PathBuf>,
    pub min_count: Option<u64>,
    pub plan: SplitPlan,
    pub multilingual: bool,
    pub task: ModelTask,
    pub model: ModelSettings,
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Clone, Default)]
pub struct FlagValues {
    pub lang: Vec<Language>,
    pub from: Option<u16>,
    pub to: Option<u16>,
    pub cache: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
    pub seed: Option<u64>,
    pub offline: bool,
    pub out: Option<PathBuf>,
    pub min_count: Option<u64>,
    pub tr_min_test: Option<usize>,
    pub multilingual: bool,
    pub task: Option<ModelTask>,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: FlagValues) -> Result<Self, Error> {
        let mut languages = if flags.lang.is_empty() { file.lang.unwrap_or_else(|| Language::ALL.to_vec()) } else { flags.lang };
        languages.sort();
        languages.dedup();
        if languages.is_empty() {
            return Err(Error::Config("no language selected".into()));
        }
        let years = [flags.from.or(file.from).unwrap_or(FIRST_YEAR), flags.to.or(file.to).unwrap_or(LAST_YEAR)];
        if years[0] > years[1] || years[0] < FIRST_YEAR || years[1] > LAST_YEAR {
            return Err(Error::Config(format!(
                "years {}-{} outside {FIRST_YEAR}-{LAST_YEAR} or reversed",
                years[0], years[1]
            )));
        }
        let seed = flags.seed.or(file.seed).unwrap_or(0);
        let mut plan = SplitPlan::with_seed(seed);
        if let Some(ratios) = file.split {
            plan.ratios = ratios;
        }
        if let Some(m) = flags.tr_min_test.or(file.tr_min_test) {
            plan.tr_min_test = m;
        }
        plan.validate().map_err(|e| Error::Config(e.to_string()))?;
        let min_count = flags.min_count.or(file.min_count);
        if min_count == Some(0) {
            return Err(Error::Config("min-count must be at least 1".into()));
        }
        let model = file.model.unwrap_or_default();
        if let Some([lo, hi]) = model.ngram_range {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("invalid ngram_range [{lo}, {hi}]")));
            }
        }
        if model.batch == Some(0) || model.hidden == Some(0) {
            return Err(Error::Config("batch and hidden must be positive".into()));
        }
        Ok(Self {
            languages,
            years,
            cache: flags.cache.or(file.cache).unwrap_or_else(|| PathBuf::from("cache")),
            fixture: flags.fixture.or(file.fixture),
            seed,
            offline: flags.offline || file.offline.unwrap_or(false),
            out: flags.out.or(file.out),
            min_count,
            plan,
            multilingual: flags.multilingual || file.multilingual.unwrap_or(false),
            task: flags.task.or(file.task).unwrap_or(ModelTask::Stance),
            model,
        })
    }

    pub fn vocabulary(&self) -> VocabularyConfig {
        let mut v = VocabularyConfig::default();
        if let Some(r) = self.model.ngram_range {
            v.ngram_range = r;
        }
        if let Some(d) = self.model.min_df {
            v.min_df = d;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig = toml::from_str("lang = [\"de\"]\nseed = 3\nfrom = 2010\n[model]\nepochs = 4\n").unwrap();
        let flags = FlagValues { seed: Some(9), lang: vec![Language::Tr], ..FlagValues::default() };
        let c = RunConfig::resolve(file, flags).unwrap();
        assert_eq!(c.languages, [Language::Tr]);
        assert_eq!(c.seed, 9);
        assert_eq!(c.plan.seed, 9);
        assert_eq!(c.years, [2010, LAST_YEAR]);
        assert_eq!(c.model.epochs, Some(4));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("langs = [\"en\"]").is_err());
        assert!(toml::from_str::<FileConfig>("[model]\nepoch = 3").is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let bad = FlagValues { from: Some(2020), to: Some(2010), ..FlagValues::default() };
        assert!(matches!(RunConfig::resolve(FileConfig::default(), bad), Err(Error::Config(_))));
        let file: FileConfig = toml::from_str("[split]\ntrain = 0.5\ntest = 0.1\ndev = 0.1\n").unwrap();
        assert!(RunConfig::resolve(file, FlagValues::default()).is_err());
        let zero = FlagValues { min_count: Some(0), ..FlagValues::default() };
        assert!(RunConfig::resolve(FileConfig::default(), zero).is_err());
    }
}
