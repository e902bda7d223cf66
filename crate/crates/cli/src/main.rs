//! `wikistance` command-line entrypoint.

mod config;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use wikistance::align::{align, AlignOverrides, InterwikiTable};
use wikistance::corpus::{compute_stats, emit_jsonl, lint_records, load_jsonl, render_policy_chart, CorpusRecord, Split};
use wikistance::eval::{confusion, validate_report, EvalReport, Setup, Task};
use wikistance::ingest::{Client, FixtureTransport, HttpTransport, PageCache, SnapshotManifest, WikiSource};
use wikistance::pipeline::{build_corpus, BuildOptions, LanguageInputs};
use wikistance::policies::PolicyRegistry;
use wikistance::textmodels::{
    policy_label, salient_features, LinearTextModel, ModelSpec, ModelTask, PolicySpace,
};
use wikistance::{Error, Language};

use config::{FileConfig, FlagValues, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "wikistance", version, about = "Build and model multilingual deletion-discussion corpora")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML file with run settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Languages, comma separated (en, de, tr)
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_language)]
    lang: Vec<Language>,
    /// First year of discussions to include
    #[arg(long, global = true)]
    from: Option<u16>,
    /// Last year of discussions to include
    #[arg(long, global = true)]
    to: Option<u16>,
    /// Page cache directory
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Serve API requests from a fixture wiki directory instead of the network
    #[arg(long, global = true)]
    fixture: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Never issue network requests; cache misses fail
    #[arg(long, global = true)]
    offline: bool,
    /// Output path (directory for build, file elsewhere)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Minimum mentions for a policy to stay in the registry
    #[arg(long, global = true)]
    min_count: Option<u64>,
    /// Minimum size of the Turkish test split
    #[arg(long, global = true)]
    tr_min_test: Option<usize>,
    /// Use cross-lingual superset policy labels
    #[arg(long, global = true)]
    multilingual: bool,
    #[arg(long, global = true, value_enum)]
    task: Option<TaskArg>,
    /// Log progress to stderr (repeat for more)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TaskArg {
    Stance,
    Policy,
    Joint,
}

impl From<TaskArg> for ModelTask {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Stance => ModelTask::Stance,
            TaskArg::Policy => ModelTask::Policy,
            TaskArg::Joint => ModelTask::Joint,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
    Dev,
    All,
}

impl SplitArg {
    fn keeps(self, split: Split) -> bool {
        match self {
            SplitArg::Train => split == Split::Train,
            SplitArg::Test => split == Split::Test,
            SplitArg::Dev => split == Split::Dev,
            SplitArg::All => true,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fetch archive pages into the cache
    Ingest {
        /// Fetch exactly the revisions listed in this manifest
        #[arg(long)]
        pin: Option<PathBuf>,
    },
    /// Build the corpus: parse, label, resolve policies, align, scrub, split
    Build {
        /// Alignment overrides (`cut(..)=..`, `link(..)=..`)
        #[arg(long)]
        alignment: Option<PathBuf>,
        /// Interwiki TSV used instead of fetched language links
        #[arg(long)]
        interwiki: Option<PathBuf>,
        /// Print tallies of unrecognized vote tokens
        #[arg(long)]
        report_unknown: bool,
        #[arg(long)]
        pin: Option<PathBuf>,
    },
    /// Per-language corpus statistics
    Stats {
        #[arg(long)]
        input: PathBuf,
        /// Build report with parsed-comment counts
        #[arg(long)]
        report: Option<PathBuf>,
        /// Directory for per-language policy charts (SVG)
        #[arg(long)]
        chart: Option<PathBuf>,
    },
    /// Merge policy registries into the superset label space
    Align {
        /// Directory of `<lang>.json` registries written by build
        #[arg(long)]
        registries: PathBuf,
        #[arg(long)]
        interwiki: Option<PathBuf>,
        #[arg(long)]
        alignment: Option<PathBuf>,
    },
    /// Train a TF-IDF linear model on the train split
    Train {
        #[arg(long)]
        input: PathBuf,
    },
    /// Predict labels for corpus records
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Score predictions against gold records
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Most heavily weighted n-grams of a label
    Salient {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(short, long, default_value_t = 20)]
        k: usize,
    },
    /// Report editor names, timestamps or policy links left in comments
    Lint {
        #[arg(long)]
        input: PathBuf,
        /// Exit with a data error when anything is found
        #[arg(long)]
        strict: bool,
    },
}

fn parse_language(s: &str) -> Result<Language, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn data_err(context: &str, e: impl std::fmt::Display) -> Error {
    Error::Data(format!("{context}: {e}"))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| data_err(&parent.display().to_string(), e))?;
    }
    fs::write(path, contents).map_err(|e| data_err(&path.display().to_string(), e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

/// Writes to `--out` when given, stdout otherwise.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_file(path, text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| data_err("stdout", e)),
    }
}

fn client(cfg: &RunConfig) -> Result<Client, Error> {
    let cache = PageCache::new(&cfg.cache);
    if cfg.offline {
        return Ok(Client::offline(cache));
    }
    Ok(match &cfg.fixture {
        Some(dir) => Client::new(cache, Box::new(FixtureTransport::load(dir)?)),
        None => Client::new(cache, Box::new(HttpTransport::new())),
    })
}

fn pinned(client: Client, pin: Option<&Path>) -> Result<Client, Error> {
    Ok(match pin {
        Some(path) => client.with_pinned_manifest(SnapshotManifest::load(path)?),
        None => client,
    })
}

fn load_records(path: &Path, cfg: &RunConfig, split: SplitArg) -> Result<Vec<CorpusRecord>, Error> {
    let records = load_jsonl(path)?;
    Ok(records.into_iter().filter(|r| cfg.languages.contains(&r.language) && split.keeps(r.split)).collect())
}

fn ingest(cfg: &RunConfig, pin: Option<&Path>) -> Result<(), Error> {
    let client = pinned(client(cfg)?, pin)?;
    let mut pages = BTreeMap::new();
    for &language in &cfg.languages {
        let fetched = client.fetch_archive_pages(&WikiSource::for_language(language), cfg.years)?;
        pages.insert(language, fetched.len());
    }
    let manifest = client.manifest();
    let path = cfg.out.clone().unwrap_or_else(|| cfg.cache.join("manifest.json"));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| data_err(&parent.display().to_string(), e))?;
    }
    manifest.save(&path)?;
    let summary = serde_json::json!({
        "pages": pages,
        "requests": client.request_count(),
        "manifest": path,
    });
    emit(None, &to_json(&summary))
}

fn build(cfg: &RunConfig, alignment: Option<&Path>, interwiki: Option<&Path>, report_unknown: bool, pin: Option<&Path>) -> Result<(), Error> {
    let client = pinned(client(cfg)?, pin)?;
    let inputs = cfg
        .languages
        .iter()
        .map(|&l| {
            let mut inputs = LanguageInputs::bundled(l)?;
            if let Some(m) = cfg.min_count {
                inputs.min_count = m;
            }
            Ok(inputs)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let overrides = match alignment {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            AlignOverrides::parse(&text)?
        }
        None => AlignOverrides::default(),
    };
    let table = interwiki.map(InterwikiTable::load).transpose()?;
    let options = BuildOptions { years: cfg.years, plan: cfg.plan };
    let output = build_corpus(&client, &inputs, &options, table, &overrides)?;

    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).map_err(|e| data_err(&out.display().to_string(), e))?;
    emit_jsonl(&output.records, &out.join("corpus.jsonl"), false)?;
    emit_jsonl(&output.records, &out.join("corpus.raw.jsonl"), true)?;
    for registry in &output.registries {
        write_file(&out.join("registries").join(format!("{}.json", registry.language)), &(registry.to_json() + "\n"))?;
    }
    write_file(&out.join("alignment.json"), &(output.alignment.to_json() + "\n"))?;
    write_file(&out.join("interwiki.tsv"), &output.interwiki.to_tsv())?;
    write_file(&out.join("report.json"), &to_json(&output.report))?;
    client.manifest().save(&out.join("manifest.json"))?;

    let mut counts: BTreeMap<Language, usize> = BTreeMap::new();
    for r in &output.records {
        *counts.entry(r.language).or_default() += 1;
    }
    let mut summary = serde_json::json!({
        "records": counts,
        "superset_size": output.alignment.len(),
        "out": out,
    });
    if report_unknown {
        summary["unknown_votes"] = serde_json::to_value(&output.report.unknown_votes.counts).expect("serializes");
    }
    emit(None, &to_json(&summary))
}

#[derive(Deserialize)]
struct ParsedCounts {
    parsed_comments: BTreeMap<Language, u64>,
}

fn stats(cfg: &RunConfig, input: &Path, report: Option<&Path>, chart: Option<&Path>) -> Result<(), Error> {
    let records = load_records(input, cfg, SplitArg::All)?;
    let parsed = match report {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| data_err(&path.display().to_string(), e))?;
            serde_json::from_str::<ParsedCounts>(&text).map_err(|e| data_err(&path.display().to_string(), e))?.parsed_comments
        }
        None => BTreeMap::new(),
    };
    let stats = compute_stats(&records, &parsed);
    if let Some(dir) = chart {
        for (language, s) in &stats.languages {
            write_file(&dir.join(format!("policies_{language}.svg")), &render_policy_chart(*language, s, 15))?;
        }
    }
    emit(cfg.out.as_deref(), &to_json(&stats))
}

fn align_cmd(cfg: &RunConfig, dir: &Path, interwiki: Option<&Path>, alignment: Option<&Path>) -> Result<(), Error> {
    let mut registries = Vec::new();
    for &language in &cfg.languages {
        let path = dir.join(format!("{language}.json"));
        let text = fs::read_to_string(&path).map_err(|e| data_err(&path.display().to_string(), e))?;
        let registry: PolicyRegistry = serde_json::from_str(&text).map_err(|e| data_err(&path.display().to_string(), e))?;
        if registry.language != language {
            return Err(Error::Data(format!("{} holds the {} registry", path.display(), registry.language)));
        }
        registries.push(registry);
    }
    let table = match interwiki {
        Some(path) => InterwikiTable::load(path)?,
        None => InterwikiTable::default(),
    };
    let overrides = match alignment {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            AlignOverrides::parse(&text)?
        }
        None => AlignOverrides::default(),
    };
    let refs: Vec<&PolicyRegistry> = registries.iter().collect();
    let result = align(&refs, &table, &overrides)?;
    emit(cfg.out.as_deref(), &(result.to_json() + "\n"))
}

fn model_spec(cfg: &RunConfig) -> ModelSpec {
    let mut spec = ModelSpec::new(cfg.task);
    spec.policy_space = if cfg.multilingual { PolicySpace::Superset } else { PolicySpace::Local };
    spec.vocabulary = cfg.vocabulary();
    let m = &cfg.model;
    let t = &mut spec.multitask.train;
    t.seed = cfg.seed;
    t.epochs = m.epochs.unwrap_or(t.epochs);
    t.lr = m.lr.unwrap_or(t.lr);
    t.l2 = m.l2.unwrap_or(t.l2);
    t.batch = m.batch.unwrap_or(t.batch);
    t.parallel = m.parallel.unwrap_or(t.parallel);
    spec.multitask.hidden = m.hidden.unwrap_or(spec.multitask.hidden);
    spec
}

fn train(cfg: &RunConfig, input: &Path) -> Result<(), Error> {
    let records = load_records(input, cfg, SplitArg::Train)?;
    let (model, log) = LinearTextModel::<f64>::train(&records, &model_spec(cfg))?;
    let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("model.json"));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| data_err(&parent.display().to_string(), e))?;
    }
    model.save(&path)?;
    let summary = serde_json::json!({
        "model": path,
        "records": records.len(),
        "features": model.vocabulary.len(),
        "log": log,
    });
    emit(None, &to_json(&summary))
}

/// One prediction line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Prediction {
    id: String,
    model: String,
    setup: Setup,
    policy_space: PolicySpace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    policy: Option<String>,
}

fn setup_of(model: &LinearTextModel<f64>) -> Setup {
    let multilingual = model.policy_space == PolicySpace::Superset || model.languages.len() > 1;
    match (multilingual, model.task == ModelTask::Joint) {
        (false, false) => Setup::Single,
        (false, true) => Setup::Multitask,
        (true, false) => Setup::MultilingualSingle,
        (true, true) => Setup::MultilingualMultitask,
    }
}

fn predict(cfg: &RunConfig, model_path: &Path, input: &Path, split: SplitArg) -> Result<(), Error> {
    let model = LinearTextModel::<f64>::load(model_path)?;
    let records = load_records(input, cfg, split)?;
    let name = model_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let setup = setup_of(&model);
    let mut out = String::new();
    for r in &records {
        let guess = |task: Task| -> Result<Option<String>, Error> {
            Ok(if model.task.predicts(task) { Some(model.predict(task, r)?) } else { None })
        };
        let line = Prediction {
            id: r.id.clone(),
            model: name.clone(),
            setup,
            policy_space: model.policy_space,
            stance: guess(Task::Stance)?,
            policy: guess(Task::Policy)?,
        };
        out.push_str(&serde_json::to_string(&line).expect("prediction serializes"));
        out.push('\n');
    }
    emit(cfg.out.as_deref(), &out)
}

fn read_predictions(path: &Path) -> Result<Vec<Prediction>, Error> {
    let file = fs::File::open(path).map_err(|e| data_err(&path.display().to_string(), e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| data_err(&path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| data_err(&format!("{} line {}", path.display(), i + 1), e))?);
    }
    Ok(out)
}

fn eval(cfg: &RunConfig, gold_path: &Path, pred_path: &Path, split: SplitArg) -> Result<(), Error> {
    let task = match cfg.task {
        ModelTask::Stance => Task::Stance,
        ModelTask::Policy => Task::Policy,
        ModelTask::Joint => return Err(Error::Config("eval scores one task at a time: use --task stance or policy".into())),
    };
    let gold = load_records(gold_path, cfg, split)?;
    if gold.is_empty() {
        return Err(Error::Data(format!("no gold records in {}", gold_path.display())));
    }
    let preds = read_predictions(pred_path)?;
    let first = preds.first().ok_or_else(|| Error::Data(format!("no predictions in {}", pred_path.display())))?;
    let (model_id, setup, space) = (first.model.clone(), first.setup, first.policy_space);
    let by_id: HashMap<&str, &Prediction> = preds.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut gold_labels = Vec::with_capacity(gold.len());
    let mut pred_labels = Vec::with_capacity(gold.len());
    for r in &gold {
        let p = by_id.get(r.id.as_str()).ok_or_else(|| Error::Data(format!("no prediction for record {}", r.id)))?;
        let guess = match task {
            Task::Stance => p.stance.clone(),
            Task::Policy => p.policy.clone(),
        };
        let guess = guess.ok_or_else(|| Error::Data(format!("prediction {} has no {} label", r.id, task.as_str())))?;
        gold_labels.push(match task {
            Task::Stance => r.stance.as_str().to_string(),
            Task::Policy => policy_label(r, space),
        });
        pred_labels.push(guess);
    }
    let labels: Vec<String> = match task {
        Task::Stance => wikistance::labels::StanceLabel::ALL.iter().map(|l| l.as_str().to_string()).collect(),
        Task::Policy => gold_labels.iter().chain(&pred_labels).cloned().collect::<BTreeSet<_>>().into_iter().collect(),
    };
    let cm = confusion(&gold_labels, &pred_labels, &labels)?;
    let languages: BTreeSet<Language> = gold.iter().map(|r| r.language).collect();
    let language = match languages.iter().next() {
        Some(l) if languages.len() == 1 => l.to_string(),
        _ => "multi".to_string(),
    };
    let report = EvalReport::from_confusion(task, &language, setup, cm, &model_id, cfg.seed)?;
    validate_report(&report).map_err(|problems| Error::Data(problems.join("; ")))?;
    emit(cfg.out.as_deref(), &to_json(&report))
}

fn salient(cfg: &RunConfig, model_path: &Path, label: &str, k: usize) -> Result<(), Error> {
    let model = LinearTextModel::<f64>::load(model_path)?;
    let head = model
        .head()
        .ok_or_else(|| Error::Config("salient features need a single-task model; joint models share a projection".into()))?;
    let features = salient_features(head, &model.vocabulary, label, k)?;
    emit(cfg.out.as_deref(), &to_json(&features))
}

fn lint(cfg: &RunConfig, input: &Path, strict: bool) -> Result<(), Error> {
    let records = load_records(input, cfg, SplitArg::All)?;
    let findings = lint_records(&records);
    let mut out = String::new();
    for f in &findings {
        out.push_str(&serde_json::to_string(f).expect("finding serializes"));
        out.push('\n');
    }
    emit(cfg.out.as_deref(), &out)?;
    if strict && !findings.is_empty() {
        return Err(Error::Data(format!("{} residues in {} records", findings.len(), records.len())));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let c = cli.common;
    let file = match &c.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = FlagValues {
        lang: c.lang,
        from: c.from,
        to: c.to,
        cache: c.cache,
        fixture: c.fixture,
        seed: c.seed,
        offline: c.offline,
        out: c.out,
        min_count: c.min_count,
        tr_min_test: c.tr_min_test,
        multilingual: c.multilingual,
        task: c.task.map(Into::into),
    };
    let cfg = RunConfig::resolve(file, flags)?;
    log::debug!("{cfg:?}");
    match cli.command {
        Command::Ingest { pin } => ingest(&cfg, pin.as_deref()),
        Command::Build { alignment, interwiki, report_unknown, pin } => {
            build(&cfg, alignment.as_deref(), interwiki.as_deref(), report_unknown, pin.as_deref())
        }
        Command::Stats { input, report, chart } => stats(&cfg, &input, report.as_deref(), chart.as_deref()),
        Command::Align { registries, interwiki, alignment } => {
            align_cmd(&cfg, &registries, interwiki.as_deref(), alignment.as_deref())
        }
        Command::Train { input } => train(&cfg, &input),
        Command::Predict { model, input, split } => predict(&cfg, &model, &input, split),
        Command::Eval { gold, pred, split } => eval(&cfg, &gold, &pred, split),
        Command::Salient { model, label, k } => salient(&cfg, &model, &label, k),
        Command::Lint { input, strict } => lint(&cfg, &input, strict),
    }
}

fn report_error(kind: &str, code: i32, message: &str) -> ExitCode {
    let body = serde_json::json!({ "error": { "kind": kind, "code": code, "message": message } });
    eprintln!("{body}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report_error("config", 2, e.to_string().trim()),
    };
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            report_error(kind.as_str(), kind.exit_code(), &e.to_string())
        }
    }
}
