//! End-to-end corpus construction: archive pages to split corpus records.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{align, AlignOverrides, InterwikiTable, PolicyAlignment};
use crate::corpus::{anonymize, assign_splits, make_topic, record_id, scrub_policy_mentions, CorpusRecord, Split, SplitPlan};
use crate::ingest::{Client, WikiSource};
use crate::labels::{StanceLexicon, UnknownVotes};
use crate::lang::{normalize_title, Language};
use crate::policies::{build_merge_map, select_primary_policy, Curation, PolicyRegistry};
use crate::wikitext::{parse_archive, PolicyPrefixSet, RawComment, RawDiscussion};
use crate::Error;

/// Everything needed to build one language.
#[derive(Debug, Clone)]
pub struct LanguageInputs {
    pub source: WikiSource,
    pub curation: Curation,
    pub lexicon: StanceLexicon,
    pub prefixes: PolicyPrefixSet,
    pub topic_overrides: BTreeMap<String, String>,
    pub min_count: u64,
}

impl LanguageInputs {
    /// Default source, bundled curation and lexicon, default threshold.
    pub fn bundled(language: Language) -> Result<Self, Error> {
        Ok(Self {
            source: WikiSource::for_language(language),
            curation: Curation::bundled(language),
            lexicon: crate::labels::load_lexicon(language)?,
            prefixes: PolicyPrefixSet::for_language(language),
            topic_overrides: BTreeMap::new(),
            min_count: crate::policies::default_min_count(language),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub years: [u16; 2],
    pub plan: SplitPlan,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub parsed_comments: BTreeMap<Language, u64>,
    pub discussions: BTreeMap<Language, u64>,
    /// Discard counts by reason: `no_vote`, `unknown_token`, `ambiguous`, `no_policy`.
    pub discards: BTreeMap<Language, BTreeMap<String, u64>>,
    pub unknown_votes: UnknownVotes,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub records: Vec<CorpusRecord>,
    pub registries: Vec<PolicyRegistry>,
    pub alignment: PolicyAlignment,
    pub interwiki: InterwikiTable,
    pub report: BuildReport,
}

/// Fetches and parses every archive page in range, in page order.
pub fn collect_discussions(client: &Client, source: &WikiSource, years: [u16; 2]) -> Result<Vec<RawDiscussion>, Error> {
    let pages = client.fetch_archive_pages(source, years)?;
    Ok(pages.par_iter().flat_map_iter(parse_archive).collect())
}

/// Resolves every cited target and builds the curated registry.
pub fn build_registry(client: &Client, inputs: &LanguageInputs, discussions: &[RawDiscussion]) -> Result<PolicyRegistry, Error> {
    let language = inputs.source.language;
    let comment_targets: Vec<Vec<String>> = discussions
        .iter()
        .flat_map(|d| d.comments.iter().map(|c| c.policy_targets.clone()))
        .collect();
    let unique: Vec<String> = comment_targets
        .iter()
        .flatten()
        .map(|t| normalize_title(language, t))
        .filter(|t| !t.is_empty())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut redirect_map = BTreeMap::new();
    if !unique.is_empty() {
        for r in client.resolve_titles(&inputs.source, &unique)? {
            if let Some(resolved) = r.resolved_title {
                let resolved = normalize_title(language, &resolved);
                if resolved != r.raw_target {
                    redirect_map.insert(r.raw_target, resolved);
                }
            }
        }
    }

    let children: Vec<String> = inputs.curation.merges.keys().cloned().collect();
    let texts: BTreeMap<String, String> = if children.is_empty() {
        BTreeMap::new()
    } else {
        client
            .fetch_pages(&inputs.source, &children)?
            .into_iter()
            .map(|p| (normalize_title(language, &p.title), p.wikitext))
            .collect()
    };
    let pages = inputs.curation.pages(language, &texts);
    let merge_map = build_merge_map(&pages, &inputs.curation, &redirect_map)?;
    Ok(PolicyRegistry::build(language, &comment_targets, redirect_map, merge_map, &inputs.curation, inputs.min_count)?)
}

/// Why a parsed comment yielded no record.
fn discard_reason(
    comment: &RawComment,
    lexicon: &StanceLexicon,
    registry: &PolicyRegistry,
) -> Result<(crate::labels::StanceLabel, String), &'static str> {
    let stance = lexicon.normalize(comment.vote_raw.as_deref()).map_err(|r| r.as_str())?;
    let policies = registry.canonicalize_all(&comment.policy_targets);
    let policy = select_primary_policy(&policies).ok_or("no_policy")?;
    Ok((stance, policy.clone()))
}

/// Comment text with the bold vote, signatures and timestamps removed.
/// Returns the raw variant and the policy-scrubbed variant.
pub fn comment_variants(comment: &RawComment, prefixes: &PolicyPrefixSet) -> (String, String) {
    let mut spans: Vec<_> = comment.signature_spans.iter().chain(&comment.timestamp_spans).copied().collect();
    spans.extend(comment.vote_span);
    let raw = anonymize(&comment.text, &spans);
    let scrubbed = scrub_policy_mentions(&raw, prefixes);
    (raw, scrubbed)
}

/// Turns parsed discussions into records (split unassigned, marked train).
pub fn make_records(
    inputs: &LanguageInputs,
    discussions: &[RawDiscussion],
    registry: &PolicyRegistry,
    alignment: &PolicyAlignment,
    report: &mut BuildReport,
) -> Result<Vec<CorpusRecord>, Error> {
    let language = inputs.source.language;
    type Outcome = Result<CorpusRecord, (&'static str, Option<String>)>;
    let outcomes: Vec<Outcome> = discussions
        .par_iter()
        .flat_map_iter(|d| {
            d.comments.iter().enumerate().map(move |(i, c)| {
                let (stance, policy) = discard_reason(c, &inputs.lexicon, registry)
                    .map_err(|reason| (reason, c.vote_raw.clone()))?;
                let (raw, scrubbed) = comment_variants(c, &inputs.prefixes);
                Ok(CorpusRecord {
                    id: record_id(language, &d.article_title, i),
                    language,
                    topic: make_topic(&d.article_title, language, Some(&inputs.topic_overrides)),
                    comment: scrubbed,
                    comment_raw: Some(raw),
                    stance,
                    policy_superset_id: 0,
                    policy,
                    split: Split::Train,
                })
            })
        })
        .collect();

    *report.parsed_comments.entry(language).or_default() += outcomes.len() as u64;
    *report.discussions.entry(language).or_default() += discussions.len() as u64;
    let mut records = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(mut r) => {
                r.policy_superset_id = alignment.project(language, &r.policy)?;
                records.push(r);
            }
            Err((reason, vote)) => {
                *report.discards.entry(language).or_default().entry(reason.to_string()).or_default() += 1;
                if let ("unknown_token", Some(v)) = (reason, vote) {
                    report.unknown_votes.record(language, &v);
                }
            }
        }
    }
    Ok(records)
}

/// Builds all requested languages: parse, resolve, register, align, label,
/// scrub and split. `interwiki` replaces the fetched language links when given.
pub fn build_corpus(
    client: &Client,
    languages: &[LanguageInputs],
    options: &BuildOptions,
    interwiki: Option<InterwikiTable>,
    overrides: &AlignOverrides,
) -> Result<BuildOutput, Error> {
    options.plan.validate()?;
    let mut parsed = Vec::new();
    for inputs in languages {
        let discussions = collect_discussions(client, &inputs.source, options.years)?;
        let registry = build_registry(client, inputs, &discussions)?;
        log::info!(
            target: "pipeline",
            "{}: {} discussions, {} canonical policies",
            inputs.source.language,
            discussions.len(),
            registry.canonical.len()
        );
        parsed.push((inputs, discussions, registry));
    }

    let interwiki = match interwiki {
        Some(table) => table,
        None if languages.len() > 1 => {
            let mut table = InterwikiTable::default();
            for (inputs, _, registry) in &parsed {
                let titles: Vec<String> = registry.canonical.iter().cloned().collect();
                if !titles.is_empty() {
                    table.extend_from_fetch(registry.language, &client.fetch_interwiki(&inputs.source, &titles)?);
                }
            }
            table
        }
        None => InterwikiTable::default(),
    };
    let registries: Vec<&PolicyRegistry> = parsed.iter().map(|(_, _, r)| r).collect();
    let alignment = align(&registries, &interwiki, overrides)?;

    let mut report = BuildReport::default();
    let mut records = Vec::new();
    for (inputs, discussions, registry) in &parsed {
        records.extend(make_records(inputs, discussions, registry, &alignment, &mut report)?);
    }
    assign_splits(&mut records, &options.plan)?;
    Ok(BuildOutput {
        records,
        registries: parsed.into_iter().map(|(_, _, r)| r).collect(),
        alignment,
        interwiki,
        report,
    })
}
