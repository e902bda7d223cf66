//! Label distributions of the published corpus snapshot and synthetic
//! records drawn from them, for baseline checks without network access.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{assign_splits, record_id, CorpusRecord, Split, SplitPlan};
use crate::labels::StanceLabel;
use crate::lang::Language;

/// Stance counts per language in `StanceLabel::ALL` order (comment, delete, keep, merge).
pub fn stance_counts(language: Language) -> [u64; 4] {
    match language {
        Language::En => [30_974, 279_063, 108_273, 19_460],
        Language::De => [395, 4_805, 3_394, 43],
        Language::Tr => [224, 433, 252, 21],
    }
}

pub fn stance_proportions(language: Language) -> [f64; 4] {
    let counts = stance_counts(language);
    let total: u64 = counts.iter().sum();
    counts.map(|c| c as f64 / total as f64)
}

/// Published train/test/dev sizes.
pub fn split_sizes(language: Language) -> [usize; 3] {
    match language {
        Language::En => [372_033, 43_776, 21_961],
        Language::De => [7_320, 862, 455],
        Language::Tr => [684, 202, 44],
    }
}

/// Number of canonical policies after curation and thresholding.
pub fn policy_label_count(language: Language) -> usize {
    match language {
        Language::En => 94,
        Language::De => 48,
        Language::Tr => 33,
    }
}

/// Share of comments whose policy is the notability page.
pub fn notability_share(language: Language) -> f64 {
    match language {
        Language::En => 0.56,
        Language::De => 0.45,
        Language::Tr => 0.59,
    }
}

/// Notability at index 0 with its share; the rest decays as 1/rank.
pub fn policy_proportions(language: Language) -> Vec<f64> {
    let c = policy_label_count(language);
    let head = notability_share(language);
    let tail: Vec<f64> = (1..c).map(|r| 1.0 / r as f64).collect();
    let z: f64 = tail.iter().sum();
    std::iter::once(head).chain(tail.iter().map(|t| (1.0 - head) * t / z)).collect()
}

/// Per-label counts summing to `n`, by largest remainder (ties to the lower index).
pub fn quota_counts(proportions: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = proportions.iter().sum();
    let exact: Vec<f64> = proportions.iter().map(|p| p / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Exactly quota-matched labels in seeded random order.
pub fn quota_labels(proportions: &[f64], n: usize, seed: u64) -> Vec<usize> {
    let mut labels: Vec<usize> =
        quota_counts(proportions, n).into_iter().enumerate().flat_map(|(i, c)| std::iter::repeat_n(i, c)).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    labels
}

const DELETE_CUES: &[&str] = &[
    "not enough coverage in reliable sources",
    "fails the general guideline",
    "fails to show significance",
    "there is not enough here",
    "reads like an advertisement",
    "no independent sources found",
    "only trivial mentions",
];
const KEEP_CUES: &[&str] = &[
    "clearly passes the guideline",
    "easily passes with the sources above",
    "has received significant coverage",
    "meets the criteria with major awards",
    "sources added during the discussion are solid",
];
const MERGE_CUES: &[&str] = &[
    "merge into the parent article",
    "redirect to the band page",
    "better covered in the main article",
    "redundant with the existing list",
];
const COMMENT_CUES: &[&str] = &[
    "question for the nominator",
    "note that this was relisted",
    "for the record i am neutral",
    "just a comment on the sourcing history",
];
const FILLER: &[&str] = &[
    "the article was created last year",
    "i looked at the history",
    "the references section has a few links",
    "as per the discussion above",
    "the subject is a local company",
    "see the talk page",
    "this has been tagged for months",
    "the author is a new editor",
];
const NAMES: &[&str] = &[
    "Motivational press", "Rhein Valley Express", "Blue Harbor FC", "Anna Keller", "Northgate Mall",
    "The Fader Sessions", "Kestrel Software", "Lake Moreno", "Sabine Ortiz", "Copperline Records",
];
const POLICIES: &[&str] = &[
    "Wikipedia:Notability",
    "Wikipedia:Verifiability",
    "Wikipedia:Reliable sources",
    "Wikipedia:What Wikipedia is not",
    "Wikipedia:Neutral point of view",
];

fn cues(label: StanceLabel) -> &'static [&'static str] {
    match label {
        StanceLabel::Comment => COMMENT_CUES,
        StanceLabel::Delete => DELETE_CUES,
        StanceLabel::Keep => KEEP_CUES,
        StanceLabel::Merge => MERGE_CUES,
    }
}

/// English records whose stance follows the published proportions. Most
/// comments carry a cue phrase typical of their stance plus shared filler;
/// `cue_rate` of them do, the rest are filler only.
pub fn synthetic_english(n: usize, seed: u64, cue_rate: f64) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stances = quota_labels(&stance_proportions(Language::En), n, seed);
    let policy_props = [notability_share(Language::En), 0.14, 0.12, 0.1, 0.08];
    let policies = quota_labels(&policy_props, n, seed.wrapping_add(1));
    let mut records: Vec<CorpusRecord> = stances
        .iter()
        .zip(&policies)
        .enumerate()
        .map(|(i, (&s, &p))| {
            let stance = StanceLabel::from_index(s).expect("four stance labels");
            let mut parts: Vec<&str> = FILLER.choose_multiple(&mut rng, 2).copied().collect();
            if rng.random_bool(cue_rate) {
                parts.insert(rng.random_range(0..=parts.len()), cues(stance).choose(&mut rng).expect("non-empty"));
            }
            let name = format!("{} {}", NAMES.choose(&mut rng).expect("non-empty"), i);
            CorpusRecord {
                id: record_id(Language::En, &name, i),
                language: Language::En,
                topic: format!("Deletion of {name}"),
                comment: parts.join(". "),
                comment_raw: None,
                stance,
                policy: POLICIES[p].to_string(),
                policy_superset_id: p as u32,
                split: Split::Train,
            }
        })
        .collect();
    assign_splits(&mut records, &SplitPlan::with_seed(seed)).expect("default plan is valid");
    records
}
