use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{CorpusRecord, Split};
use crate::labels::StanceLabel;
use crate::lang::Language;

pub const TOP_POLICIES: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyShare {
    pub policy: String,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub records: u64,
    pub parsed_comments: u64,
    /// Records over all parsed comments.
    pub mention_rate: f64,
    pub stance_counts: BTreeMap<StanceLabel, u64>,
    pub policy_counts: BTreeMap<String, u64>,
    pub policy_count: usize,
    pub mean_comment_chars: f64,
    pub split_counts: BTreeMap<Split, u64>,
    pub top_policies: Vec<PolicyShare>,
}

impl LanguageStats {
    pub fn stance_share(&self, label: StanceLabel) -> f64 {
        if self.records == 0 {
            return 0.0;
        }
        self.stance_counts.get(&label).copied().unwrap_or(0) as f64 / self.records as f64
    }

    /// Most cited policies, ties by title.
    pub fn top_policies(&self, k: usize) -> Vec<PolicyShare> {
        let mut all: Vec<(&String, &u64)> = self.policy_counts.iter().collect();
        all.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
        all.into_iter()
            .take(k)
            .map(|(policy, &count)| PolicyShare {
                policy: policy.clone(),
                count,
                share: if self.records == 0 { 0.0 } else { count as f64 / self.records as f64 },
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub languages: BTreeMap<Language, LanguageStats>,
}

/// Per-language statistics. `parsed_comments` counts every comment parsed
/// before filtering, keyed by language; missing entries count as zero.
pub fn compute_stats(records: &[CorpusRecord], parsed_comments: &BTreeMap<Language, u64>) -> DatasetStats {
    let mut grouped: BTreeMap<Language, Vec<&CorpusRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.language).or_default().push(r);
    }
    let languages = grouped
        .into_iter()
        .map(|(language, recs)| {
            let n = recs.len() as u64;
            let parsed = parsed_comments.get(&language).copied().unwrap_or(0);
            let mut stance_counts: BTreeMap<StanceLabel, u64> = StanceLabel::ALL.iter().map(|l| (*l, 0)).collect();
            let mut policy_counts: BTreeMap<String, u64> = BTreeMap::new();
            let mut split_counts: BTreeMap<Split, u64> = Split::ALL.iter().map(|s| (*s, 0)).collect();
            let mut chars = 0u64;
            for r in &recs {
                *stance_counts.entry(r.stance).or_default() += 1;
                *policy_counts.entry(r.policy.clone()).or_default() += 1;
                *split_counts.entry(r.split).or_default() += 1;
                chars += r.comment.chars().count() as u64;
            }
            let mut stats = LanguageStats {
                records: n,
                parsed_comments: parsed,
                mention_rate: if parsed == 0 { 0.0 } else { (n as f64 / parsed as f64).min(1.0) },
                stance_counts,
                policy_count: policy_counts.len(),
                policy_counts,
                mean_comment_chars: chars as f64 / n as f64,
                split_counts,
                top_policies: Vec::new(),
            };
            stats.top_policies = stats.top_policies(TOP_POLICIES);
            (language, stats)
        })
        .collect();
    DatasetStats { languages }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Horizontal bar chart of the most cited policies as SVG.
pub fn render_policy_chart(language: Language, stats: &LanguageStats, k: usize) -> String {
    let top = stats.top_policies(k);
    let (row, label_w, bar_w) = (22.0, 300.0, 360.0);
    let height = 40.0 + row * top.len() as f64;
    let max = top.first().map_or(1, |p| p.count).max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="12">"#,
        label_w + bar_w + 60.0
    );
    let _ = writeln!(svg, r#"<text x="4" y="18" font-weight="bold">Most cited policies ({language})</text>"#);
    for (i, p) in top.iter().enumerate() {
        let y = 30.0 + row * i as f64;
        let w = bar_w * p.count as f64 / max;
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text><rect x="{label_w}" y="{y:.1}" width="{w:.1}" height="{:.1}" fill="#4878a8"/><text x="{:.1}" y="{:.1}">{:.1}%</text>"##,
            label_w - 6.0,
            y + 14.0,
            escape(&p.policy),
            row - 6.0,
            label_w + w + 4.0,
            y + 14.0,
            p.share * 100.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
