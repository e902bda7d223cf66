mod common;

use wikistance::corpus::{load_jsonl, write_jsonl};
use wikistance::wikitext::{extract_policy_links, PolicyPrefixSet};

#[test]
fn fixture_matches_golden() {
    let out = common::build_fixture();
    let golden = load_jsonl(&common::fixtures().join("pipeline_golden.jsonl")).unwrap();
    let mut ours = Vec::new();
    write_jsonl(&out.records, &mut ours, true).unwrap();
    let mut theirs = Vec::new();
    write_jsonl(&golden, &mut theirs, true).unwrap();
    assert_eq!(String::from_utf8(ours).unwrap(), String::from_utf8(theirs).unwrap());
}

#[test]
fn scrubbed_comments_cite_nothing() {
    let out = common::build_fixture();
    for r in &out.records {
        assert!(extract_policy_links(&r.comment, &PolicyPrefixSet::for_language(r.language)).is_empty(), "{}", r.comment);
    }
}
