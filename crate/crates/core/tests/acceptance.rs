//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wikistance::align::{align, AlignOverrides, InterwikiTable};
use wikistance::corpus::{assign_splits, load_jsonl, record_id, write_jsonl, CorpusRecord, Split, SplitPlan};
use wikistance::eval::{accuracy, macro_f1, per_label_f1, ConfusionMatrix, Task};
use wikistance::labels::StanceLabel;
use wikistance::synth::{
    notability_share, policy_label_count, policy_proportions, quota_labels, split_sizes, stance_proportions,
    synthetic_english,
};
use wikistance::textmodels::{
    baseline_majority, baseline_random, multitask_gradient, multitask_objective, salient_features,
    softmax_gradient, softmax_objective, train_multitask, FeatureVector, LinearTextModel, ModelSpec, ModelTask,
    MultiTaskConfig, MultiTaskLinearModel, SoftmaxHead, TaskSchedule, TrainConfig,
};
use wikistance::wikitext::{extract_policy_links, PolicyPrefixSet};
use wikistance::Language;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("l{i}")).collect()
}

// Independent oracles.

fn majority_closed_form(p: f64) -> f64 {
    2.0 * p / ((1.0 + p) * 4.0)
}

fn random_expected_f1(props: &[f64]) -> f64 {
    let q = 1.0 / props.len() as f64;
    props.iter().map(|&p| 2.0 * p * q / (p + q)).sum::<f64>() / props.len() as f64
}

/// Macro-F1 and accuracy straight from label pairs, one label at a time.
fn naive_scores(k: usize, gold: &[usize], pred: &[usize]) -> (f64, f64) {
    let mut f1_sum = 0.0;
    for label in 0..k {
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for i in 0..gold.len() {
            if pred[i] == label && gold[i] == label {
                tp += 1.0;
            } else if pred[i] == label {
                fp += 1.0;
            } else if gold[i] == label {
                fn_ += 1.0;
            }
        }
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        f1_sum += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    }
    let mut correct = 0.0;
    for i in 0..gold.len() {
        if gold[i] == pred[i] {
            correct += 1.0;
        }
    }
    (f1_sum / k as f64, correct / gold.len() as f64)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn stance_f1(gold: &[usize], pred: &[usize]) -> f64 {
    let cm = ConfusionMatrix::from_indices(names(4), gold, pred).unwrap();
    macro_f1(&cm).unwrap()
}

// Criteria.

fn majority_stance() -> Check {
    let paper = [0.19, 0.18, 0.15];
    let mut parts = Vec::new();
    for (lang, paper) in Language::ALL.into_iter().zip(paper) {
        let props = stance_proportions(lang);
        let [train_n, test_n, _] = split_sizes(lang);
        let train = quota_labels(&props, train_n, 1);
        let gold = quota_labels(&props, test_n, 2);
        let majority = baseline_majority(&train, 4).unwrap();
        ensure(majority == StanceLabel::Delete.index(), || format!("{lang}: majority is label {majority}"))?;
        let f1 = stance_f1(&gold, &vec![majority; gold.len()]);
        let closed = majority_closed_form(props[majority]);
        ensure((f1 - closed).abs() <= 0.01, || format!("{lang}: {f1:.4} vs closed form {closed:.4}"))?;
        ensure((f1 - paper).abs() <= 0.02, || format!("{lang}: {f1:.4} vs reported {paper}"))?;
        parts.push(format!("{lang} {f1:.3} (closed {closed:.3}, reported {paper})"));
    }
    Ok(parts.join("; "))
}

fn random_stance() -> Check {
    let paper = [0.20, 0.19, 0.17];
    let mut parts = Vec::new();
    for (lang, paper) in Language::ALL.into_iter().zip(paper) {
        let props = stance_proportions(lang);
        let gold = quota_labels(&props, split_sizes(lang)[1], 3);
        let mean = (0..1000u64)
            .into_par_iter()
            .map(|seed| stance_f1(&gold, &baseline_random(4, gold.len(), seed)))
            .sum::<f64>()
            / 1000.0;
        let formula = random_expected_f1(&props);
        ensure((mean - formula).abs() <= 0.01, || format!("{lang}: mean {mean:.4} vs formula {formula:.4}"))?;
        let slack = if lang == Language::Tr { 0.05 } else { 0.02 };
        ensure((formula - paper).abs() <= slack, || format!("{lang}: formula {formula:.4} vs reported {paper}"))?;
        ensure((mean - paper).abs() <= slack, || format!("{lang}: mean {mean:.4} vs reported {paper}"))?;
        parts.push(format!("{lang} {mean:.3} (formula {formula:.3}, reported {paper})"));
    }
    Ok(parts.join("; "))
}

fn policy_baselines() -> Check {
    let paper_majority = [0.55, 0.45, 0.62];
    let paper_random = [0.011, 0.021, 0.030];
    let n = 10_000;
    let mut parts = Vec::new();
    for (i, lang) in Language::ALL.into_iter().enumerate() {
        let c = policy_label_count(lang);
        let props = policy_proportions(lang);
        let train = quota_labels(&props, n, 4);
        let gold = quota_labels(&props, n, 5);
        let majority = baseline_majority(&train, c).unwrap();
        ensure(majority == 0, || format!("{lang}: majority policy is {majority}, not notability"))?;
        let cm = ConfusionMatrix::from_indices(names(c), &gold, &vec![majority; n]).unwrap();
        let acc: f64 = accuracy(&cm).unwrap();
        ensure((acc - notability_share(lang)).abs() < 1e-9, || format!("{lang}: accuracy {acc} off the share"))?;
        let gap = (acc - paper_majority[i]).abs();
        ensure(gap <= 0.03 + 1e-9, || format!("{lang}: majority {acc:.4} vs reported {}", paper_majority[i]))?;

        let analytic = 1.0 / c as f64;
        ensure((analytic - paper_random[i]).abs() <= 0.005, || format!("{lang}: 1/C {analytic:.4}"))?;
        let mean = (0..200u64)
            .into_par_iter()
            .map(|seed| {
                let pred = baseline_random(c, n, seed);
                let cm = ConfusionMatrix::from_indices(names(c), &gold, &pred).unwrap();
                accuracy::<f64>(&cm).unwrap()
            })
            .sum::<f64>()
            / 200.0;
        ensure((mean - analytic).abs() <= 0.005, || format!("{lang}: random mean {mean:.4} vs 1/C {analytic:.4}"))?;
        parts.push(format!("{lang} majority {acc:.3} random {mean:.4} (1/C {analytic:.4})"));
    }
    Ok(parts.join("; "))
}

fn eval_oracle() -> Check {
    let counts = vec![
        vec![1083, 1121, 866, 22],
        vec![188, 27092, 498, 112],
        vec![182, 795, 9830, 51],
        vec![19, 456, 150, 1311],
    ];
    let labels = StanceLabel::ALL.iter().map(|l| l.as_str().to_string()).collect();
    let cm = ConfusionMatrix::from_counts(labels, counts);
    let f1 = per_label_f1::<f64>(&cm);
    let expected = [0.47, 0.94, 0.89, 0.76];
    for (i, (got, want)) in f1.iter().zip(expected).enumerate() {
        ensure((got - want).abs() <= 0.005, || format!("{}: {got:.4} vs {want}", StanceLabel::ALL[i].as_str()))?;
    }
    Ok(format!("per-label F1 {:.3} {:.3} {:.3} {:.3}", f1[0], f1[1], f1[2], f1[3]))
}

fn metric_brute_force() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(2..8);
        let n = rng.random_range(1..400);
        let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let pred: Vec<usize> =
            gold.iter().map(|&g| if rng.random_bool(0.5) { g } else { rng.random_range(0..k) }).collect();
        let cm = ConfusionMatrix::from_indices(names(k), &gold, &pred).unwrap();
        let (f1, acc) = naive_scores(k, &gold, &pred);
        let got_f1: f64 = macro_f1(&cm).unwrap();
        let got_acc: f64 = accuracy(&cm).unwrap();
        worst = worst.max((got_f1 - f1).abs()).max((got_acc - acc).abs());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 instances, max deviation {worst:.1e}"))
}

fn random_features(rng: &mut ChaCha8Rng, dim: usize) -> FeatureVector<f64> {
    let dense: Vec<f64> =
        (0..dim).map(|_| if rng.random_bool(0.6) { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
    FeatureVector::from_dense(&dense)
}

fn numeric(f: &mut dyn FnMut(f64) -> f64, x0: f64) -> f64 {
    let h = 1e-5;
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}

fn gradient_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst_softmax: f64 = 0.0;
    let mut worst_multi: f64 = 0.0;
    for _ in 0..20 {
        let dim = rng.random_range(2..7);
        let c = rng.random_range(2..5);
        let n = rng.random_range(2..8);
        let l2 = rng.random_range(0.0..0.1);
        let xs: Vec<_> = (0..n).map(|_| random_features(&mut rng, dim)).collect();
        let ys: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();

        let mut head = SoftmaxHead::<f64>::zeros(names(c), dim);
        head.weights.iter_mut().for_each(|w| *w = rng.random_range(-1.0..1.0));
        head.bias.iter_mut().for_each(|b| *b = rng.random_range(-1.0..1.0));
        let (dw, db) = softmax_gradient(&head, &xs, &ys, l2);
        for i in 0..head.weights.len() {
            let w0 = head.weights[i];
            let num = numeric(
                &mut |v| {
                    let mut h = head.clone();
                    h.weights[i] = v;
                    softmax_objective(&h, &xs, &ys, l2)
                },
                w0,
            );
            worst_softmax = worst_softmax.max(rel_err(dw[i], num));
        }
        for i in 0..head.bias.len() {
            let num = numeric(
                &mut |v| {
                    let mut h = head.clone();
                    h.bias[i] = v;
                    softmax_objective(&h, &xs, &ys, l2)
                },
                head.bias[i],
            );
            worst_softmax = worst_softmax.max(rel_err(db[i], num));
        }

        let hidden = rng.random_range(2..5);
        let p = rng.random_range(2..5);
        let yp: Vec<usize> = (0..n).map(|_| rng.random_range(0..p)).collect();
        let mut model = MultiTaskLinearModel::<f64>::init(
            dim,
            hidden,
            names(c),
            names(p),
            TaskSchedule::default(),
            0.8,
            rng.random(),
        );
        for task in [Task::Stance, Task::Policy] {
            let h = model.head_mut(task);
            h.weights.iter_mut().for_each(|w| *w = rng.random_range(-1.0..1.0));
            h.bias.iter_mut().for_each(|b| *b = rng.random_range(-1.0..1.0));
        }
        for (task, labels) in [(Task::Stance, &ys), (Task::Policy, &yp)] {
            let g = multitask_gradient(&model, task, &xs, labels, l2);
            for i in 0..model.projection.len() {
                let num = numeric(
                    &mut |v| {
                        let mut m = model.clone();
                        m.projection[i] = v;
                        multitask_objective(&m, task, &xs, labels, l2)
                    },
                    model.projection[i],
                );
                worst_multi = worst_multi.max(rel_err(g.projection[i], num));
            }
            for i in 0..model.head(task).weights.len() {
                let num = numeric(
                    &mut |v| {
                        let mut m = model.clone();
                        m.head_mut(task).weights[i] = v;
                        multitask_objective(&m, task, &xs, labels, l2)
                    },
                    model.head(task).weights[i],
                );
                worst_multi = worst_multi.max(rel_err(g.head_weights[i], num));
            }
            for i in 0..model.head(task).bias.len() {
                let num = numeric(
                    &mut |v| {
                        let mut m = model.clone();
                        m.head_mut(task).bias[i] = v;
                        multitask_objective(&m, task, &xs, labels, l2)
                    },
                    model.head(task).bias[i],
                );
                worst_multi = worst_multi.max(rel_err(g.head_bias[i], num));
            }
        }
    }
    ensure(worst_softmax < 1e-4, || format!("softmax max relative error {worst_softmax:e}"))?;
    ensure(worst_multi < 1e-4, || format!("multi-task max relative error {worst_multi:e}"))?;
    Ok(format!("20 problems, max relative error softmax {worst_softmax:.1e}, multi-task {worst_multi:.1e}"))
}

fn mtl_schedule() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let xs: Vec<_> = (0..40).map(|_| random_features(&mut rng, 6)).collect();
    let ys: Vec<usize> = (0..40).map(|i| i % 4).collect();
    let yp: Vec<usize> = (0..40).map(|i| i % 3).collect();
    let config = MultiTaskConfig {
        hidden: 4,
        max_steps: Some(4000),
        train: TrainConfig { batch: 8, ..TrainConfig::default() },
        ..MultiTaskConfig::default()
    };
    let (_, log) = train_multitask(&xs, &ys, &yp, names(4), names(3), 6, &config).unwrap();
    ensure(log.stance_updates == 3000 && log.policy_updates == 1000, || {
        format!("{} stance / {} policy updates", log.stance_updates, log.policy_updates)
    })?;
    Ok(format!("{} stance / {} policy updates", log.stance_updates, log.policy_updates))
}

fn pipeline_fidelity() -> Check {
    let out = common::build_fixture();
    let parsed: u64 = out.report.parsed_comments.values().sum();
    ensure(parsed == 30, || format!("{parsed} parsed comments"))?;
    let golden = load_jsonl(&common::fixtures().join("pipeline_golden.jsonl")).unwrap();
    let render = |records: &[CorpusRecord]| {
        let mut buf = Vec::new();
        write_jsonl(records, &mut buf, true).unwrap();
        String::from_utf8(buf).unwrap()
    };
    ensure(render(&out.records) == render(&golden), || "records differ from the golden file".into())?;
    ensure(out.records.iter().any(|r| r.topic == "Ferec'in silinmesi"), || "Turkish topic missing".into())?;
    for r in &out.records {
        let leaked = extract_policy_links(&r.comment, &PolicyPrefixSet::for_language(r.language));
        ensure(leaked.is_empty(), || format!("{} still cites {leaked:?}", r.id))?;
    }
    Ok(format!("{parsed} comments, {} records equal golden, no leakage", out.records.len()))
}

fn alignment() -> Check {
    let regs = common::align_registries();
    let sizes: Vec<usize> = regs.iter().map(|r| r.canonical.len()).collect();
    ensure(sizes == [94, 48, 33], || format!("registry sizes {sizes:?}"))?;
    let refs: Vec<_> = regs.iter().collect();
    let linked = align(&refs, &common::align_interwiki(), &AlignOverrides::default()).unwrap();
    let unlinked = align(&refs, &InterwikiTable::default(), &AlignOverrides::default()).unwrap();
    ensure(linked.identifications() == 59, || format!("{} identifications", linked.identifications()))?;
    ensure(linked.len() == 116, || format!("superset {}", linked.len()))?;
    ensure(unlinked.len() == 175, || format!("unlinked superset {}", unlinked.len()))?;
    Ok(format!("superset {} with 59 identifications, {} without links", linked.len(), unlinked.len()))
}

fn split_records(language: Language, n: usize) -> Vec<CorpusRecord> {
    (0..n)
        .map(|i| CorpusRecord {
            id: record_id(language, &format!("Article {}", i / 7), i % 7),
            language,
            topic: String::new(),
            comment: String::new(),
            comment_raw: None,
            stance: StanceLabel::Delete,
            policy: String::new(),
            policy_superset_id: 0,
            split: Split::Train,
        })
        .collect()
}

fn splits() -> Check {
    let plan = SplitPlan::with_seed(42);
    let mut parts = Vec::new();
    for (lang, n) in [(Language::En, 20_000), (Language::De, 8_637)] {
        let mut records = split_records(lang, n);
        assign_splits(&mut records, &plan).unwrap();
        let count = |s| records.iter().filter(|r| r.split == s).count() as f64;
        for (split, ratio) in [(Split::Train, 0.80), (Split::Test, 0.15), (Split::Dev, 0.05)] {
            let want = ratio * n as f64;
            ensure((count(split) - want).abs() <= 1.0, || format!("{lang} {split:?}: {} vs {want}", count(split)))?;
        }
        parts.push(format!("{lang} {}/{}/{}", count(Split::Train), count(Split::Test), count(Split::Dev)));
    }
    let mut tr = split_records(Language::Tr, 930);
    assign_splits(&mut tr, &plan).unwrap();
    let test = tr.iter().filter(|r| r.split == Split::Test).count();
    ensure(test >= 200, || format!("tr test {test}"))?;
    parts.push(format!("tr test {test}"));

    let mut again = split_records(Language::Tr, 930);
    assign_splits(&mut again, &plan).unwrap();
    ensure(again == tr, || "same seed gave different splits".into())?;
    let mut other = split_records(Language::Tr, 930);
    assign_splits(&mut other, &SplitPlan::with_seed(43)).unwrap();
    ensure(other != tr, || "different seeds gave identical splits".into())?;
    parts.push("deterministic".into());
    Ok(parts.join("; "))
}

fn learned_baseline() -> Check {
    let records = synthetic_english(5000, 29, 0.7);
    let train: Vec<CorpusRecord> = records.iter().filter(|r| r.split == Split::Train).cloned().collect();
    let test: Vec<&CorpusRecord> = records.iter().filter(|r| r.split == Split::Test).collect();
    let mut spec = ModelSpec::new(ModelTask::Stance);
    spec.multitask.train = TrainConfig { epochs: 30, lr: 0.5, batch: 32, seed: 29, ..TrainConfig::default() };
    let (model, _) = LinearTextModel::<f64>::train(&train, &spec).map_err(|e| e.to_string())?;
    let gold: Vec<usize> = test.iter().map(|r| r.stance.index()).collect();
    let pred: Vec<usize> = test
        .iter()
        .map(|r| StanceLabel::ALL.iter().position(|l| l.as_str() == model.predict(Task::Stance, r).unwrap()).unwrap())
        .collect();
    let learned = stance_f1(&gold, &pred);
    let train_labels: Vec<usize> = train.iter().map(|r| r.stance.index()).collect();
    let majority = baseline_majority(&train_labels, 4).unwrap();
    let base = stance_f1(&gold, &vec![majority; gold.len()]);
    ensure(learned > base + 0.10, || format!("macro-F1 {learned:.3} vs majority {base:.3}"))?;
    let salient = salient_features(model.head().unwrap(), &model.vocabulary, "delete", 20).map_err(|e| e.to_string())?;
    let terms: Vec<&str> = salient.positive.iter().map(|(t, _)| t.as_str()).collect();
    ensure(terms.iter().any(|t| *t == "not enough" || *t == "fails"), || format!("delete terms {terms:?}"))?;
    Ok(format!("macro-F1 {learned:.3} vs majority {base:.3}; delete terms start {:?}", &terms[..5]))
}

fn main() {
    let criteria: [(&str, fn() -> Check, Duration); 11] = [
        ("majority stance baseline", majority_stance, Duration::from_secs(1)),
        ("random stance baseline", random_stance, Duration::from_secs(10)),
        ("policy baselines", policy_baselines, Duration::from_secs(1)),
        ("eval oracle on published matrix", eval_oracle, Duration::from_secs(1)),
        ("metric brute-force equivalence", metric_brute_force, Duration::from_secs(5)),
        ("gradient check", gradient_check, Duration::from_secs(10)),
        ("multi-task schedule", mtl_schedule, Duration::MAX),
        ("pipeline fidelity", pipeline_fidelity, Duration::from_secs(2)),
        ("alignment superset", alignment, Duration::from_secs(1)),
        ("split determinism and shape", splits, Duration::MAX),
        ("learned baseline utility", learned_baseline, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed > budget {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            } else {
                Ok(detail)
            }
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
