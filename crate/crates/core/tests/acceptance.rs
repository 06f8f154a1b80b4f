//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umr_core::conllu::parse_conllu;
use umr_core::corpus::{
    build_split, downsample_builder, exclude_overlap, parse_umr_corpus, replay_manifest,
    write_umr_corpus, Ratios, SplitManifest, SplitSpec, UmrEntry,
};
use umr_core::graph::{parse_penman, serialize_penman, serialize_penman_single_line};
use umr_core::metrics::{ancast, smatch_exact, smatch_hill_climb, smatchpp, MetricConfig};
use umr_core::repair::{repair_parens, RepairStatus};
use umr_core::ud2umr::{bootstrap_partial, RuleTable};

/// Absolute tolerance on F-scores reported in percent.
const F_TOLERANCE: f64 = 0.01;
const FAST_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_PAIRS: usize = 500;
const ORACLE_MAX_VARS: usize = 8;
const ORACLE_MIN_AGREEMENT: f64 = 0.95;
const ROUNDTRIP_GRAPHS: usize = 1000;
/// Frozen exact-search score of the bootstrapped walking sentence.
const BOOTSTRAP_PINNED_F1: f64 = 0.70;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn worked_pair(pred: &str, expected: f64) -> Outcome {
    let start = Instant::now();
    let gold = fixture("oops_gold.penman");
    let pred = fixture(pred);
    let cfg = MetricConfig::default();
    let exact = smatch_exact(&pred, &gold, &cfg).map_err(|e| e.to_string())?;
    let hc = smatch_hill_climb(&pred, &gold, &cfg);
    let elapsed = start.elapsed();
    let (fe, fh) = (exact.f1 * 100.0, hc.f1 * 100.0);
    ensure((fe - expected).abs() <= F_TOLERANCE, format!("exact F {fe:.3}"))?;
    ensure((fh - expected).abs() <= F_TOLERANCE, format!("hill-climb F {fh:.3}"))?;
    ensure(elapsed < FAST_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!(
        "exact F {fe:.3}, hill-climb F {fh:.3} (target {expected} ± {F_TOLERANCE}), {elapsed:.2?}"
    ))
}

fn criterion_1() -> Outcome {
    worked_pair("oops_bibl.penman", 91.89)
}

fn criterion_2() -> Outcome {
    worked_pair("oops_ud.penman", 73.33)
}

fn criterion_3() -> Outcome {
    let cfg = MetricConfig::default();
    let all = all_fixture_graphs();
    ensure(all.len() >= 20, format!("only {} fixtures", all.len()))?;
    for (name, g) in &all {
        let scores = [
            smatch_exact(g, g, &cfg).map(|s| s.f1).unwrap_or_else(|_| smatch_hill_climb(g, g, &cfg).f1),
            smatch_hill_climb(g, g, &cfg).f1,
            smatchpp(g, g, &cfg).overall.f1,
            ancast(g, g, &cfg).f1,
        ];
        ensure(scores.iter().all(|f| *f == 1.0), format!("{name}: {scores:?}"))?;
    }
    Ok(format!("{} fixtures score exactly 1.0 under smatch, smatchpp and ancast", all.len()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let cfg = MetricConfig {
        exact_threshold: ORACLE_MAX_VARS,
        ..MetricConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut agree = 0;
    for i in 0..ORACLE_PAIRS {
        let n = rng.gen_range(1..=ORACLE_MAX_VARS);
        let m = rng.gen_range(1..=ORACLE_MAX_VARS);
        let a = random_graph(&mut rng, n, "a");
        let b = random_graph(&mut rng, m, "b");
        let exact = smatch_exact(&a, &b, &cfg).map_err(|e| e.to_string())?;
        let hc = smatch_hill_climb(&a, &b, &cfg);
        ensure(hc.f1 <= exact.f1 + 1e-12, format!("pair {i}: hill climb beats exact"))?;
        if hc.matched == exact.matched {
            agree += 1;
        }
    }
    let elapsed = start.elapsed();
    let rate = agree as f64 / ORACLE_PAIRS as f64;
    ensure(rate >= ORACLE_MIN_AGREEMENT, format!("agreement {rate:.3}"))?;
    ensure(elapsed < ORACLE_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{agree}/{ORACLE_PAIRS} pairs agree ({:.1}%, need {:.0}%), never above exact, {elapsed:.2?}",
        rate * 100.0,
        ORACLE_MIN_AGREEMENT * 100.0
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut graphs: Vec<(String, umr_core::graph::SemanticGraph)> = (0..ROUNDTRIP_GRAPHS)
        .map(|i| {
            let n = rng.gen_range(1..=12);
            let g = if i % 2 == 0 {
                random_graph(&mut rng, n, "r")
            } else {
                rich_random_graph(&mut rng, n)
            };
            (format!("random-{i}"), g)
        })
        .collect();
    graphs.extend(all_fixture_graphs());
    let mut failures = 0;
    for (_, g) in &graphs {
        for text in [serialize_penman(g), serialize_penman_single_line(g)] {
            let ok = text
                .ok()
                .and_then(|t| parse_penman(&t).ok())
                .is_some_and(|back| sorted_triples(&back) == sorted_triples(g));
            if !ok {
                failures += 1;
            }
        }
    }
    ensure(failures == 0, format!("{failures} roundtrip failures"))?;
    Ok(format!("{} graphs, indented and single-line, 0 failures", graphs.len()))
}

fn criterion_6() -> Outcome {
    let texts = campaign_texts();
    let mut repaired = 0;
    for (i, text) in texts.iter().enumerate() {
        let clean = repair_parens(text);
        ensure(
            clean.status == RepairStatus::Clean && clean.text == *text,
            format!("case {i}: clean input changed"),
        )?;
        let t = text.trim_end();
        let run = t.chars().rev().take_while(|c| *c == ')').count();
        let k = (1 + i % 3).min(run);
        let broken = &t[..t.len() - k];
        let out = repair_parens(broken);
        let same = parse_penman(&out.text)
            .is_ok_and(|g| sorted_triples(&g) == sorted_triples(&parse_penman(text).unwrap()));
        ensure(out.status == RepairStatus::Repaired && same, format!("case {i} not repaired"))?;
        ensure(
            repair_parens(&out.text).status == RepairStatus::Clean,
            format!("case {i}: repair not idempotent"),
        )?;
        repaired += 1;
    }
    Ok(format!("{repaired}/{} repaired with equal triples; idempotent; clean inputs unchanged", texts.len()))
}

fn criterion_7() -> Outcome {
    let sentences = parse_conllu(&fixture_text("walk.conllu")).map_err(|e| e.to_string())?;
    let p = bootstrap_partial(&sentences[0], &RuleTable::default(), 0).map_err(|e| e.to_string())?;
    let g = &p.graph;
    let top = g.top();
    ensure(g.concept(top).is_some_and(|c| c.starts_with("walk")), "root is not a walk predicate")?;
    let arg0 = g
        .edges()
        .iter()
        .find(|e| e.source == top && e.role == "ARG0")
        .ok_or("no :ARG0 edge")?;
    ensure(g.concept(&arg0.target) == Some("person"), ":ARG0 is not person")?;
    let attrs: BTreeSet<(String, String)> = g
        .attributes()
        .iter()
        .filter(|a| a.source == arg0.target)
        .map(|a| (a.role.clone(), a.value.text.clone()))
        .collect();
    for want in [("refer-person", "3rd"), ("refer-number", "Plural")] {
        ensure(
            attrs.contains(&(want.0.to_string(), want.1.to_string())),
            format!("person lacks :{} {}", want.0, want.1),
        )?;
    }
    let score = smatch_exact(g, &fixture("walk_gold.penman"), &MetricConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(
        score.f1 + 1e-9 >= BOOTSTRAP_PINNED_F1,
        format!("SMATCH {:.4} below pinned {BOOTSTRAP_PINNED_F1}", score.f1),
    )?;
    Ok(format!(
        "{}; SMATCH vs gold {:.4} (pinned {BOOTSTRAP_PINNED_F1})",
        serialize_penman_single_line(g).unwrap(),
        score.f1
    ))
}

fn synthetic_docs(docs: usize, per_doc: usize) -> Vec<UmrEntry> {
    let graph = parse_penman("(x / thing)").unwrap();
    let mut out = Vec::new();
    for d in 0..docs {
        for s in 0..per_doc {
            out.push(UmrEntry {
                doc_id: format!("doc{d}"),
                sent_id: format!("doc{d}.s{s}"),
                sentence: if s % 2 == 0 {
                    format!("[Builder places block {s} in game {d}]")
                } else {
                    format!("<Architect> move block {s} in game {d}")
                },
                graph: graph.clone(),
                language: "en".into(),
                tags: BTreeSet::new(),
            });
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let read = parse_umr_corpus(&fixture_text("corpus/overlap.umr"), "overlap.umr");
    ensure(read.malformed.is_empty(), "overlap fixture is malformed")?;
    let amr: Vec<String> = fixture_text("corpus/amr_sentences.txt").lines().map(str::to_string).collect();
    let (kept, excluded) = exclude_overlap(read.entries.clone(), &amr);
    let got: Vec<&str> = excluded.iter().map(|e| e.sent_id.as_str()).collect();
    ensure(got == ["ov.1", "ov.4", "ov.7", "ov.9"], format!("excluded {got:?}"))?;
    ensure(kept.len() + excluded.len() == read.entries.len(), "overlap split lost entries")?;

    let entries = synthetic_docs(300, 10);
    let builder_before = entries.iter().filter(|e| e.sentence.starts_with("[Builder")).count();
    let down = downsample_builder(entries.clone(), 1000, Some(9));
    let builder_after = down.iter().filter(|e| e.sentence.starts_with("[Builder")).count();
    ensure(builder_after == 1000, format!("{builder_after} builder sentences kept"))?;

    let spec = SplitSpec {
        seed: 7,
        ratios: Some(Ratios { train: 0.8, dev: 0.1, test: 0.1 }),
        ids: None,
        filters: vec![umr_core::corpus::Filter::BuilderDownsample { cap: 1000, shuffle: true }],
    };
    let split = build_split(entries.clone(), &spec).map_err(|e| e.to_string())?;
    let mut seen = BTreeSet::new();
    let mut doc_part = std::collections::HashMap::new();
    for (p, part) in [&split.train, &split.dev, &split.test].into_iter().enumerate() {
        for e in part {
            ensure(seen.insert(e.sent_id.clone()), format!("{} in two partitions", e.sent_id))?;
            let prev = doc_part.insert(e.doc_id.clone(), p);
            ensure(prev.is_none() || prev == Some(p), format!("{} straddles", e.doc_id))?;
        }
    }
    ensure(seen.len() == down.len(), "partitions are not exhaustive")?;
    let manifest = SplitManifest::from_json(&split.manifest.to_json()).map_err(|e| e.to_string())?;
    let replay = replay_manifest(entries, &manifest).map_err(|e| e.to_string())?;
    for (a, b) in [(&split.train, &replay.train), (&split.dev, &replay.dev), (&split.test, &replay.test)] {
        ensure(write_umr_corpus(a) == write_umr_corpus(b), "manifest replay differs")?;
    }
    Ok(format!(
        "4/4 planted overlaps excluded; builder {builder_before}→{builder_after} (cap 1000); \
         split {}/{}/{} disjoint, exhaustive, document-coherent; replay byte-identical",
        split.train.len(),
        split.dev.len(),
        split.test.len()
    ))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("1 SMATCH BiBL example = 91.89", criterion_1),
        ("2 SMATCH UD example = 73.33", criterion_2),
        ("3 metric identity on fixtures", criterion_3),
        ("4 hill climb vs exact oracle", criterion_4),
        ("5 PENMAN roundtrip", criterion_5),
        ("6 repair campaign", criterion_6),
        ("7 bootstrap sanity", criterion_7),
        ("8 corpus machinery", criterion_8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!(
        "N/A   criterion 9 trained-model scores: not reproducible here; they need trained \
         models and licensed corpora. The evaluation harness that produces them is covered by 1-3."
    );
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
