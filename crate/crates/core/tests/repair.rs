mod common;

use common::*;
use umr_core::graph::parse_penman;
use umr_core::repair::{repair_parens, repair_report, EditKind, RepairStatus};

fn trailing_closers(text: &str) -> usize {
    text.trim_end().chars().rev().take_while(|c| *c == ')').count()
}

fn delete_trailing(text: &str, k: usize) -> String {
    let t = text.trim_end();
    t[..t.len() - k].to_string()
}

#[test]
fn trailing_deletion_campaign() {
    let texts = campaign_texts();
    assert_eq!(texts.len(), 100);
    let mut outcomes = Vec::new();
    for (i, text) in texts.iter().enumerate() {
        let original = parse_penman(text).unwrap();
        let k = (1 + i % 3).min(trailing_closers(text));
        let broken = delete_trailing(text, k);
        let out = repair_parens(&broken);
        assert_eq!(out.status, RepairStatus::Repaired, "case {i}:\n{broken}");
        assert_eq!(out.edits.len(), k);
        assert!(out.edits.iter().all(|e| e.kind == EditKind::Insert));
        let fixed = parse_penman(&out.text).unwrap();
        assert_eq!(sorted_triples(&fixed), sorted_triples(&original), "case {i}");
        assert_eq!(repair_parens(&out.text).status, RepairStatus::Clean);
        outcomes.push((format!("case-{i}"), out));
    }
    let summary = repair_report(outcomes.iter().map(|(id, o)| (id.as_str(), o)));
    assert_eq!(summary.repaired, 100);
}

#[test]
fn clean_inputs_are_untouched() {
    for text in campaign_texts() {
        let out = repair_parens(&text);
        assert_eq!(out.status, RepairStatus::Clean);
        assert_eq!(out.text, text);
        assert!(out.edits.is_empty());
    }
}

#[test]
fn example_graph_missing_its_last_parenthesis() {
    let text = fixture_text("oops_bibl.penman");
    let broken = delete_trailing(&text, 1);
    let out = repair_parens(&broken);
    assert_eq!(out.status, RepairStatus::Repaired);
    assert_eq!(out.text, text.trim_end());
}

#[test]
fn surplus_and_interior_defects() {
    let gold = fixture_text("walk_gold.penman");
    let gold_triples = sorted_triples(&parse_penman(&gold).unwrap());

    let extra = format!("{})))", gold.trim_end());
    let out = repair_parens(&extra);
    assert_eq!(out.status, RepairStatus::Repaired);
    assert_eq!(sorted_triples(&parse_penman(&out.text).unwrap()), gold_triples);

    // A closer moved from the end to the middle.
    let moved = "(s / walk-01 :Arg0 (p / person)) :Arg1 (c / street))";
    let out = repair_parens(moved);
    assert_eq!(out.status, RepairStatus::Repaired);
    assert!(parse_penman(&out.text).is_ok());
    assert_eq!(repair_parens(&out.text).status, RepairStatus::Clean);
}

#[test]
fn over_budget_is_unrecoverable() {
    let text = "(a / b :ARG0 (c / d)))))) :ARG1 (e / f)";
    let out = repair_parens(text);
    assert_eq!(out.status, RepairStatus::Unrecoverable);
    assert_eq!(out.text, text);
    let summary = repair_report([("bad", &out)]);
    assert_eq!(summary.unrecoverable_ids, vec!["bad".to_string()]);
}
