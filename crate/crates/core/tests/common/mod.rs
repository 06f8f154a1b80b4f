//! Shared helpers for the integration tests: fixture loading, a seeded
//! random graph generator, and a brute-force SMATCH oracle that works on
//! plain triple strings rather than the metric module's internal tables.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umr_core::graph::{
    canonical_role, parse_penman, serialize_penman, Constant, GraphBuilder, SemanticGraph,
};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn fixture(name: &str) -> SemanticGraph {
    parse_penman(&fixture_text(name)).unwrap()
}

/// Blank-line separated graphs from a fixture file.
pub fn fixture_blocks(name: &str) -> Vec<String> {
    fixture_text(name)
        .split("\n\n")
        .map(str::trim)
        .filter(|b| !b.is_empty())
        .map(str::to_string)
        .collect()
}

/// Every fixture graph: the worked examples plus the extra corpus.
pub fn all_fixture_graphs() -> Vec<(String, SemanticGraph)> {
    let mut out: Vec<(String, SemanticGraph)> = ["walk_gold", "oops_gold", "oops_bibl", "oops_ud"]
        .iter()
        .map(|n| (n.to_string(), fixture(&format!("{n}.penman"))))
        .collect();
    for (i, block) in fixture_blocks("extra.penman").into_iter().enumerate() {
        out.push((format!("extra-{i}"), parse_penman(&block).unwrap()));
    }
    out
}

pub fn sorted_triples(g: &SemanticGraph) -> Vec<umr_core::graph::Triple> {
    let mut t = g.triples();
    t.sort();
    t
}

const CONCEPTS: &[&str] = &["a", "b", "c", "d"];
const ROLES: &[&str] = &["ARG0", "ARG1", "mod", "op1", "ARG0-of"];
const VALUES: &[&str] = &["-", "1", "Plural", "3rd"];

/// Connected random graph with `n` variables drawn from a small label
/// inventory so that alignments are ambiguous.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, prefix: &str) -> SemanticGraph {
    let mut b = GraphBuilder::new();
    let vars: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    for v in &vars {
        b.node(v.clone(), *CONCEPTS.choose(rng).unwrap());
    }
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let role = *ROLES.choose(rng).unwrap();
        if rng.gen_bool(0.7) {
            b.edge(vars[parent].clone(), role, vars[i].clone());
        } else {
            b.edge(vars[i].clone(), role, vars[parent].clone());
        }
    }
    let extra = rng.gen_range(0..=n / 2);
    for _ in 0..extra {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        b.edge(vars[s].clone(), *ROLES.choose(rng).unwrap(), vars[t].clone());
    }
    for _ in 0..rng.gen_range(0..=2) {
        let s = rng.gen_range(0..n);
        let value = *VALUES.choose(rng).unwrap();
        let c = if rng.gen_bool(0.3) {
            Constant::quoted(value)
        } else {
            Constant::symbol(value)
        };
        b.attribute(vars[s].clone(), "polarity", c);
    }
    b.top(vars[rng.gen_range(0..n)].clone());
    b.build().unwrap()
}

/// Triples as plain strings with lowercased roles and inverse roles
/// folded, keyed for multiset comparison.
fn string_triples(g: &SemanticGraph) -> Vec<(String, String, String)> {
    let mut out = vec![("TOP".to_string(), "top".to_string(), g.top().to_string())];
    for n in g.nodes() {
        out.push((n.var.clone(), "instance".into(), n.concept.clone()));
    }
    for e in g.edges() {
        let (role, swapped) = canonical_role(&e.role);
        let (s, t) = if swapped {
            (e.target.clone(), e.source.clone())
        } else {
            (e.source.clone(), e.target.clone())
        };
        out.push((s, format!("rel:{}", role.to_lowercase()), t));
    }
    for a in g.attributes() {
        out.push((a.source.clone(), format!("attr:{}", a.role.to_lowercase()), a.value.surface()));
    }
    out
}

fn count_matches(
    pred: &[(String, String, String)],
    gold: &HashMap<(String, String, String), usize>,
    map: &HashMap<&str, &str>,
) -> usize {
    let mut remaining = gold.clone();
    let mut matched = 0;
    for (s, r, t) in pred {
        let rename = |v: &str| -> String {
            match map.get(v) {
                Some(g) => g.to_string(),
                None => format!("\u{0}unmapped:{v}"),
            }
        };
        let key = if r == "instance" {
            (rename(s), r.clone(), t.clone())
        } else if s == "TOP" {
            (s.clone(), r.clone(), rename(t))
        } else if r.starts_with("rel:") {
            (rename(s), r.clone(), rename(t))
        } else {
            (rename(s), r.clone(), t.clone())
        };
        if let Some(c) = remaining.get_mut(&key) {
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
    }
    matched
}

/// Maximum matched-triple count over every injective partial mapping from
/// predicted to gold variables. Exponential; keep graphs tiny.
pub fn brute_force_matched(pred: &SemanticGraph, gold: &SemanticGraph) -> usize {
    let pt = string_triples(pred);
    let mut gt: HashMap<(String, String, String), usize> = HashMap::new();
    for t in string_triples(gold) {
        *gt.entry(t).or_default() += 1;
    }
    let pvars: Vec<&str> = pred.nodes().iter().map(|n| n.var.as_str()).collect();
    let gvars: Vec<&str> = gold.nodes().iter().map(|n| n.var.as_str()).collect();
    let mut best = 0;
    let mut map: HashMap<&str, &str> = HashMap::new();
    let mut used = vec![false; gvars.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec<'a>(
        k: usize,
        pvars: &[&'a str],
        gvars: &[&'a str],
        used: &mut Vec<bool>,
        map: &mut HashMap<&'a str, &'a str>,
        pt: &[(String, String, String)],
        gt: &HashMap<(String, String, String), usize>,
        best: &mut usize,
    ) {
        if k == pvars.len() {
            *best = (*best).max(count_matches(pt, gt, map));
            return;
        }
        rec(k + 1, pvars, gvars, used, map, pt, gt, best);
        for j in 0..gvars.len() {
            if !used[j] {
                used[j] = true;
                map.insert(pvars[k], gvars[j]);
                rec(k + 1, pvars, gvars, used, map, pt, gt, best);
                map.remove(pvars[k]);
                used[j] = false;
            }
        }
    }
    rec(0, &pvars, &gvars, &mut used, &mut map, &pt, &gt, &mut best);
    best
}

pub fn f1(matched: usize, pred: usize, gold: usize) -> f64 {
    if matched == 0 {
        return 0.0;
    }
    2.0 * matched as f64 / (pred + gold) as f64
}

const RICH_CONCEPTS: &[&str] = &["walk-01", "person", "and", "street", "say-01", "name", "x"];
const RICH_ROLES: &[&str] = &["ARG0", "ARG1-of", "op1", "consist-of", "mod", "Arg2", "name"];
const RICH_VALUES: &[(&str, bool)] = &[
    ("Activity", false),
    ("-", false),
    ("3rd", false),
    ("12.5", false),
    (":)", true),
    ("New York", true),
    ("say \"hi\"", true),
    ("back\\slash", true),
    ("(paren)", true),
    ("", true),
    ("s9q", true),
];

/// Wider label inventory than [`random_graph`], including quoted values
/// that need escaping, inverse roles and re-entrancies.
pub fn rich_random_graph(rng: &mut ChaCha8Rng, n: usize) -> SemanticGraph {
    let mut b = GraphBuilder::new();
    let vars: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    for v in &vars {
        b.node(v.clone(), *RICH_CONCEPTS.choose(rng).unwrap());
    }
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let role = *RICH_ROLES.choose(rng).unwrap();
        if rng.gen_bool(0.8) {
            b.edge(vars[parent].clone(), role, vars[i].clone());
        } else {
            b.edge(vars[i].clone(), role, vars[parent].clone());
        }
    }
    for _ in 0..rng.gen_range(0..=n / 3) {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        b.edge(vars[s].clone(), *RICH_ROLES.choose(rng).unwrap(), vars[t].clone());
    }
    for _ in 0..rng.gen_range(0..=n) {
        let s = rng.gen_range(0..n);
        let (value, quoted) = *RICH_VALUES.choose(rng).unwrap();
        let c = if quoted {
            Constant::quoted(value)
        } else {
            Constant::symbol(value)
        };
        let role = ["aspect", "value", "op1", "polarity", "quant"].choose(rng).unwrap();
        b.attribute(vars[s].clone(), *role, c);
    }
    b.top(vars[rng.gen_range(0..n)].clone());
    b.build().unwrap()
}

/// 100 valid graph texts: every fixture, then seeded random graphs.
pub fn campaign_texts() -> Vec<String> {
    let mut texts: Vec<String> = ["walk_gold", "oops_gold", "oops_bibl", "oops_ud"]
        .iter()
        .map(|n| fixture_text(&format!("{n}.penman")).trim().to_string())
        .collect();
    texts.extend(fixture_blocks("extra.penman"));
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    while texts.len() < 100 {
        let n = rng.gen_range(2..=10);
        texts.push(serialize_penman(&rich_random_graph(&mut rng, n)).unwrap());
    }
    texts
}
