use std::fmt::Write;

use anyhow::Result;
use serde_json::json;
use umr_core::graph::{parse_penman, validate_umr, TripleKind, UmrVocabulary};

use crate::input::{read_blocks, write_output};
use crate::{Format, InspectArgs};

fn n(v: &serde_json::Value) -> u64 {
    v.as_u64().unwrap_or(0)
}

pub fn run(args: &InspectArgs) -> Result<()> {
    let blocks = read_blocks(&args.input)?;
    let vocab = UmrVocabulary::default();
    let mut rows = Vec::with_capacity(blocks.len());
    let mut broken = 0;
    for (i, b) in blocks.iter().enumerate() {
        let row = match parse_penman(&b.text) {
            Ok(g) => {
                let triples = g.triples();
                let count = |k: TripleKind| triples.iter().filter(|t| t.kind == k).count();
                let issues: Vec<String> = validate_umr(&g, &vocab).iter().map(|x| x.to_string()).collect();
                json!({
                    "id": b.label(i),
                    "line": b.line,
                    "parsed": true,
                    "nodes": g.node_count(),
                    "relations": count(TripleKind::Relation),
                    "attributes": count(TripleKind::Attribute),
                    "triples": triples.len(),
                    "issues": issues,
                })
            }
            Err(e) => {
                broken += 1;
                json!({
                    "id": b.label(i),
                    "line": b.line,
                    "parsed": false,
                    "error": e.to_string(),
                })
            }
        };
        rows.push(row);
    }
    let out = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Table => {
            let mut s = String::new();
            writeln!(s, "{:<20}  {:>5}  {:>9}  {:>10}  {:>7}  issues", "id", "nodes", "relations", "attributes", "triples")?;
            for r in &rows {
                if r["parsed"] == true {
                    let issues = r["issues"].as_array().map_or(0, Vec::len);
                    writeln!(
                        s,
                        "{:<20}  {:>5}  {:>9}  {:>10}  {:>7}  {}",
                        r["id"].as_str().unwrap_or(""),
                        n(&r["nodes"]),
                        n(&r["relations"]),
                        n(&r["attributes"]),
                        n(&r["triples"]),
                        issues
                    )?;
                    for issue in r["issues"].as_array().into_iter().flatten() {
                        writeln!(s, "    {}", issue.as_str().unwrap_or(""))?;
                    }
                } else {
                    writeln!(s, "{:<20}  parse error: {}", r["id"].as_str().unwrap_or(""), r["error"].as_str().unwrap_or(""))?;
                }
            }
            s
        }
    };
    write_output(None, &out)?;
    if broken > 0 {
        anyhow::bail!("{broken} graphs do not parse");
    }
    Ok(())
}
