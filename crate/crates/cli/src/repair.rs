use anyhow::Result;
use serde_json::json;
use umr_core::repair::{repair_parens, repair_report, RepairOutcome, RepairStatus};

use crate::input::{join_blocks, read_text, split_penman_blocks, write_output, GraphBlock};
use crate::RepairArgs;

fn per_line_blocks(text: &str) -> Vec<GraphBlock> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| GraphBlock {
            id: None,
            sentence: None,
            meta: Vec::new(),
            text: l.trim_end().to_string(),
            line: i + 1,
        })
        .collect()
}

pub fn run(args: &RepairArgs) -> Result<()> {
    let text = read_text(&args.input)?;
    let blocks = if args.per_line {
        per_line_blocks(&text)
    } else {
        split_penman_blocks(&text)
    };
    let outcomes: Vec<RepairOutcome> = blocks.iter().map(|b| repair_parens(&b.text)).collect();
    let labels: Vec<String> = blocks.iter().enumerate().map(|(i, b)| b.label(i)).collect();

    let body = if args.per_line {
        outcomes.iter().map(|o| o.text.clone() + "\n").collect()
    } else {
        join_blocks(blocks.iter().zip(&outcomes).map(|(b, o)| b.render(&o.text)))
    };
    write_output(args.output.as_ref(), &body)?;

    if let Some(p) = &args.status {
        let mut sidecar = String::new();
        for (i, o) in outcomes.iter().enumerate() {
            let row = json!({
                "index": i,
                "id": labels[i],
                "line": blocks[i].line,
                "status": o.status,
                "edits": o.edits,
                "diagnostic": o.diagnostic,
            });
            sidecar.push_str(&row.to_string());
            sidecar.push('\n');
        }
        write_output(Some(p), &sidecar)?;
    }

    let summary = repair_report(labels.iter().map(String::as_str).zip(&outcomes));
    eprintln!(
        "{} clean, {} repaired, {} unrecoverable",
        summary.clean, summary.repaired, summary.unrecoverable
    );
    for (label, o) in labels.iter().zip(&outcomes) {
        if o.status == RepairStatus::Unrecoverable {
            eprintln!("  {label}: {}", o.diagnostic.as_deref().unwrap_or("unrecoverable"));
        }
    }
    Ok(())
}
