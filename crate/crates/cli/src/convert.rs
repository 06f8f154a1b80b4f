use anyhow::{anyhow, bail, Context, Result};
use umr_core::amr2umr::{convert_roles, default_mappings, load_mappings, AnimacyLexicon, DecisionOverrides};
use umr_core::conllu::{normalize_tags, parse_conllu};
use umr_core::graph::{parse_penman, serialize_penman};
use umr_core::ud2umr::{bootstrap_partial, export_completion_records, write_records, RuleTable};

use crate::input::{ensure_exists, join_blocks, read_blocks, read_text, write_output};
use crate::{ConvertRolesArgs, ConvertUdArgs};

pub fn run_ud(args: &ConvertUdArgs) -> Result<()> {
    let rules = match &args.rules {
        Some(p) => RuleTable::from_tsv(&read_text(p)?)
            .with_context(|| format!("rule table {}", p.display()))?,
        None => RuleTable::default(),
    };
    let text = read_text(&args.input)?;
    let mut sentences = parse_conllu(&text).with_context(|| format!("{}", args.input.display()))?;
    if !args.no_merge_tags {
        sentences = sentences.iter().map(normalize_tags).collect();
    }
    for (i, s) in sentences.iter_mut().enumerate() {
        if s.sent_id.is_empty() {
            s.sent_id = format!("s{}", i + 1);
        }
    }

    let mut partials = Vec::with_capacity(sentences.len());
    let mut blocks = Vec::with_capacity(sentences.len());
    let mut failures = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        match bootstrap_partial(s, &rules, i + 1) {
            Ok(p) => {
                let penman = serialize_penman(&p.graph)?;
                blocks.push(format!(
                    "# ::id {}\n# ::snt {}\n# ::rules {}\n{}",
                    s.sent_id, s.text, rules.version, penman.trim_end()
                ));
                partials.push(p.graph);
            }
            Err(e) => failures.push(format!("{}: {e}", s.sent_id)),
        }
    }
    if !failures.is_empty() {
        bail!(
            "{} sentences could not be converted:\n  {}",
            failures.len(),
            failures.join("\n  ")
        );
    }

    if let Some(records_path) = &args.records {
        let golds = match &args.gold {
            Some(p) => Some(
                read_blocks(p)?
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        parse_penman(&b.text).map_err(|e| {
                            anyhow!("gold graph {} ({}:{}): {e}", b.label(i), p.display(), b.line)
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let records = export_completion_records(&sentences, &partials, golds.as_deref())?;
        write_output(Some(records_path), &write_records(&records))?;
    }
    write_output(args.output.as_ref(), &join_blocks(blocks))
}

pub fn run_roles(args: &ConvertRolesArgs) -> Result<()> {
    let mappings = match &args.mappings {
        Some(p) => {
            ensure_exists(p)?;
            load_mappings(p)?
        }
        None => default_mappings(),
    };
    let lexicon = match &args.lexicon {
        Some(p) => AnimacyLexicon::from_tsv(&read_text(p)?)
            .with_context(|| format!("lexicon {}", p.display()))?,
        None => AnimacyLexicon::default(),
    };
    let overrides = match &args.decisions {
        Some(p) => Some(
            DecisionOverrides::from_tsv(&read_text(p)?)
                .with_context(|| format!("decisions {}", p.display()))?,
        ),
        None => None,
    };

    let blocks = read_blocks(&args.input)?;
    let mut out = Vec::with_capacity(blocks.len());
    let mut log = String::new();
    for (i, b) in blocks.iter().enumerate() {
        let label = b.label(i);
        let graph = parse_penman(&b.text)
            .map_err(|e| anyhow!("graph {label} ({}:{}): {e}", args.input.display(), b.line))?;
        let (converted, decisions) = convert_roles(&graph, &label, &mappings, &lexicon, overrides.as_ref())
            .with_context(|| format!("graph {label}"))?;
        for d in &decisions {
            log.push_str(&serde_json::to_string(d)?);
            log.push('\n');
        }
        // Untouched graphs are copied as written so formatting survives.
        if converted == graph {
            out.push(b.render(&b.text));
        } else {
            out.push(b.render(&serialize_penman(&converted)?));
        }
    }
    if let Some(p) = &args.log {
        write_output(Some(p), &log)?;
    }
    write_output(args.output.as_ref(), &join_blocks(out))
}
