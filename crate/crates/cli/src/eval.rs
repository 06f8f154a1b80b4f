use std::collections::{BTreeSet, HashMap};

use anyhow::{bail, Result};
use umr_core::corpus::{DEFAULT_MINECRAFT_PATTERNS, MINECRAFT_TAG};
use umr_core::graph::parse_penman;
use umr_core::metrics::{corpus_eval, EvalOptions, EvalPair, Execution, Metric, MetricConfig};

use crate::input::{read_blocks, write_output, GraphBlock};
use crate::{Align, EvalArgs, Format, OnUnparseable, UsageError};

fn patterns(args: &EvalArgs) -> Result<Vec<(String, String)>> {
    if args.category_pattern.is_empty() {
        return Ok(DEFAULT_MINECRAFT_PATTERNS
            .iter()
            .map(|p| (MINECRAFT_TAG.to_string(), p.to_string()))
            .collect());
    }
    args.category_pattern
        .iter()
        .map(|p| match p.split_once('=') {
            Some((tag, pat)) if !tag.is_empty() && !pat.is_empty() => {
                Ok((tag.to_string(), pat.to_string()))
            }
            _ => Err(UsageError(format!("category pattern `{p}` is not TAG=SUBSTRING")).into()),
        })
        .collect()
}

fn options(args: &EvalArgs) -> Result<EvalOptions> {
    let mut metrics = Vec::new();
    for m in &args.metric {
        let metric: Metric = m.parse().map_err(UsageError)?;
        if !metrics.contains(&metric) {
            metrics.push(metric);
        }
    }
    if metrics.is_empty() {
        return Err(UsageError("at least one metric is required".into()).into());
    }
    let config = MetricConfig {
        restarts: args.restarts,
        exact_threshold: args.exact_threshold,
        seed: args.seed,
        ..MetricConfig::default()
    };
    config
        .validate()
        .map_err(|e| UsageError(e.to_string()))?;
    let execution = match args.jobs {
        Some(0) => return Err(UsageError("--jobs must be at least 1".into()).into()),
        Some(1) => Execution::Sequential,
        Some(n) => Execution::Parallel { threads: Some(n) },
        None => Execution::default(),
    };
    Ok(EvalOptions {
        metrics,
        config,
        complement_tags: args.complement,
        execution,
    })
}

/// Pairs (pred index, gold index).
fn align(pred: &[GraphBlock], gold: &[GraphBlock], mode: Align) -> Result<Vec<(usize, usize)>> {
    let all_ids = |b: &[GraphBlock]| b.iter().all(|x| x.id.is_some());
    let by_id = match mode {
        Align::Order => false,
        Align::Id => {
            if !all_ids(pred) || !all_ids(gold) {
                bail!("--align id needs a `# ::id` line on every graph");
            }
            true
        }
        Align::Auto => all_ids(pred) && all_ids(gold) && !pred.is_empty(),
    };
    if !by_id {
        if pred.len() != gold.len() {
            bail!(
                "count mismatch: {} predicted graphs, {} gold graphs",
                pred.len(),
                gold.len()
            );
        }
        return Ok((0..gold.len()).map(|i| (i, i)).collect());
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, p) in pred.iter().enumerate() {
        let id = p.id.as_deref().unwrap_or_default();
        if index.insert(id, i).is_some() {
            bail!("predicted id `{id}` occurs twice");
        }
    }
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::with_capacity(gold.len());
    let mut missing = Vec::new();
    for (gi, g) in gold.iter().enumerate() {
        let id = g.id.as_deref().unwrap_or_default();
        if !seen.insert(id) {
            bail!("gold id `{id}` occurs twice");
        }
        match index.get(id) {
            Some(&pi) => pairs.push((pi, gi)),
            None => missing.push(id.to_string()),
        }
    }
    if !missing.is_empty() || pred.len() != gold.len() {
        bail!(
            "count mismatch: {} predicted graphs, {} gold graphs; gold ids without a prediction: {}",
            pred.len(),
            gold.len(),
            if missing.is_empty() { "none".to_string() } else { missing.join(", ") }
        );
    }
    Ok(pairs)
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let opts = options(args)?;
    let patterns = patterns(args)?;
    let pred = read_blocks(&args.pred)?;
    let gold = read_blocks(&args.gold)?;
    let aligned = align(&pred, &gold, args.align)?;

    let mut pairs = Vec::with_capacity(aligned.len());
    let mut unparseable = Vec::new();
    for (pi, gi) in aligned {
        let g = &gold[gi];
        let gold_graph = parse_penman(&g.text).map_err(|e| {
            anyhow::anyhow!(
                "gold graph {} ({}:{}) does not parse: {e}",
                g.label(gi),
                args.gold.display(),
                g.line
            )
        })?;
        let p = &pred[pi];
        let pred_graph = match parse_penman(&p.text) {
            Ok(graph) => Some(graph),
            Err(e) => {
                unparseable.push(format!(
                    "{} ({}:{}): {e}",
                    p.label(pi),
                    args.pred.display(),
                    p.line
                ));
                None
            }
        };
        let sentence = g.sentence.as_deref().or(p.sentence.as_deref()).unwrap_or("");
        let tags = patterns
            .iter()
            .filter(|(_, pat)| sentence.contains(pat.as_str()))
            .map(|(tag, _)| tag.clone())
            .collect();
        pairs.push(EvalPair {
            id: g.label(gi),
            pred: pred_graph,
            gold: gold_graph,
            tags,
        });
    }
    if !unparseable.is_empty() {
        if args.on_unparseable == OnUnparseable::Fail {
            bail!(
                "{} unparseable predictions (use --on-unparseable zero to score them as zero):\n  {}",
                unparseable.len(),
                unparseable.join("\n  ")
            );
        }
        eprintln!(
            "warning: {} unparseable predictions scored as zero:\n  {}",
            unparseable.len(),
            unparseable.join("\n  ")
        );
    }
    let report = corpus_eval(&pairs, &opts)?;
    let out = match args.format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json() + "\n",
    };
    write_output(args.output.as_ref(), &out)
}
