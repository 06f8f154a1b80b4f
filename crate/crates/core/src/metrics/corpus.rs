//! Corpus-level, micro-averaged scoring with per-category breakdowns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ancast, prf, smatch, smatchpp, MetricConfig, MetricError, Score};
use crate::graph::SemanticGraph;
use crate::metrics::problem::{CompileOptions, Compiled, Interner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Smatch,
    Smatchpp,
    Ancast,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Smatch => "smatch",
            Metric::Smatchpp => "smatchpp",
            Metric::Ancast => "ancast",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "smatch" => Ok(Metric::Smatch),
            "smatchpp" | "smatch++" => Ok(Metric::Smatchpp),
            "ancast" => Ok(Metric::Ancast),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// One predicted/gold pair. A missing prediction (e.g. unparseable model
/// output) scores zero matched triples against the full gold count.
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub id: String,
    pub pred: Option<SemanticGraph>,
    pub gold: SemanticGraph,
    pub tags: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Pairs are scored on a worker pool; `None` uses the default pool.
    Parallel { threads: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { threads: None }
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub metrics: Vec<Metric>,
    pub config: MetricConfig,
    /// Also report a `non-<tag>` category for every tag.
    pub complement_tags: bool,
    pub execution: Execution,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            metrics: vec![Metric::Smatch, Metric::Smatchpp, Metric::Ancast],
            config: MetricConfig::default(),
            complement_tags: false,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub matched: usize,
    pub pred_count: usize,
    pub gold_count: usize,
}

impl Counts {
    fn of(score: &Score) -> Self {
        Counts {
            matched: score.matched,
            pred_count: score.pred_count,
            gold_count: score.gold_count,
        }
    }

    fn add(&mut self, other: &Counts) {
        self.matched += other.matched;
        self.pred_count += other.pred_count;
        self.gold_count += other.gold_count;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub metric: String,
    pub category: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_pairs: usize,
    pub matched: usize,
    pub pred_count: usize,
    pub gold_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub id: String,
    pub tags: Vec<String>,
    /// Keyed by row metric name, e.g. `smatch` or `smatchpp-relation`.
    pub scores: BTreeMap<String, PairScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub pred_count: usize,
    pub gold_count: usize,
}

impl From<Counts> for PairScore {
    fn from(c: Counts) -> Self {
        let (precision, recall, f1) = prf(c.matched, c.pred_count, c.gold_count);
        PairScore {
            precision,
            recall,
            f1,
            matched: c.matched,
            pred_count: c.pred_count,
            gold_count: c.gold_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub rows: Vec<ReportRow>,
    pub pairs: Vec<PairScores>,
}

impl ScoreReport {
    pub fn row(&self, metric: &str, category: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.category == category)
    }

    /// Aligned plain-text table; scores as percentages.
    pub fn to_table(&self) -> String {
        let mw = self
            .rows
            .iter()
            .map(|r| r.metric.len())
            .chain(["metric".len()])
            .max()
            .unwrap_or(6);
        let cw = self
            .rows
            .iter()
            .map(|r| r.category.len())
            .chain(["category".len()])
            .max()
            .unwrap_or(8);
        let mut out = String::new();
        writeln!(
            out,
            "{:<mw$}  {:<cw$}  {:>9}  {:>9}  {:>9}  {:>7}",
            "metric", "category", "precision", "recall", "f1", "n_pairs"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:<mw$}  {:<cw$}  {:>9.2}  {:>9.2}  {:>9.2}  {:>7}",
                r.metric,
                r.category,
                r.precision * 100.0,
                r.recall * 100.0,
                r.f1 * 100.0,
                r.n_pairs
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn score_pair(pair: &EvalPair, opts: &EvalOptions) -> Vec<(String, Counts)> {
    let cfg = &opts.config;
    let mut out = Vec::new();
    for metric in &opts.metrics {
        match (metric, &pair.pred) {
            (Metric::Smatch, Some(pred)) => {
                out.push(("smatch".to_string(), Counts::of(&smatch(pred, &pair.gold, cfg))))
            }
            (Metric::Ancast, Some(pred)) => {
                out.push(("ancast".to_string(), Counts::of(&ancast(pred, &pair.gold, cfg))))
            }
            (Metric::Smatchpp, Some(pred)) => {
                let s = smatchpp(pred, &pair.gold, cfg);
                out.push(("smatchpp".to_string(), Counts::of(&s.overall)));
                out.push(("smatchpp-instance".to_string(), Counts::of(&s.instance)));
                out.push(("smatchpp-relation".to_string(), Counts::of(&s.relation)));
                out.push(("smatchpp-attribute".to_string(), Counts::of(&s.attribute)));
            }
            (Metric::Smatch | Metric::Ancast, None) => {
                let gold = compiled(&pair.gold, cfg.normalize_case, false);
                out.push((
                    metric.name().to_string(),
                    Counts {
                        matched: 0,
                        pred_count: 0,
                        gold_count: gold.triple_count(),
                    },
                ));
            }
            (Metric::Smatchpp, None) => {
                let gold = compiled(&pair.gold, true, true);
                let zero = |gold_count| Counts {
                    matched: 0,
                    pred_count: 0,
                    gold_count,
                };
                out.push(("smatchpp".to_string(), zero(gold.triple_count())));
                out.push(("smatchpp-instance".to_string(), zero(gold.var_count())));
                out.push(("smatchpp-relation".to_string(), zero(gold.edges.len())));
                out.push(("smatchpp-attribute".to_string(), zero(gold.attribute_count())));
            }
        }
    }
    out
}

fn compiled(graph: &SemanticGraph, normalize_case: bool, standardize: bool) -> Compiled {
    Compiled::new(
        graph,
        &mut Interner::default(),
        CompileOptions {
            normalize_case,
            standardize,
        },
    )
}

type Membership = Box<dyn Fn(&EvalPair) -> bool>;

fn score_all(pairs: &[EvalPair], opts: &EvalOptions) -> Vec<Vec<(String, Counts)>> {
    match opts.execution {
        Execution::Sequential => pairs.iter().map(|p| score_pair(p, opts)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel { threads } => {
            use rayon::prelude::*;
            let run = || pairs.par_iter().map(|p| score_pair(p, opts)).collect();
            match threads {
                None => run(),
                Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(run),
                    // No pool: fall back to the calling thread.
                    Err(_) => pairs.iter().map(|p| score_pair(p, opts)).collect(),
                },
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel { .. } => pairs.iter().map(|p| score_pair(p, opts)).collect(),
    }
}

/// Scores every pair and micro-averages (sums matched, predicted and gold
/// triple counts before computing P/R/F) overall and per category tag.
///
/// Results do not depend on the execution mode or on thread scheduling.
pub fn corpus_eval(pairs: &[EvalPair], opts: &EvalOptions) -> Result<ScoreReport, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    opts.config.validate()?;
    let per_pair = score_all(pairs, opts);

    let tags: BTreeSet<&str> = pairs
        .iter()
        .flat_map(|p| p.tags.iter().map(String::as_str))
        .collect();
    let mut categories: Vec<(String, Membership)> =
        vec![("all".to_string(), Box::new(|_| true))];
    for tag in &tags {
        let t = tag.to_string();
        categories.push((t.clone(), Box::new(move |p: &EvalPair| p.tags.contains(&t))));
    }
    if opts.complement_tags {
        for tag in &tags {
            let t = tag.to_string();
            categories.push((
                format!("non-{t}"),
                Box::new(move |p: &EvalPair| !p.tags.contains(&t)),
            ));
        }
    }

    let metric_names: Vec<String> = per_pair[0].iter().map(|(m, _)| m.clone()).collect();
    let mut rows = Vec::new();
    for (mi, metric) in metric_names.iter().enumerate() {
        for (category, member) in &categories {
            let mut total = Counts::default();
            let mut n_pairs = 0;
            for (pair, scores) in pairs.iter().zip(&per_pair) {
                if member(pair) {
                    total.add(&scores[mi].1);
                    n_pairs += 1;
                }
            }
            let (precision, recall, f1) = prf(total.matched, total.pred_count, total.gold_count);
            rows.push(ReportRow {
                metric: metric.clone(),
                category: category.clone(),
                precision,
                recall,
                f1,
                n_pairs,
                matched: total.matched,
                pred_count: total.pred_count,
                gold_count: total.gold_count,
            });
        }
    }

    let pairs = pairs
        .iter()
        .zip(per_pair)
        .map(|(pair, scores)| PairScores {
            id: pair.id.clone(),
            tags: pair.tags.iter().cloned().collect(),
            scores: scores.into_iter().map(|(m, c)| (m, c.into())).collect(),
        })
        .collect();
    Ok(ScoreReport { rows, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_penman;

    fn pair(id: &str, pred: &str, gold: &str, tags: &[&str]) -> EvalPair {
        EvalPair {
            id: id.to_string(),
            pred: Some(parse_penman(pred).unwrap()),
            gold: parse_penman(gold).unwrap(),
            tags: tags.iter().map(|t| t.to_string()).collect(),
        }
    }

    #[test]
    fn empty_corpus() {
        assert_eq!(
            corpus_eval(&[], &EvalOptions::default()),
            Err(MetricError::EmptyCorpus)
        );
    }

    #[test]
    fn categories_and_complements() {
        let pairs = vec![
            pair("1", "(a / x)", "(a / x)", &["minecraft"]),
            pair("2", "(a / x)", "(a / y)", &[]),
        ];
        let opts = EvalOptions {
            metrics: vec![Metric::Smatch],
            complement_tags: true,
            ..Default::default()
        };
        let r = corpus_eval(&pairs, &opts).unwrap();
        let cats: Vec<&str> = r.rows.iter().map(|r| r.category.as_str()).collect();
        assert_eq!(cats, vec!["all", "minecraft", "non-minecraft"]);
        assert_eq!(r.row("smatch", "minecraft").unwrap().f1, 1.0);
        assert_eq!(r.row("smatch", "non-minecraft").unwrap().matched, 1);
        assert_eq!(r.row("smatch", "all").unwrap().n_pairs, 2);
    }

    #[test]
    fn missing_prediction_scores_zero() {
        let mut p = pair("1", "(a / x)", "(a / x :ARG0 (b / y))", &[]);
        p.pred = None;
        let r = corpus_eval(&[p], &EvalOptions::default()).unwrap();
        let row = r.row("smatch", "all").unwrap();
        assert_eq!((row.matched, row.pred_count, row.gold_count), (0, 0, 4));
        assert_eq!(r.row("smatchpp-relation", "all").unwrap().gold_count, 1);
        assert_eq!(row.f1, 0.0);
    }

    #[test]
    fn table_layout() {
        let r = corpus_eval(
            &[pair("1", "(a / x)", "(a / x)", &[])],
            &EvalOptions {
                metrics: vec![Metric::Smatch],
                ..Default::default()
            },
        )
        .unwrap();
        let table = r.to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("metric  category"));
        assert!(lines[1].contains("100.00"));
    }

    #[test]
    fn metric_names_parse() {
        assert_eq!("SMATCH++".parse::<Metric>(), Ok(Metric::Smatchpp));
        assert!("bleu".parse::<Metric>().is_err());
    }
}
