//! Triple-matching scores between a predicted and a gold graph.
//!
//! All metrics compare the triple sets produced by
//! [`SemanticGraph::triples`] (top triple included, inverse roles folded)
//! under an injective mapping from predicted to gold variables.

mod ancast;
mod corpus;
mod problem;
mod search;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::SemanticGraph;
use problem::{invert, CompileOptions, Compiled, Interner, Mapping, Problem};

pub use corpus::{
    corpus_eval, EvalOptions, EvalPair, Execution, Metric, PairScores, ReportRow, ScoreReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("invalid metric configuration: {0}")]
    InvalidConfig(String),
    #[error("exhaustive search limited to {threshold} variables (graphs have {pred_vars} and {gold_vars})")]
    TooLarge {
        pred_vars: usize,
        gold_vars: usize,
        threshold: usize,
    },
    #[error("no pairs to evaluate")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub restarts: usize,
    /// Both graphs at or below this many variables are scored exactly.
    pub exact_threshold: usize,
    /// Compare role labels case-insensitively (`:Arg0` matches `:ARG0`).
    pub normalize_case: bool,
    pub seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            restarts: 4,
            exact_threshold: 8,
            normalize_case: true,
            seed: 0,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.restarts == 0 {
            return Err(MetricError::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.exact_threshold == 0 {
            return Err(MetricError::InvalidConfig(
                "exact threshold must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn compile_options(&self) -> CompileOptions {
        CompileOptions {
            normalize_case: self.normalize_case,
            standardize: false,
        }
    }
}

/// Injective mapping from predicted to gold variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub mapping: BTreeMap<String, String>,
    pub matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub pred_count: usize,
    pub gold_count: usize,
    pub alignment: Alignment,
}

/// `(precision, recall, f1)` from raw counts, with 0 for empty denominators.
pub fn prf(matched: usize, pred_count: usize, gold_count: usize) -> (f64, f64, f64) {
    let precision = if pred_count == 0 {
        0.0
    } else {
        matched as f64 / pred_count as f64
    };
    let recall = if gold_count == 0 {
        0.0
    } else {
        matched as f64 / gold_count as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

impl Score {
    pub fn from_counts(matched: usize, pred_count: usize, gold_count: usize) -> Self {
        let (precision, recall, f1) = prf(matched, pred_count, gold_count);
        Score {
            precision,
            recall,
            f1,
            matched,
            pred_count,
            gold_count,
            alignment: Alignment {
                mapping: BTreeMap::new(),
                matched,
            },
        }
    }
}

/// SMATCH++-style result: one global score plus per-kind sub-scores under
/// the same alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineGrainedScore {
    pub overall: Score,
    pub instance: Score,
    pub relation: Score,
    pub attribute: Score,
}

// The smaller graph goes on the left of the problem; mappings handed back
// are always pred -> gold.
struct Oriented {
    problem: Problem,
    pred_on_left: bool,
}

impl Oriented {
    fn new(pred: &SemanticGraph, gold: &SemanticGraph, opts: CompileOptions) -> Self {
        let mut interner = Interner::default();
        let p = Compiled::new(pred, &mut interner, opts);
        let g = Compiled::new(gold, &mut interner, opts);
        if p.var_count() <= g.var_count() {
            Oriented {
                problem: Problem::new(p, g),
                pred_on_left: true,
            }
        } else {
            Oriented {
                problem: Problem::new(g, p),
                pred_on_left: false,
            }
        }
    }

    fn pred(&self) -> &Compiled {
        if self.pred_on_left {
            &self.problem.left
        } else {
            &self.problem.right
        }
    }

    fn gold(&self) -> &Compiled {
        if self.pred_on_left {
            &self.problem.right
        } else {
            &self.problem.left
        }
    }

    fn pred_mapping(&self, left_mapping: &Mapping) -> Mapping {
        if self.pred_on_left {
            left_mapping.clone()
        } else {
            invert(left_mapping, self.problem.right_len())
        }
    }

    fn score(&self, left_mapping: &Mapping) -> Score {
        let matched = self.problem.score(left_mapping) as usize;
        let mut score = Score::from_counts(
            matched,
            self.pred().triple_count(),
            self.gold().triple_count(),
        );
        score.alignment = self.alignment(left_mapping, matched);
        score
    }

    fn alignment(&self, left_mapping: &Mapping, matched: usize) -> Alignment {
        let mapping = self
            .pred_mapping(left_mapping)
            .iter()
            .enumerate()
            .filter_map(|(i, j)| {
                j.map(|j| (self.pred().vars[i].clone(), self.gold().vars[j].clone()))
            })
            .collect();
        Alignment { mapping, matched }
    }

    fn within_threshold(&self, threshold: usize) -> bool {
        self.problem.left_len() <= threshold && self.problem.right_len() <= threshold
    }

    fn best_mapping(&self, cfg: &MetricConfig) -> Mapping {
        if self.within_threshold(cfg.exact_threshold) {
            search::exact(&self.problem).0
        } else {
            search::hill_climb(&self.problem, cfg.restarts, cfg.seed).0
        }
    }
}

/// SMATCH F-score. Graphs at or below `cfg.exact_threshold` variables are
/// scored with the exhaustive oracle, larger ones by restarted hill
/// climbing.
pub fn smatch(pred: &SemanticGraph, gold: &SemanticGraph, cfg: &MetricConfig) -> Score {
    let o = Oriented::new(pred, gold, cfg.compile_options());
    let mapping = o.best_mapping(cfg);
    o.score(&mapping)
}

/// SMATCH by restarted hill climbing only, whatever the graph size.
pub fn smatch_hill_climb(pred: &SemanticGraph, gold: &SemanticGraph, cfg: &MetricConfig) -> Score {
    let o = Oriented::new(pred, gold, cfg.compile_options());
    let (mapping, _) = search::hill_climb(&o.problem, cfg.restarts, cfg.seed);
    o.score(&mapping)
}

/// Globally optimal SMATCH by exhaustive search over injective mappings of
/// the smaller graph's variables.
pub fn smatch_exact(
    pred: &SemanticGraph,
    gold: &SemanticGraph,
    cfg: &MetricConfig,
) -> Result<Score, MetricError> {
    let o = Oriented::new(pred, gold, cfg.compile_options());
    if o.problem.left_len() > cfg.exact_threshold {
        return Err(MetricError::TooLarge {
            pred_vars: pred.node_count(),
            gold_vars: gold.node_count(),
            threshold: cfg.exact_threshold,
        });
    }
    let (mapping, _) = search::exact(&o.problem);
    Ok(o.score(&mapping))
}

/// SMATCH++-style scoring.
///
/// Both graphs are standardized first: concepts and constants lowercased,
/// quotes dropped, role labels lowercased, duplicate triples removed. One
/// best alignment is then used for the overall score and for sub-scores
/// restricted to instance, relation and attribute triples. The top triple
/// counts only towards the overall score.
pub fn smatchpp(pred: &SemanticGraph, gold: &SemanticGraph, cfg: &MetricConfig) -> FineGrainedScore {
    let o = Oriented::new(
        pred,
        gold,
        CompileOptions {
            normalize_case: true,
            standardize: true,
        },
    );
    let mapping = o.best_mapping(cfg);
    let overall = o.score(&mapping);
    let b = o.problem.breakdown(&mapping);
    let (p, g) = (o.pred(), o.gold());
    let sub = |matched: u32, pc: usize, gc: usize| {
        let mut s = Score::from_counts(matched as usize, pc, gc);
        s.alignment = overall.alignment.clone();
        s.alignment.matched = matched as usize;
        s
    };
    FineGrainedScore {
        instance: sub(b.instance, p.var_count(), g.var_count()),
        relation: sub(b.relation, p.edges.len(), g.edges.len()),
        attribute: sub(b.attribute, p.attribute_count(), g.attribute_count()),
        overall,
    }
}

/// Triple F-score under the anchor-broadcast alignment (see the `ancast`
/// module docs for the procedure).
pub fn ancast(pred: &SemanticGraph, gold: &SemanticGraph, cfg: &MetricConfig) -> Score {
    let mut interner = Interner::default();
    let opts = cfg.compile_options();
    let p = Compiled::new(pred, &mut interner, opts);
    let g = Compiled::new(gold, &mut interner, opts);
    let o = Oriented {
        problem: Problem::new(p, g),
        pred_on_left: true,
    };
    let mapping = ancast::align(&o.problem);
    o.score(&mapping)
}
