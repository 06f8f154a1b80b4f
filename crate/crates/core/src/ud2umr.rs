//! Deterministic conversion of UD trees into partial UMR graphs, and the
//! record format used to hand those graphs to an external completion model.
//!
//! Partial graphs carry structure and the attributes recoverable from
//! morphology (`:refer-person`, `:refer-number`). Predicates get the
//! placeholder sense `-00`; aspect and modal strength are left for the
//! completion step.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{ConlluSentence, ConlluToken};
use crate::graph::{
    parse_penman, serialize_penman_single_line, Constant, GraphBuilder, SemanticGraph,
    SerializeError,
};
use crate::repair::{repair_parens, RepairStatus};

/// Sense suffix marking a predicate whose sense was not disambiguated.
pub const PLACEHOLDER_SENSE: &str = "-00";

const DEFAULT_RULES: &str = include_str!("../data/ud_rules.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConceptPolicy {
    /// `lemma-00`.
    Predicate,
    /// Lemma plus `:refer-number` from the Number feature.
    Nominal,
    /// Bare lemma.
    Lemma,
    /// `person` or `thing`, with `:refer-person` and `:refer-number`.
    Pronoun,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoleRule {
    Role(String),
    /// Coordination under a fresh `and` node with `:op1..:opN`.
    Coordinate,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("rule line {line}: `{key}` is defined twice")]
    DuplicateKey { line: usize, key: String },
    #[error("rule table has no version line")]
    MissingVersion,
}

/// Dependency-relation and POS policies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    /// Identifier of the rule file, so results can cite it.
    pub version: String,
    pub deprel_map: BTreeMap<String, RoleRule>,
    pub pos_map: BTreeMap<String, ConceptPolicy>,
    /// Pronoun lemmas that become `thing`; every other pronoun is `person`.
    pub thing_pronouns: BTreeSet<String>,
}

impl Default for RuleTable {
    fn default() -> Self {
        RuleTable::from_tsv(DEFAULT_RULES).expect("bundled rule table is valid")
    }
}

impl RuleTable {
    pub fn from_tsv(text: &str) -> Result<Self, RuleError> {
        let mut version = None;
        let mut deprel_map = BTreeMap::new();
        let mut pos_map = BTreeMap::new();
        let mut thing_pronouns = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let bad = |message: &str| RuleError::BadLine {
                line,
                message: message.to_string(),
            };
            match cols.as_slice() {
                ["version", v] => version = Some(v.to_string()),
                ["deprel", rel, role] => {
                    let rule = match *role {
                        "-" => RoleRule::Drop,
                        "opN" => RoleRule::Coordinate,
                        r => RoleRule::Role(r.trim_start_matches(':').to_string()),
                    };
                    if deprel_map.insert(rel.to_string(), rule).is_some() {
                        return Err(RuleError::DuplicateKey {
                            line,
                            key: rel.to_string(),
                        });
                    }
                }
                ["pos", upos, policy] => {
                    let policy = match *policy {
                        "predicate" => ConceptPolicy::Predicate,
                        "nominal" => ConceptPolicy::Nominal,
                        "lemma" => ConceptPolicy::Lemma,
                        "pronoun" => ConceptPolicy::Pronoun,
                        _ => return Err(bad("unknown concept policy")),
                    };
                    if pos_map.insert(upos.to_string(), policy).is_some() {
                        return Err(RuleError::DuplicateKey {
                            line,
                            key: upos.to_string(),
                        });
                    }
                }
                ["thing-pronoun", lemma] => {
                    thing_pronouns.insert(lemma.to_lowercase());
                }
                _ => return Err(bad("unrecognized row")),
            }
        }
        Ok(RuleTable {
            version: version.ok_or(RuleError::MissingVersion)?,
            deprel_map,
            pos_map,
            thing_pronouns,
        })
    }

    /// Rule for a relation, falling back from `base:subtype` to `base`.
    /// `None` means the relation is unmapped, which drops the dependent.
    pub fn role_for(&self, deprel: &str) -> Option<&RoleRule> {
        self.deprel_map.get(deprel).or_else(|| {
            deprel
                .split_once(':')
                .and_then(|(base, _)| self.deprel_map.get(base))
        })
    }

    fn keeps(&self, token: &ConlluToken) -> bool {
        self.pos_map.contains_key(&token.upos)
            && matches!(
                self.role_for(&token.deprel),
                Some(RoleRule::Role(_) | RoleRule::Coordinate)
            )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BootstrapError {
    #[error("root token `{form}` has UPOS {upos}, which has no concept policy")]
    UnmappableRoot { form: String, upos: String },
    #[error("sentence has no tokens")]
    EmptySentence,
    #[error("sentence is not a valid tree: {0}")]
    InvalidTree(#[from] crate::conllu::TreeError),
}

/// A partial graph plus the token each variable came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialGraph {
    pub graph: SemanticGraph,
    pub anchors: BTreeMap<String, usize>,
}

fn concept_base(token: &ConlluToken) -> String {
    let source = if token.lemma.is_empty() || token.lemma == "_" {
        &token.form
    } else {
        &token.lemma
    };
    let clean: String = source
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || *c == '-' || *c == '_')
        .collect();
    if clean.is_empty() {
        token.upos.to_lowercase()
    } else {
        clean
    }
}

fn number_value(token: &ConlluToken) -> Option<&'static str> {
    match token.feat("Number")? {
        "Sing" => Some("Singular"),
        "Plur" => Some("Plural"),
        "Dual" => Some("Dual"),
        _ => None,
    }
}

fn person_value(token: &ConlluToken) -> Option<&'static str> {
    match token.feat("Person")? {
        "1" => Some("1st"),
        "2" => Some("2nd"),
        "3" => Some("3rd"),
        _ => None,
    }
}

struct Namer {
    prefix: String,
    used: HashMap<char, usize>,
}

impl Namer {
    fn name(&mut self, concept: &str) -> String {
        let letter = concept
            .chars()
            .find(|c| c.is_ascii_lowercase())
            .unwrap_or('x');
        let n = self.used.entry(letter).or_insert(0);
        *n += 1;
        if *n == 1 {
            format!("{}{letter}", self.prefix)
        } else {
            format!("{}{letter}{n}", self.prefix)
        }
    }
}

struct Conversion<'a> {
    sentence: &'a ConlluSentence,
    rules: &'a RuleTable,
    /// Kept children per token id (index 0 unused), in token order.
    children: Vec<Vec<usize>>,
    builder: GraphBuilder,
    anchors: BTreeMap<String, usize>,
    namer: Namer,
}

impl Conversion<'_> {
    fn token(&self, id: usize) -> &ConlluToken {
        &self.sentence.tokens[id - 1]
    }

    fn conjuncts(&self, id: usize) -> Vec<usize> {
        self.children[id]
            .iter()
            .copied()
            .filter(|&c| self.rules.role_for(&self.token(c).deprel) == Some(&RoleRule::Coordinate))
            .collect()
    }

    /// Emits the subtree for token `id` and returns the variable that
    /// stands for it (an `and` node when `id` heads a coordination).
    fn emit(&mut self, id: usize) -> String {
        let conjuncts = self.conjuncts(id);
        if conjuncts.is_empty() {
            return self.emit_token(id);
        }
        let and_var = self.namer.name("and");
        self.builder.node(and_var.clone(), "and");
        // UD attaches the coordinator to the following conjunct.
        let anchor = self
            .sentence
            .children(conjuncts[0])
            .find(|t| t.deprel == "cc")
            .map_or(id, |t| t.id);
        self.anchors.insert(and_var.clone(), anchor);
        let head = self.emit_token(id);
        self.builder.edge(and_var.clone(), "op1", head);
        for (i, c) in conjuncts.into_iter().enumerate() {
            let v = self.emit(c);
            self.builder.edge(and_var.clone(), format!("op{}", i + 2), v);
        }
        and_var
    }

    fn emit_token(&mut self, id: usize) -> String {
        let token = self.token(id).clone();
        let policy = self.rules.pos_map[&token.upos];
        let concept = match policy {
            ConceptPolicy::Predicate => format!("{}{PLACEHOLDER_SENSE}", concept_base(&token)),
            ConceptPolicy::Nominal | ConceptPolicy::Lemma => concept_base(&token),
            ConceptPolicy::Pronoun => {
                if self.rules.thing_pronouns.contains(&concept_base(&token)) {
                    "thing".to_string()
                } else {
                    "person".to_string()
                }
            }
        };
        let var = self.namer.name(&concept);
        self.builder.node(var.clone(), concept);
        self.anchors.insert(var.clone(), id);
        if policy == ConceptPolicy::Pronoun {
            if let Some(p) = person_value(&token) {
                self.builder
                    .attribute(var.clone(), "refer-person", Constant::symbol(p));
            }
        }
        if matches!(policy, ConceptPolicy::Pronoun | ConceptPolicy::Nominal) {
            if let Some(n) = number_value(&token) {
                self.builder
                    .attribute(var.clone(), "refer-number", Constant::symbol(n));
            }
        }
        for child in self.children[id].clone() {
            let role = match self.rules.role_for(&self.token(child).deprel) {
                Some(RoleRule::Role(r)) => r.clone(),
                _ => continue,
            };
            let target = self.emit(child);
            self.builder.edge(var.clone(), role, target);
        }
        var
    }
}

/// Converts one UD tree into a partial graph.
///
/// Tokens are kept when their UPOS has a concept policy and their relation
/// maps to a role or to coordination; the root is always kept. Kept tokens
/// whose head was dropped attach to the nearest kept ancestor, using their
/// own relation. Variables are `s<index><letter>[<n>]`, assigned in
/// depth-first order.
pub fn bootstrap_partial(
    sentence: &ConlluSentence,
    rules: &RuleTable,
    index: usize,
) -> Result<PartialGraph, BootstrapError> {
    sentence.check()?;
    let root = sentence.root().ok_or(BootstrapError::EmptySentence)?;
    if !rules.pos_map.contains_key(&root.upos) {
        return Err(BootstrapError::UnmappableRoot {
            form: root.form.clone(),
            upos: root.upos.clone(),
        });
    }
    let n = sentence.tokens.len();
    let kept: Vec<bool> = std::iter::once(false)
        .chain(
            sentence
                .tokens
                .iter()
                .map(|t| t.head == 0 || rules.keeps(t)),
        )
        .collect();
    let mut children = vec![Vec::new(); n + 1];
    for t in &sentence.tokens {
        if t.head == 0 || !kept[t.id] {
            continue;
        }
        let mut anchor = t.head;
        while !kept[anchor] {
            anchor = sentence.tokens[anchor - 1].head;
        }
        children[anchor].push(t.id);
    }
    let mut conv = Conversion {
        sentence,
        rules,
        children,
        builder: GraphBuilder::new(),
        anchors: BTreeMap::new(),
        namer: Namer {
            prefix: format!("s{index}"),
            used: HashMap::new(),
        },
    };
    let top = conv.emit(root.id);
    conv.builder.top(top);
    let graph = conv
        .builder
        .build()
        .expect("converter only links variables it created");
    Ok(PartialGraph {
        graph,
        anchors: conv.anchors,
    })
}

/// One training or inference example for the completion model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub sent_id: String,
    pub sentence: String,
    /// Single-line PENMAN.
    pub partial: String,
    /// Single-line PENMAN, empty when no reference is available.
    #[serde(default)]
    pub gold: String,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{sentences} sentences but {partials} partial graphs and {golds:?} gold graphs")]
    LengthMismatch {
        sentences: usize,
        partials: usize,
        golds: Option<usize>,
    },
    #[error("cannot serialize graph for `{sent_id}`: {source}")]
    Serialize {
        sent_id: String,
        #[source]
        source: SerializeError,
    },
    #[error("record line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Pairs each sentence with its partial graph and, when given, its gold
/// graph.
pub fn export_completion_records(
    sentences: &[ConlluSentence],
    partials: &[SemanticGraph],
    golds: Option<&[SemanticGraph]>,
) -> Result<Vec<CompletionRecord>, RecordError> {
    if partials.len() != sentences.len() || golds.is_some_and(|g| g.len() != sentences.len()) {
        return Err(RecordError::LengthMismatch {
            sentences: sentences.len(),
            partials: partials.len(),
            golds: golds.map(<[_]>::len),
        });
    }
    let line = |sent_id: &str, g: &SemanticGraph| {
        serialize_penman_single_line(g).map_err(|source| RecordError::Serialize {
            sent_id: sent_id.to_string(),
            source,
        })
    };
    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(CompletionRecord {
                sent_id: s.sent_id.clone(),
                sentence: s.text.clone(),
                partial: line(&s.sent_id, &partials[i])?,
                gold: match golds {
                    Some(g) => line(&s.sent_id, &g[i])?,
                    None => String::new(),
                },
            })
        })
        .collect()
}

/// One JSON object per line. Newlines and tabs inside fields are escaped
/// by JSON string rules.
pub fn write_records(records: &[CompletionRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

pub fn read_records(text: &str) -> Result<Vec<CompletionRecord>, RecordError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| RecordError::Json { line: i + 1, source })
        })
        .collect()
}

/// Model output for one sentence. Without `sent_id` it is matched to
/// records by position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    #[serde(default)]
    pub sent_id: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("{records} records but {completions} completions")]
    LengthMismatch { records: usize, completions: usize },
    #[error("completion {index} is for `{found}`, expected `{expected}`")]
    IdMismatch {
        index: usize,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseFailure {
    pub sent_id: String,
    pub text: String,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub graphs: Vec<(String, SemanticGraph)>,
    /// Ids whose completion needed parenthesis repair.
    pub repaired: Vec<String>,
    pub failures: Vec<ParseFailure>,
}

/// Parses model completions, repairing parenthesis mismatches first.
/// Completions that still fail to parse are listed in `failures`.
///
/// When every completion carries a `sent_id` they are matched to records
/// by id; otherwise by position.
pub fn ingest_completions(
    records: &[CompletionRecord],
    completions: &[Completion],
) -> Result<IngestReport, IngestError> {
    if records.len() != completions.len() {
        return Err(IngestError::LengthMismatch {
            records: records.len(),
            completions: completions.len(),
        });
    }
    let by_id: Option<HashMap<&str, &Completion>> = completions
        .iter()
        .map(|c| c.sent_id.as_deref().map(|id| (id, c)))
        .collect();
    let mut report = IngestReport::default();
    for (i, record) in records.iter().enumerate() {
        let completion = match &by_id {
            Some(map) => *map.get(record.sent_id.as_str()).ok_or_else(|| {
                IngestError::IdMismatch {
                    index: i,
                    expected: record.sent_id.clone(),
                    found: completions[i].sent_id.clone().unwrap_or_default(),
                }
            })?,
            None => &completions[i],
        };
        let outcome = repair_parens(&completion.text);
        if outcome.status == RepairStatus::Repaired {
            report.repaired.push(record.sent_id.clone());
        }
        match parse_penman(&outcome.text) {
            Ok(g) => report.graphs.push((record.sent_id.clone(), g)),
            Err(e) => report.failures.push(ParseFailure {
                sent_id: record.sent_id.clone(),
                text: completion.text.clone(),
                error: e.to_string(),
            }),
        }
    }
    Ok(report)
}
