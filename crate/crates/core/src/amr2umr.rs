//! AMR-to-UMR role relabeling.
//!
//! Each mapped AMR role has an ordered list of UMR candidates and a
//! selector that picks one. Split roles such as `:source` are resolved by
//! an animacy/motion rule table; any decision can be overridden from a
//! file so that an external classifier's choices can be replayed.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{canonical_role, Edge, SemanticGraph};

const DEFAULT_MAPPINGS: &str = include_str!("../data/amr_roles.tsv");
const DEFAULT_LEXICON: &str = include_str!("../data/animacy.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    Identity,
    First,
    AnimacyHeuristic,
}

impl Selector {
    pub fn name(self) -> &'static str {
        match self {
            Selector::Identity => "identity",
            Selector::First => "first",
            Selector::AnimacyHeuristic => "animacy-heuristic",
        }
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Selector::Identity),
            "first" => Ok(Selector::First),
            "animacy-heuristic" => Ok(Selector::AnimacyHeuristic),
            other => Err(other.to_string()),
        }
    }
}

/// Role labels are stored without the leading colon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleMapping {
    pub source_role: String,
    pub candidates: Vec<String>,
    pub selector: Selector,
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected 3 tab-separated columns")]
    BadLine { line: usize },
    #[error("line {line}: role `{role}` is mapped twice")]
    DuplicateSourceRole { line: usize, role: String },
    #[error("line {line}: role `{role}` has no candidates")]
    EmptyCandidates { line: usize, role: String },
    #[error("line {line}: unknown selector `{selector}`")]
    UnknownSelector { line: usize, selector: String },
}

fn bare(role: &str) -> String {
    role.trim().trim_start_matches(':').to_string()
}

pub fn parse_mappings(text: &str) -> Result<Vec<RoleMapping>, MappingError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split('\t').collect();
        if cols.len() != 3 {
            return Err(MappingError::BadLine { line });
        }
        let source_role = bare(cols[0]);
        let candidates: Vec<String> = cols[1]
            .split(',')
            .map(bare)
            .filter(|c| !c.is_empty())
            .collect();
        if candidates.is_empty() {
            return Err(MappingError::EmptyCandidates {
                line,
                role: source_role,
            });
        }
        let selector = cols[2]
            .trim()
            .parse()
            .map_err(|selector| MappingError::UnknownSelector { line, selector })?;
        if !seen.insert(source_role.to_lowercase()) {
            return Err(MappingError::DuplicateSourceRole {
                line,
                role: source_role,
            });
        }
        out.push(RoleMapping {
            source_role,
            candidates,
            selector,
        });
    }
    Ok(out)
}

pub fn load_mappings(path: &Path) -> Result<Vec<RoleMapping>, MappingError> {
    let text = std::fs::read_to_string(path).map_err(|source| MappingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_mappings(&text)
}

/// The bundled seed table.
pub fn default_mappings() -> Vec<RoleMapping> {
    parse_mappings(DEFAULT_MAPPINGS).expect("bundled mapping table is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionCondition {
    Motion,
    Other,
    Any,
}

/// One row of the split-role decision table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preference {
    pub animate: bool,
    pub motion: MotionCondition,
    pub roles: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lexicon line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnimacyLexicon {
    pub animate_concepts: BTreeSet<String>,
    pub animate_suffixes: Vec<String>,
    pub motion_predicates: BTreeSet<String>,
    pub preferences: Vec<Preference>,
}

impl Default for AnimacyLexicon {
    fn default() -> Self {
        AnimacyLexicon::from_tsv(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }
}

/// Concept with any numeric sense suffix removed: `walk-01` → `walk`.
fn lemma(concept: &str) -> String {
    let lower = concept.to_lowercase();
    match lower.rsplit_once('-') {
        Some((head, sense)) if !head.is_empty() && sense.chars().all(|c| c.is_ascii_digit()) => {
            head.to_string()
        }
        _ => lower,
    }
}

impl AnimacyLexicon {
    pub fn from_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut lex = AnimacyLexicon {
            animate_concepts: BTreeSet::new(),
            animate_suffixes: Vec::new(),
            motion_predicates: BTreeSet::new(),
            preferences: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |message: &str| LexiconError {
                line,
                message: message.to_string(),
            };
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            match cols.as_slice() {
                ["animate", c] => {
                    lex.animate_concepts.insert(c.to_lowercase());
                }
                ["suffix", s] => lex.animate_suffixes.push(s.to_lowercase()),
                ["motion", p] => {
                    lex.motion_predicates.insert(p.to_lowercase());
                }
                ["prefer", animacy, motion, roles] => {
                    let animate = match *animacy {
                        "animate" => true,
                        "inanimate" => false,
                        _ => return Err(err("animacy must be animate or inanimate")),
                    };
                    let motion = match *motion {
                        "motion" => MotionCondition::Motion,
                        "other" => MotionCondition::Other,
                        "*" => MotionCondition::Any,
                        _ => return Err(err("motion must be motion, other or *")),
                    };
                    let roles: Vec<String> =
                        roles.split(',').map(bare).filter(|r| !r.is_empty()).collect();
                    if roles.is_empty() {
                        return Err(err("preference lists no roles"));
                    }
                    lex.preferences.push(Preference {
                        animate,
                        motion,
                        roles,
                    });
                }
                _ => return Err(err("unrecognized row")),
            }
        }
        Ok(lex)
    }

    /// Total: anything not listed and not matching a suffix is inanimate.
    pub fn is_animate(&self, concept: &str) -> bool {
        let l = lemma(concept);
        self.animate_concepts.contains(&l)
            || self
                .animate_suffixes
                .iter()
                .any(|s| l.len() > s.len() + 2 && l.ends_with(s.as_str()))
    }

    pub fn is_motion(&self, predicate: &str) -> bool {
        self.motion_predicates.contains(&lemma(predicate))
    }
}

/// Externally supplied choices keyed by (sent_id, head var, role, dependent
/// var). Roles are written in their forward form without a colon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecisionOverrides {
    choices: HashMap<(String, String, String, String), String>,
}

impl DecisionOverrides {
    /// Rows: sent_id TAB head var TAB role TAB dependent var TAB chosen role.
    pub fn from_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut choices = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let [sent, head, role, dep, chosen] = cols.as_slice() else {
                return Err(LexiconError {
                    line: i + 1,
                    message: "expected 5 tab-separated columns".into(),
                });
            };
            choices.insert(
                (sent.to_string(), head.to_string(), bare(role), dep.to_string()),
                bare(chosen),
            );
        }
        Ok(DecisionOverrides { choices })
    }

    pub fn insert(&mut self, sent_id: &str, head: &str, role: &str, dependent: &str, chosen: &str) {
        self.choices.insert(
            (sent_id.into(), head.into(), bare(role), dependent.into()),
            bare(chosen),
        );
    }

    fn get(&self, sent_id: &str, head: &str, role: &str, dependent: &str) -> Option<&str> {
        self.choices
            .get(&(sent_id.into(), head.into(), role.into(), dependent.into()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }
}

/// Audit record for one edge whose role had a mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub sent_id: String,
    /// Head and dependent in forward orientation.
    pub head: String,
    pub dependent: String,
    pub role: String,
    pub candidates: Vec<String>,
    pub chosen: String,
    pub selector: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("override for {head} :{role} {dependent} picks `{chosen}`, which is not a candidate")]
    OverrideNotCandidate {
        head: String,
        role: String,
        dependent: String,
        chosen: String,
    },
}

fn select(
    mapping: &RoleMapping,
    lexicon: &AnimacyLexicon,
    graph: &SemanticGraph,
    head: &str,
    dependent: &str,
) -> (String, String) {
    match mapping.selector {
        Selector::Identity => (mapping.source_role.clone(), "identity mapping".into()),
        Selector::First => (mapping.candidates[0].clone(), "first candidate".into()),
        Selector::AnimacyHeuristic => {
            let dep_concept = graph.concept(dependent).unwrap_or_default();
            let head_concept = graph.concept(head).unwrap_or_default();
            let animate = lexicon.is_animate(dep_concept);
            let motion = lexicon.is_motion(head_concept);
            let describe = format!(
                "{} `{dep_concept}`, {} head `{head_concept}`",
                if animate { "animate" } else { "inanimate" },
                if motion { "motion" } else { "non-motion" },
            );
            let row = lexicon.preferences.iter().find(|p| {
                p.animate == animate
                    && match p.motion {
                        MotionCondition::Any => true,
                        MotionCondition::Motion => motion,
                        MotionCondition::Other => !motion,
                    }
            });
            let picked = row.and_then(|p| {
                p.roles
                    .iter()
                    .find(|r| mapping.candidates.iter().any(|c| c.eq_ignore_ascii_case(r)))
            });
            match picked {
                Some(r) => (r.clone(), describe),
                None => (
                    mapping.candidates[0].clone(),
                    format!("{describe}; no preference applies, first candidate"),
                ),
            }
        }
    }
}

/// Rewrites edge roles according to `mappings`. Roles without a mapping
/// pass through unchanged; inverse roles (`:source-of`) are looked up by
/// their forward form and keep the `-of` suffix. Nodes, attributes and
/// edge endpoints are untouched. One [`Decision`] is returned per mapped
/// edge, in edge order.
pub fn convert_roles(
    graph: &SemanticGraph,
    sent_id: &str,
    mappings: &[RoleMapping],
    lexicon: &AnimacyLexicon,
    overrides: Option<&DecisionOverrides>,
) -> Result<(SemanticGraph, Vec<Decision>), ConvertError> {
    let table: HashMap<String, &RoleMapping> = mappings
        .iter()
        .map(|m| (m.source_role.to_lowercase(), m))
        .collect();
    let mut decisions = Vec::new();
    let mut new_roles = Vec::with_capacity(graph.edges().len());
    for edge in graph.edges() {
        let Edge {
            source,
            role,
            target,
            ..
        } = edge;
        let (base, inverted) = canonical_role(role);
        let (head, dependent) = if inverted {
            (target, source)
        } else {
            (source, target)
        };
        let Some(mapping) = table.get(&base.to_lowercase()) else {
            new_roles.push(role.clone());
            continue;
        };
        let (chosen, selector, rationale) =
            match overrides.and_then(|o| o.get(sent_id, head, base, dependent)) {
                Some(c) => {
                    if !mapping.candidates.iter().any(|m| m == c) && c != mapping.source_role {
                        return Err(ConvertError::OverrideNotCandidate {
                            head: head.clone(),
                            role: base.to_string(),
                            dependent: dependent.clone(),
                            chosen: c.to_string(),
                        });
                    }
                    (c.to_string(), "override".to_string(), "decision file".to_string())
                }
                None => {
                    let (c, why) = select(mapping, lexicon, graph, head, dependent);
                    (c, mapping.selector.name().to_string(), why)
                }
            };
        // Identity keeps the label exactly as written, including its case.
        let label = if mapping.selector == Selector::Identity && selector != "override" {
            role.clone()
        } else if inverted {
            format!("{chosen}-of")
        } else {
            chosen.clone()
        };
        new_roles.push(label);
        decisions.push(Decision {
            sent_id: sent_id.to_string(),
            head: head.clone(),
            dependent: dependent.clone(),
            role: base.to_string(),
            candidates: mapping.candidates.clone(),
            chosen,
            selector,
            rationale,
        });
    }
    let converted = graph.map_edge_roles(|i, _| new_roles[i].clone());
    Ok((converted, decisions))
}
