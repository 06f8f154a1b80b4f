use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use regex::Regex;
use thiserror::Error;

use super::SemanticGraph;

const DEFAULT_VOCABULARY: &str = include_str!("../../data/umr_vocabulary.tsv");

/// Attribute roles whose values come from a closed set.
pub const CONSTRAINED_ROLES: [&str; 5] = ["aspect", "modstr", "refer-number", "refer-person", "mode"];

#[derive(Debug, Error)]
pub enum VocabularyError {
    #[error("line {line}: expected `<category>\\t<value>`")]
    Malformed { line: usize },
    #[error("line {line}: unknown category `{category}`")]
    UnknownCategory { line: usize, category: String },
    #[error("line {line}: bad role pattern: {source}")]
    BadPattern {
        line: usize,
        #[source]
        source: regex::Error,
    },
}

/// Allowed values for the closed-class UMR attributes plus the pattern
/// relation role labels must match.
#[derive(Debug, Clone)]
pub struct UmrVocabulary {
    values: BTreeMap<&'static str, BTreeSet<String>>,
    role_pattern: Regex,
}

impl Default for UmrVocabulary {
    fn default() -> Self {
        Self::from_tsv(DEFAULT_VOCABULARY).expect("bundled vocabulary is valid")
    }
}

impl UmrVocabulary {
    pub fn from_tsv(text: &str) -> Result<Self, VocabularyError> {
        let mut values: BTreeMap<&'static str, BTreeSet<String>> =
            CONSTRAINED_ROLES.iter().map(|r| (*r, BTreeSet::new())).collect();
        let mut role_pattern = Regex::new(r"^[A-Za-z][A-Za-z0-9-]*$").unwrap();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (category, value) = line
                .split_once('\t')
                .ok_or(VocabularyError::Malformed { line: i + 1 })?;
            let value = value.trim();
            if category == "role-pattern" {
                role_pattern = Regex::new(value)
                    .map_err(|source| VocabularyError::BadPattern { line: i + 1, source })?;
                continue;
            }
            let key = CONSTRAINED_ROLES
                .iter()
                .find(|r| **r == category)
                .ok_or_else(|| VocabularyError::UnknownCategory {
                    line: i + 1,
                    category: category.to_string(),
                })?;
            values.get_mut(key).unwrap().insert(value.to_lowercase());
        }
        Ok(UmrVocabulary {
            values,
            role_pattern,
        })
    }

    pub fn allows(&self, role: &str, value: &str) -> bool {
        match self.values.get(role.to_ascii_lowercase().as_str()) {
            Some(set) => set.contains(&value.to_lowercase()),
            None => true,
        }
    }

    pub fn values(&self, role: &str) -> Option<&BTreeSet<String>> {
        self.values.get(role)
    }

    pub fn role_pattern(&self) -> &Regex {
        &self.role_pattern
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    UnknownAttributeValue {
        var: String,
        role: String,
        value: String,
    },
    BadRoleLabel {
        source: String,
        role: String,
        target: String,
    },
    Disconnected {
        unreachable: Vec<String>,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::UnknownAttributeValue { var, role, value } => {
                write!(f, "{var} :{role} {value}: value not in vocabulary")
            }
            ValidationIssue::BadRoleLabel { source, role, target } => {
                write!(f, "{source} :{role} {target}: malformed role label")
            }
            ValidationIssue::Disconnected { unreachable } => {
                write!(f, "unreachable from top: {}", unreachable.join(" "))
            }
        }
    }
}

/// Checks a graph against the vocabulary. An empty list means clean.
pub fn validate_umr(graph: &SemanticGraph, vocab: &UmrVocabulary) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    for a in graph.attributes() {
        if !vocab.allows(&a.role, &a.value.text) {
            issues.push(ValidationIssue::UnknownAttributeValue {
                var: a.source.clone(),
                role: a.role.clone(),
                value: a.value.text.clone(),
            });
        }
    }
    for e in graph.edges() {
        if !vocab.role_pattern.is_match(&e.role) {
            issues.push(ValidationIssue::BadRoleLabel {
                source: e.source.clone(),
                role: e.role.clone(),
                target: e.target.clone(),
            });
        }
    }
    let unreachable = graph.unreachable_variables();
    if !unreachable.is_empty() {
        issues.push(ValidationIssue::Disconnected { unreachable });
    }
    issues
}
