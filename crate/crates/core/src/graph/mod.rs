//! Rooted, labeled, possibly re-entrant semantic graphs in PENMAN notation.
//!
//! A [`SemanticGraph`] keeps role labels and variable names exactly as they
//! were written. Edges are stored in the direction they appear in the text,
//! so `:ARG0-of` edges stay inverted here; [`SemanticGraph::triples`] is where
//! inverse roles are folded into their forward form.

mod parse;
mod serialize;
mod triple;
mod validate;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub use parse::{parse_penman, ParseError};
pub use serialize::{serialize_penman, serialize_penman_single_line, SerializeError};
pub use triple::{canonical_role, is_inverse_role, Triple, TripleKind};
pub use validate::{validate_umr, UmrVocabulary, ValidationIssue, VocabularyError};

/// A node of the graph: a variable bound to a concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub var: String,
    pub concept: String,
}

/// A constant attached to a node, e.g. `:aspect Activity` or `:value ":)"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constant {
    pub text: String,
    /// Whether the constant was written between double quotes.
    pub quoted: bool,
}

impl Constant {
    pub fn symbol(text: impl Into<String>) -> Self {
        Constant {
            text: text.into(),
            quoted: false,
        }
    }

    pub fn quoted(text: impl Into<String>) -> Self {
        Constant {
            text: text.into(),
            quoted: true,
        }
    }

    /// Surface form: quoted constants keep their quotes.
    pub fn surface(&self) -> String {
        if self.quoted {
            format!("\"{}\"", self.text)
        } else {
            self.text.clone()
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface())
    }
}

/// A role edge between two variables. `role` has no leading colon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: String,
    pub role: String,
    pub target: String,
    /// Position among the children of `source` in the original text, if any.
    pub seq: Option<u32>,
}

/// A role whose target is a constant. `role` has no leading colon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub source: String,
    pub role: String,
    pub value: Constant,
    pub seq: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("top variable `{0}` is not a node")]
    MissingTop(String),
    #[error("variable `{0}` is defined more than once")]
    DuplicateVariable(String),
    #[error("variable `{0}` has an empty concept")]
    EmptyConcept(String),
    #[error("edge endpoint `{0}` is not a node")]
    UnknownEndpoint(String),
    #[error("role label on `{0}` is empty")]
    EmptyRole(String),
}

/// A sentence-level semantic graph.
///
/// Immutable once built; construct through [`parse_penman`] or
/// [`GraphBuilder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticGraph {
    top: String,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    attributes: Vec<Attribute>,
}

impl SemanticGraph {
    pub fn new(
        top: impl Into<String>,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        attributes: Vec<Attribute>,
    ) -> Result<Self, GraphError> {
        let top = top.into();
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if node.concept.is_empty() {
                return Err(GraphError::EmptyConcept(node.var.clone()));
            }
            if index.insert(node.var.clone(), i).is_some() {
                return Err(GraphError::DuplicateVariable(node.var.clone()));
            }
        }
        if !index.contains_key(&top) {
            return Err(GraphError::MissingTop(top));
        }
        for e in &edges {
            for end in [&e.source, &e.target] {
                if !index.contains_key(end) {
                    return Err(GraphError::UnknownEndpoint(end.clone()));
                }
            }
            if e.role.is_empty() {
                return Err(GraphError::EmptyRole(e.source.clone()));
            }
        }
        for a in &attributes {
            if !index.contains_key(&a.source) {
                return Err(GraphError::UnknownEndpoint(a.source.clone()));
            }
            if a.role.is_empty() {
                return Err(GraphError::EmptyRole(a.source.clone()));
            }
        }
        Ok(SemanticGraph {
            top,
            nodes,
            index,
            edges,
            attributes,
        })
    }

    pub fn top(&self) -> &str {
        &self.top
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn concept(&self, var: &str) -> Option<&str> {
        self.index.get(var).map(|&i| self.nodes[i].concept.as_str())
    }

    pub fn contains(&self, var: &str) -> bool {
        self.index.contains_key(var)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Variables that cannot be reached from the top when edges are
    /// treated as undirected, in node order.
    pub fn unreachable_variables(&self) -> Vec<String> {
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            let (s, t) = (self.index[&e.source], self.index[&e.target]);
            adjacency[s].push(t);
            adjacency[t].push(s);
        }
        let mut seen = vec![false; self.nodes.len()];
        let start = self.index[&self.top];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &m in &adjacency[n] {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        self.nodes
            .iter()
            .zip(seen)
            .filter(|(_, s)| !s)
            .map(|(n, _)| n.var.clone())
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.unreachable_variables().is_empty()
    }

    /// Returns a copy with every edge role passed through `f`. Node set,
    /// attributes and edge endpoints are untouched.
    pub fn map_edge_roles<F>(&self, mut f: F) -> SemanticGraph
    where
        F: FnMut(usize, &Edge) -> String,
    {
        let mut out = self.clone();
        for (i, edge) in out.edges.iter_mut().enumerate() {
            edge.role = f(i, &self.edges[i]);
        }
        out
    }

    pub(crate) fn variable_set(&self) -> HashSet<&str> {
        self.nodes.iter().map(|n| n.var.as_str()).collect()
    }
}

/// Incremental construction of a graph outside the parser.
///
/// Children added here carry no source position, so serialization orders
/// them by role label and then target.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    top: Option<String>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    attributes: Vec<Attribute>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, var: impl Into<String>, concept: impl Into<String>) -> &mut Self {
        let var = var.into();
        if self.top.is_none() {
            self.top = Some(var.clone());
        }
        self.nodes.push(Node {
            var,
            concept: concept.into(),
        });
        self
    }

    pub fn top(&mut self, var: impl Into<String>) -> &mut Self {
        self.top = Some(var.into());
        self
    }

    pub fn edge(
        &mut self,
        source: impl Into<String>,
        role: impl Into<String>,
        target: impl Into<String>,
    ) -> &mut Self {
        self.edges.push(Edge {
            source: source.into(),
            role: strip_colon(role.into()),
            target: target.into(),
            seq: None,
        });
        self
    }

    pub fn attribute(
        &mut self,
        source: impl Into<String>,
        role: impl Into<String>,
        value: Constant,
    ) -> &mut Self {
        self.attributes.push(Attribute {
            source: source.into(),
            role: strip_colon(role.into()),
            value,
            seq: None,
        });
        self
    }

    pub fn build(&self) -> Result<SemanticGraph, GraphError> {
        let top = self.top.clone().unwrap_or_default();
        SemanticGraph::new(
            top,
            self.nodes.clone(),
            self.edges.clone(),
            self.attributes.clone(),
        )
    }
}

fn strip_colon(role: String) -> String {
    match role.strip_prefix(':') {
        Some(r) => r.to_string(),
        None => role,
    }
}
