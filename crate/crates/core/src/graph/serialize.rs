use std::collections::HashSet;
use std::fmt::Write;

use thiserror::Error;

use super::parse::variable_like;
use super::{is_inverse_role, Constant, SemanticGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("graph is disconnected; unreachable variables: {}", .0.join(", "))]
    Disconnected(Vec<String>),
}

const INDENT: &str = "    ";

/// Serializes a graph in indented PENMAN form.
///
/// Children keep their source-text order when the graph was parsed; built
/// graphs order children by role label and then target. Edges that can
/// only be reached against their direction are written as inverse roles.
pub fn serialize_penman(graph: &SemanticGraph) -> Result<String, SerializeError> {
    Writer::new(graph, false).run()
}

/// Same as [`serialize_penman`] but on a single line.
pub fn serialize_penman_single_line(graph: &SemanticGraph) -> Result<String, SerializeError> {
    Writer::new(graph, true).run()
}

enum Item<'g> {
    Edge {
        index: usize,
        role: String,
        other: &'g str,
    },
    Attribute {
        role: &'g str,
        value: &'g Constant,
    },
}

struct Writer<'g> {
    graph: &'g SemanticGraph,
    single_line: bool,
    forward_reachable: HashSet<&'g str>,
    visited: HashSet<&'g str>,
    emitted: Vec<bool>,
    vars: HashSet<&'g str>,
    out: String,
}

impl<'g> Writer<'g> {
    fn new(graph: &'g SemanticGraph, single_line: bool) -> Self {
        Writer {
            graph,
            single_line,
            forward_reachable: HashSet::new(),
            visited: HashSet::new(),
            emitted: vec![false; graph.edges().len()],
            vars: graph.variable_set(),
            out: String::new(),
        }
    }

    fn run(mut self) -> Result<String, SerializeError> {
        let unreachable = self.graph.unreachable_variables();
        if !unreachable.is_empty() {
            return Err(SerializeError::Disconnected(unreachable));
        }
        self.forward_reachable = self.forward_closure();
        let top = self.graph.top();
        self.write_node(top, 0);
        Ok(self.out)
    }

    fn forward_closure(&self) -> HashSet<&'g str> {
        let mut seen = HashSet::from([self.graph.top()]);
        let mut stack = vec![self.graph.top()];
        while let Some(v) = stack.pop() {
            for e in self.graph.edges() {
                if e.source == v && seen.insert(e.target.as_str()) {
                    stack.push(e.target.as_str());
                }
            }
        }
        seen
    }

    fn items(&self, var: &'g str) -> Vec<Item<'g>> {
        let graph = self.graph;
        let mut keyed: Vec<((bool, u32, String, String), Item<'g>)> = Vec::new();
        for (index, e) in graph.edges().iter().enumerate() {
            if self.emitted[index] {
                continue;
            }
            if e.source == var {
                keyed.push((
                    (e.seq.is_none(), e.seq.unwrap_or(0), e.role.clone(), e.target.clone()),
                    Item::Edge {
                        index,
                        role: e.role.clone(),
                        other: &e.target,
                    },
                ));
            } else if e.target == var && !self.forward_reachable.contains(e.source.as_str()) {
                let role = invert(&e.role);
                keyed.push((
                    (true, 0, role.clone(), e.source.clone()),
                    Item::Edge {
                        index,
                        role,
                        other: &e.source,
                    },
                ));
            }
        }
        for a in graph.attributes() {
            if a.source == var {
                keyed.push((
                    (a.seq.is_none(), a.seq.unwrap_or(0), a.role.clone(), a.value.surface()),
                    Item::Attribute {
                        role: &a.role,
                        value: &a.value,
                    },
                ));
            }
        }
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.into_iter().map(|(_, item)| item).collect()
    }

    fn write_node(&mut self, var: &'g str, depth: usize) {
        self.visited.insert(var);
        let concept = self.graph.concept(var).unwrap_or_default();
        write!(self.out, "({} / {}", var, symbol_or_quoted(concept, &self.vars)).unwrap();
        let items = self.items(var);
        // Mark first so that a cycle back through a descendant does not
        // emit the same edge twice.
        for item in &items {
            if let Item::Edge { index, .. } = item {
                self.emitted[*index] = true;
            }
        }
        for item in items {
            self.separator(depth + 1);
            match item {
                Item::Edge { role, other, .. } => {
                    write!(self.out, ":{} ", role).unwrap();
                    if self.visited.contains(other) {
                        self.out.push_str(other);
                    } else {
                        self.write_node(other, depth + 1);
                    }
                }
                Item::Attribute { role, value } => {
                    write!(self.out, ":{} ", role).unwrap();
                    if value.quoted {
                        self.out.push_str(&quote(&value.text));
                    } else {
                        self.out.push_str(&symbol_or_quoted(&value.text, &self.vars));
                    }
                }
            }
        }
        self.out.push(')');
    }

    fn separator(&mut self, depth: usize) {
        if self.single_line {
            self.out.push(' ');
        } else {
            self.out.push('\n');
            for _ in 0..depth {
                self.out.push_str(INDENT);
            }
        }
    }
}

fn invert(role: &str) -> String {
    if is_inverse_role(role) {
        role[..role.len() - 3].to_string()
    } else {
        format!("{role}-of")
    }
}

fn quote(text: &str) -> String {
    let mut s = String::with_capacity(text.len() + 2);
    s.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    s
}

// Unquoted text that would not read back as the same symbol gets quoted.
fn symbol_or_quoted(text: &str, vars: &HashSet<&str>) -> String {
    let unsafe_symbol = text.is_empty()
        || text.starts_with(':')
        || text
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"'))
        || vars.contains(text)
        || variable_like(text);
    if unsafe_symbol {
        quote(text)
    } else {
        text.to_string()
    }
}
