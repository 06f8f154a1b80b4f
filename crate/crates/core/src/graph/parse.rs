use std::collections::HashSet;

use regex::Regex;
use std::sync::OnceLock;
use thiserror::Error;

use super::{Attribute, Constant, Edge, Node, SemanticGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input")]
    EmptyInput,
    #[error("unbalanced parentheses at byte {position}")]
    Unbalanced { position: usize },
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("variable `{variable}` defined twice (byte {position})")]
    DuplicateVariable { variable: String, position: usize },
    #[error("reference to undefined variable `{variable}` (byte {position})")]
    UndefinedVariable { variable: String, position: usize },
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::EmptyInput => None,
            ParseError::Unbalanced { position }
            | ParseError::Syntax { position, .. }
            | ParseError::DuplicateVariable { position, .. }
            | ParseError::UndefinedVariable { position, .. } => Some(*position),
        }
    }
}

enum Target {
    Node(String),
    Symbol { text: String, position: usize },
    Quoted(String),
}

struct Child {
    source: String,
    role: String,
    target: Target,
    seq: u32,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    nodes: Vec<Node>,
    defined: HashSet<String>,
    children: Vec<Child>,
}

/// Parses one parenthesized PENMAN expression.
///
/// A bare symbol target is a re-entrant reference when it names a variable
/// defined anywhere in the graph and a constant otherwise. Unquoted
/// symbols shaped like variable names (`s2i`, `z9`) that are never
/// defined are rejected as undefined references.
pub fn parse_penman(text: &str) -> Result<SemanticGraph, ParseError> {
    let start = text
        .char_indices()
        .find(|(_, c)| !c.is_whitespace())
        .map(|(i, _)| i)
        .ok_or(ParseError::EmptyInput)?;
    let mut p = Parser {
        text,
        pos: start,
        nodes: Vec::new(),
        defined: HashSet::new(),
        children: Vec::new(),
    };
    if p.peek() != Some('(') {
        return Err(p.syntax("expected `(`"));
    }
    let top = p.node()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(if c == ')' {
            ParseError::Unbalanced { position: p.pos }
        } else {
            p.syntax("unexpected content after graph")
        });
    }
    p.finish(top)
}

pub(super) fn variable_like(s: &str) -> bool {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[a-z]+[0-9]+[a-z]*[0-9]*$").unwrap())
        .is_match(s)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn eof_or(&self, message: &str) -> ParseError {
        if self.peek().is_none() {
            ParseError::Unbalanced { position: self.pos }
        } else {
            self.syntax(message)
        }
    }

    fn read_while<F: Fn(char) -> bool>(&mut self, keep: F) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if keep(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(ParseError::Syntax {
                        position: start,
                        message: "unterminated string".to_string(),
                    })
                }
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some(c) => out.push(c),
                    None => {
                        return Err(ParseError::Syntax {
                            position: start,
                            message: "unterminated string".to_string(),
                        })
                    }
                },
                Some(c) => out.push(c),
            }
        }
    }

    // Assumes the cursor is on `(`; returns the variable of the node.
    fn node(&mut self) -> Result<String, ParseError> {
        self.bump();
        self.skip_ws();
        let var_pos = self.pos;
        let var = self
            .read_while(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | '/' | ':' | '"'))
            .to_string();
        if var.is_empty() {
            return Err(self.eof_or("expected variable"));
        }
        if !self.defined.insert(var.clone()) {
            return Err(ParseError::DuplicateVariable {
                variable: var,
                position: var_pos,
            });
        }
        self.skip_ws();
        if self.peek() != Some('/') {
            return Err(self.eof_or("expected `/` after variable"));
        }
        self.bump();
        self.skip_ws();
        let concept = match self.peek() {
            Some('"') => self.quoted()?,
            _ => self
                .read_while(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | '"'))
                .to_string(),
        };
        if concept.is_empty() {
            return Err(self.eof_or("expected concept"));
        }
        self.nodes.push(Node {
            var: var.clone(),
            concept,
        });

        let mut seq = 0u32;
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(ParseError::Unbalanced { position: self.pos }),
                Some(')') => {
                    self.bump();
                    return Ok(var);
                }
                Some(':') => {
                    self.bump();
                    let role = self
                        .read_while(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | '"'))
                        .to_string();
                    if role.is_empty() {
                        return Err(self.syntax("empty role label"));
                    }
                    self.skip_ws();
                    let target = match self.peek() {
                        None => return Err(ParseError::Unbalanced { position: self.pos }),
                        Some('(') => Target::Node(self.node()?),
                        Some('"') => Target::Quoted(self.quoted()?),
                        Some(')') | Some(':') => {
                            return Err(self.syntax("role without a target"))
                        }
                        Some(_) => {
                            let position = self.pos;
                            let text = self
                                .read_while(|c| !c.is_whitespace() && !matches!(c, '(' | ')'))
                                .to_string();
                            Target::Symbol { text, position }
                        }
                    };
                    self.children.push(Child {
                        source: var.clone(),
                        role,
                        target,
                        seq,
                    });
                    seq += 1;
                }
                Some(_) => return Err(self.syntax("expected role or `)`")),
            }
        }
    }

    fn finish(self, top: String) -> Result<SemanticGraph, ParseError> {
        let mut edges = Vec::new();
        let mut attributes = Vec::new();
        for child in self.children {
            match child.target {
                Target::Node(v) => edges.push(Edge {
                    source: child.source,
                    role: child.role,
                    target: v,
                    seq: Some(child.seq),
                }),
                Target::Symbol { text, position } => {
                    if self.defined.contains(&text) {
                        edges.push(Edge {
                            source: child.source,
                            role: child.role,
                            target: text,
                            seq: Some(child.seq),
                        });
                    } else if variable_like(&text) {
                        return Err(ParseError::UndefinedVariable {
                            variable: text,
                            position,
                        });
                    } else {
                        attributes.push(Attribute {
                            source: child.source,
                            role: child.role,
                            value: Constant::symbol(text),
                            seq: Some(child.seq),
                        });
                    }
                }
                Target::Quoted(text) => attributes.push(Attribute {
                    source: child.source,
                    role: child.role,
                    value: Constant::quoted(text),
                    seq: Some(child.seq),
                }),
            }
        }
        // Invariants already hold by construction.
        Ok(SemanticGraph::new(top, self.nodes, edges, attributes)
            .expect("parser produced an invalid graph"))
    }
}
