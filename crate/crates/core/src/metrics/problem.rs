//! Interned triple tables for two graphs and the match counts any variable
//! mapping between them would produce.

use std::collections::HashMap;

use crate::graph::{canonical_role, SemanticGraph};

#[derive(Debug, Default)]
pub(crate) struct Interner {
    ids: HashMap<String, u32>,
}

impl Interner {
    pub fn id(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.ids.len() as u32;
        self.ids.insert(s.to_string(), id);
        id
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompileOptions {
    /// Lowercase role labels.
    pub normalize_case: bool,
    /// Lowercase concepts and constants, drop quotes, deduplicate triples.
    pub standardize: bool,
}

/// One side of a comparison.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub vars: Vec<String>,
    pub concepts: Vec<u32>,
    pub top: usize,
    /// Per variable, sorted `(role, value)` pairs.
    pub attrs: Vec<Vec<(u32, u32)>>,
    /// Canonical `(source, role, target)` edges.
    pub edges: Vec<(usize, u32, usize)>,
}

impl Compiled {
    pub fn new(graph: &SemanticGraph, interner: &mut Interner, opts: CompileOptions) -> Self {
        let vars: Vec<String> = graph.nodes().iter().map(|n| n.var.clone()).collect();
        let index: HashMap<&str, usize> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let label = |s: &str| {
            if opts.standardize {
                s.to_lowercase()
            } else {
                s.to_string()
            }
        };
        let role_label = |s: &str| {
            if opts.normalize_case || opts.standardize {
                s.to_lowercase()
            } else {
                s.to_string()
            }
        };
        let concepts = graph
            .nodes()
            .iter()
            .map(|n| interner.id(&label(&n.concept)))
            .collect();
        let mut attrs = vec![Vec::new(); vars.len()];
        for a in graph.attributes() {
            let value = if opts.standardize {
                a.value.text.to_lowercase()
            } else {
                a.value.surface()
            };
            let role = interner.id(&role_label(&a.role));
            attrs[index[a.source.as_str()]].push((role, interner.id(&value)));
        }
        for list in &mut attrs {
            list.sort_unstable();
            if opts.standardize {
                list.dedup();
            }
        }
        let mut edges: Vec<(usize, u32, usize)> = graph
            .edges()
            .iter()
            .map(|e| {
                let (role, swapped) = canonical_role(&e.role);
                let (s, t) = (index[e.source.as_str()], index[e.target.as_str()]);
                let role = interner.id(&role_label(role));
                if swapped {
                    (t, role, s)
                } else {
                    (s, role, t)
                }
            })
            .collect();
        if opts.standardize {
            edges.sort_unstable();
            edges.dedup();
        }
        Compiled {
            top: index[graph.top()],
            vars,
            concepts,
            attrs,
            edges,
        }
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attrs.iter().map(Vec::len).sum()
    }

    pub fn triple_count(&self) -> usize {
        1 + self.vars.len() + self.edges.len() + self.attribute_count()
    }
}

/// Edges between one ordered pair of variables, as `(role, count)`.
#[derive(Debug, Clone)]
pub(crate) struct Group {
    pub a: usize,
    pub b: usize,
    pub roles: Vec<(u32, u32)>,
}

impl Group {
    pub fn size(&self) -> u32 {
        self.roles.iter().map(|r| r.1).sum()
    }
}

fn group_edges(edges: &[(usize, u32, usize)]) -> HashMap<(usize, usize), Vec<(u32, u32)>> {
    let mut out: HashMap<(usize, usize), HashMap<u32, u32>> = HashMap::new();
    for &(s, r, t) in edges {
        *out.entry((s, t)).or_default().entry(r).or_default() += 1;
    }
    out.into_iter()
        .map(|(k, roles)| {
            let mut v: Vec<(u32, u32)> = roles.into_iter().collect();
            v.sort_unstable();
            (k, v)
        })
        .collect()
}

fn multiset_overlap(a: &[(u32, u32)], b: &[(u32, u32)]) -> u32 {
    // Both sorted.
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn role_overlap(a: &[(u32, u32)], b: &[(u32, u32)]) -> u32 {
    let mut n = 0;
    for &(r, c) in a {
        if let Ok(k) = b.binary_search_by_key(&r, |x| x.0) {
            n += c.min(b[k].1);
        }
    }
    n
}

/// Matched-triple counts split by triple kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Breakdown {
    pub top: u32,
    pub instance: u32,
    pub relation: u32,
    pub attribute: u32,
}

/// A mapping from `left` variables to `right` variables.
pub(crate) type Mapping = Vec<Option<usize>>;

/// Matching tables between a left and a right graph. Everything here is
/// symmetric in the triple count, so callers may put the smaller graph on
/// the left.
#[derive(Debug)]
pub(crate) struct Problem {
    pub left: Compiled,
    pub right: Compiled,
    instance: Vec<Vec<bool>>,
    attribute: Vec<Vec<u32>>,
    /// instance + attribute + top, per `(left, right)` pair.
    pub unary: Vec<Vec<u32>>,
    pub groups: Vec<Group>,
    /// Groups touching each left variable; self-loops appear once.
    pub incident: Vec<Vec<usize>>,
    right_groups: HashMap<(usize, usize), Vec<(u32, u32)>>,
}

impl Problem {
    pub fn new(left: Compiled, right: Compiled) -> Self {
        let (n, m) = (left.var_count(), right.var_count());
        let mut instance = vec![vec![false; m]; n];
        let mut attribute = vec![vec![0; m]; n];
        let mut unary = vec![vec![0; m]; n];
        for i in 0..n {
            for j in 0..m {
                let inst = left.concepts[i] == right.concepts[j];
                let attr = multiset_overlap(&left.attrs[i], &right.attrs[j]);
                let top = (i == left.top && j == right.top) as u32;
                instance[i][j] = inst;
                attribute[i][j] = attr;
                unary[i][j] = inst as u32 + attr + top;
            }
        }
        let mut groups: Vec<Group> = group_edges(&left.edges)
            .into_iter()
            .map(|((a, b), roles)| Group { a, b, roles })
            .collect();
        groups.sort_unstable_by_key(|g| (g.a, g.b));
        let mut incident = vec![Vec::new(); n];
        for (k, g) in groups.iter().enumerate() {
            incident[g.a].push(k);
            if g.b != g.a {
                incident[g.b].push(k);
            }
        }
        let right_groups = group_edges(&right.edges);
        Problem {
            left,
            right,
            instance,
            attribute,
            unary,
            groups,
            incident,
            right_groups,
        }
    }

    pub fn left_len(&self) -> usize {
        self.left.var_count()
    }

    pub fn right_len(&self) -> usize {
        self.right.var_count()
    }

    /// Matched edges of group `g` when its endpoints map to `(ja, jb)`.
    pub fn binary(&self, g: usize, ja: usize, jb: usize) -> u32 {
        match self.right_groups.get(&(ja, jb)) {
            Some(roles) => role_overlap(&self.groups[g].roles, roles),
            None => 0,
        }
    }

    fn group_score(&self, g: usize, mapping: &[Option<usize>]) -> u32 {
        let group = &self.groups[g];
        match (mapping[group.a], mapping[group.b]) {
            (Some(ja), Some(jb)) => self.binary(g, ja, jb),
            _ => 0,
        }
    }

    pub fn score(&self, mapping: &[Option<usize>]) -> u32 {
        let unary: u32 = mapping
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| self.unary[i][j]))
            .sum();
        let binary: u32 = (0..self.groups.len())
            .map(|g| self.group_score(g, mapping))
            .sum();
        unary + binary
    }

    /// Score contribution of the listed left variables and every group
    /// touching them (each group counted once).
    pub fn local_score(&self, mapping: &[Option<usize>], vars: &[usize]) -> u32 {
        let mut total = 0;
        let mut seen: Vec<usize> = Vec::new();
        for &i in vars {
            if let Some(j) = mapping[i] {
                total += self.unary[i][j];
            }
            for &g in &self.incident[i] {
                if !seen.contains(&g) {
                    seen.push(g);
                    total += self.group_score(g, mapping);
                }
            }
        }
        total
    }

    pub fn breakdown(&self, mapping: &[Option<usize>]) -> Breakdown {
        let mut b = Breakdown::default();
        for (i, j) in mapping.iter().enumerate() {
            if let Some(j) = *j {
                b.instance += self.instance[i][j] as u32;
                b.attribute += self.attribute[i][j];
                b.top += (i == self.left.top && j == self.right.top) as u32;
            }
        }
        b.relation = (0..self.groups.len())
            .map(|g| self.group_score(g, mapping))
            .sum();
        b
    }

    /// Upper bound on what left variable `i` can add through its own
    /// unary triples.
    pub fn best_unary(&self, i: usize) -> u32 {
        self.unary[i].iter().copied().max().unwrap_or(0)
    }
}

/// Inverts a left→right mapping into right→left.
pub(crate) fn invert(mapping: &[Option<usize>], right_len: usize) -> Mapping {
    let mut out = vec![None; right_len];
    for (i, j) in mapping.iter().enumerate() {
        if let Some(j) = *j {
            out[j] = Some(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_penman;

    fn problem(a: &str, b: &str, opts: CompileOptions) -> Problem {
        let mut interner = Interner::default();
        let a = Compiled::new(&parse_penman(a).unwrap(), &mut interner, opts);
        let b = Compiled::new(&parse_penman(b).unwrap(), &mut interner, opts);
        Problem::new(a, b)
    }

    #[test]
    fn identity_mapping_matches_everything() {
        let text = "(a / and :op1 (b / x :ARG0 (c / y)) :op1-of (d / z) :mod \"q\" :mod \"q\")";
        let p = problem(text, text, CompileOptions::default());
        let id: Mapping = (0..p.left_len()).map(Some).collect();
        assert_eq!(p.score(&id) as usize, p.left.triple_count());
        let b = p.breakdown(&id);
        assert_eq!(b.top + b.instance + b.relation + b.attribute, p.score(&id));
    }

    #[test]
    fn case_normalization_of_roles() {
        let a = "(a / x :Arg0 (b / y))";
        let b = "(a / x :ARG0 (b / y))";
        let id: Mapping = vec![Some(0), Some(1)];
        let strict = problem(a, b, CompileOptions::default());
        assert_eq!(strict.score(&id), 3);
        let loose = problem(
            a,
            b,
            CompileOptions {
                normalize_case: true,
                standardize: false,
            },
        );
        assert_eq!(loose.score(&id), 4);
    }

    #[test]
    fn standardization_dedupes() {
        let p = problem(
            "(a / X :mod \"Q\" :mod q)",
            "(a / x :mod q)",
            CompileOptions {
                normalize_case: true,
                standardize: true,
            },
        );
        assert_eq!(p.left.triple_count(), 3);
        assert_eq!(p.score(&[Some(0)]), 3);
    }

    #[test]
    fn local_score_counts_shared_groups_once() {
        let text = "(a / x :ARG0 (b / y) :ARG1 b)";
        let p = problem(text, text, CompileOptions::default());
        let id: Mapping = vec![Some(0), Some(1)];
        assert_eq!(p.local_score(&id, &[0, 1]), p.score(&id));
    }
}
