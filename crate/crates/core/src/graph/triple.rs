use std::fmt;

use super::SemanticGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TripleKind {
    Top,
    Instance,
    Relation,
    Attribute,
}

/// The unit of graph comparison.
///
/// * top: `(TOP, top, var)`
/// * instance: `(var, instance, concept)`
/// * relation: `(source, role, target)` with inverse roles folded forward
/// * attribute: `(var, role, constant)`; quoted constants keep their quotes
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub kind: TripleKind,
    pub source: String,
    pub role: String,
    pub target: String,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.role, self.source, self.target)
    }
}

// `-of` roles that are not inversions of another role.
const NON_INVERTED_OF: &[&str] = &["consist-of", "prep-out-of", "prep-on-behalf-of"];

/// True for roles such as `ARG0-of` that name the inverse of another role.
pub fn is_inverse_role(role: &str) -> bool {
    let lower = role.to_ascii_lowercase();
    lower.len() > 3 && lower.ends_with("-of") && !NON_INVERTED_OF.contains(&lower.as_str())
}

/// Folds an inverse role into `(forward_role, swapped)`.
pub fn canonical_role(role: &str) -> (&str, bool) {
    if is_inverse_role(role) {
        (&role[..role.len() - 3], true)
    } else {
        (role, false)
    }
}

impl SemanticGraph {
    /// One top triple, one instance triple per node, one relation triple
    /// per edge and one attribute triple per attribute, in that order.
    pub fn triples(&self) -> Vec<Triple> {
        let mut out =
            Vec::with_capacity(1 + self.nodes().len() + self.edges().len() + self.attributes().len());
        out.push(Triple {
            kind: TripleKind::Top,
            source: "TOP".to_string(),
            role: "top".to_string(),
            target: self.top().to_string(),
        });
        for n in self.nodes() {
            out.push(Triple {
                kind: TripleKind::Instance,
                source: n.var.clone(),
                role: "instance".to_string(),
                target: n.concept.clone(),
            });
        }
        for e in self.edges() {
            let (role, swapped) = canonical_role(&e.role);
            let (source, target) = if swapped {
                (&e.target, &e.source)
            } else {
                (&e.source, &e.target)
            };
            out.push(Triple {
                kind: TripleKind::Relation,
                source: source.clone(),
                role: role.to_string(),
                target: target.clone(),
            });
        }
        for a in self.attributes() {
            out.push(Triple {
                kind: TripleKind::Attribute,
                source: a.source.clone(),
                role: a.role.clone(),
                target: a.value.surface(),
            });
        }
        out
    }
}
