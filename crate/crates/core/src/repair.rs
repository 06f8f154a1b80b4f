//! Parenthesis repair for generated PENMAN text.
//!
//! Edits are parenthesis-only: a repair never adds or removes concepts,
//! roles or constants.

use serde::{Deserialize, Serialize};

use crate::graph::parse_penman;

/// Largest number of interior edits tried before giving up.
pub const EDIT_BUDGET: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairStatus {
    Clean,
    Repaired,
    Unrecoverable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Insert,
    Delete,
}

/// One `)` inserted before, or deleted at, a byte offset of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub position: usize,
    pub kind: EditKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub status: RepairStatus,
    pub text: String,
    pub edits: Vec<Edit>,
    /// Parse error of the input, for anything that was not clean.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Byte offsets of structural parentheses, skipping quoted strings.
struct Scan {
    closers: Vec<usize>,
    /// Offsets right after a token that is followed by whitespace and a
    /// role marker; inserting `)` there closes the preceding node.
    role_gaps: Vec<usize>,
    /// Net `(` minus `)`.
    net: i64,
    /// Offset just past the last non-whitespace character.
    content_end: usize,
}

fn scan(text: &str) -> Scan {
    let bytes = text.as_bytes();
    let mut closers = Vec::new();
    let mut role_gaps = Vec::new();
    let mut net = 0i64;
    let mut in_quote = false;
    let mut escaped = false;
    let mut last_content = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if in_quote {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_quote = false;
            }
            last_content = i + 1;
            continue;
        }
        match b {
            b'"' => in_quote = true,
            b'(' => net += 1,
            b')' => {
                net -= 1;
                closers.push(i);
            }
            b':' if i > 0 && bytes[i - 1].is_ascii_whitespace() && last_content > 0 => {
                role_gaps.push(last_content);
            }
            _ => {}
        }
        if !b.is_ascii_whitespace() {
            last_content = i + 1;
        }
    }
    Scan {
        closers,
        role_gaps,
        net,
        content_end: last_content,
    }
}

fn apply(text: &str, edits: &[Edit]) -> String {
    let mut sorted = edits.to_vec();
    sorted.sort_by_key(|e| (e.position, e.kind == EditKind::Delete));
    let mut out = String::with_capacity(text.len() + edits.len());
    let mut cursor = 0;
    for e in &sorted {
        out.push_str(&text[cursor..e.position]);
        cursor = e.position;
        match e.kind {
            EditKind::Insert => out.push(')'),
            EditKind::Delete => cursor += 1,
        }
    }
    out.push_str(&text[cursor..]);
    out
}

fn never_negative(text: &str) -> bool {
    let mut depth = 0i64;
    let mut in_quote = false;
    let mut escaped = false;
    for b in text.bytes() {
        if in_quote {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_quote = false;
            }
            continue;
        }
        match b {
            b'"' => in_quote = true,
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}

fn parses(text: &str) -> bool {
    parse_penman(text).is_ok()
}

/// Edits that only touch the end of the text: append missing closers or
/// drop surplus ones from the closing run.
fn trailing_edits(s: &Scan) -> Option<Vec<Edit>> {
    match s.net {
        0 => None,
        n if n > 0 => Some(
            (0..n)
                .map(|_| Edit {
                    position: s.content_end,
                    kind: EditKind::Insert,
                })
                .collect(),
        ),
        n => {
            let surplus = n.unsigned_abs() as usize;
            // The surplus must sit in the run of closers ending the text.
            let mut run = 0;
            let mut expect = s.content_end;
            for &c in s.closers.iter().rev() {
                if c + 1 != expect {
                    break;
                }
                run += 1;
                expect = c;
            }
            (run >= surplus).then(|| {
                s.closers[s.closers.len() - surplus..]
                    .iter()
                    .map(|&position| Edit {
                        position,
                        kind: EditKind::Delete,
                    })
                    .collect()
            })
        }
    }
}

/// Smallest edit set (up to [`EDIT_BUDGET`]) that makes the text parse.
/// Candidates are scanned in a fixed order, so the result is
/// deterministic.
fn search(text: &str, s: &Scan) -> Option<Vec<Edit>> {
    let mut inserts: Vec<usize> = s.role_gaps.clone();
    inserts.push(s.content_end);
    inserts.dedup();
    let deletes = &s.closers;
    for size in 1..=EDIT_BUDGET {
        for n_ins in 0..=size {
            let n_del = size - n_ins;
            if n_ins as i64 - n_del as i64 != s.net {
                continue;
            }
            let mut found = None;
            for_each_multiset(&inserts, n_ins, &mut |ins| {
                for_each_combination(deletes, n_del, &mut |del| {
                    let edits: Vec<Edit> = ins
                        .iter()
                        .map(|&position| Edit {
                            position,
                            kind: EditKind::Insert,
                        })
                        .chain(del.iter().map(|&position| Edit {
                            position,
                            kind: EditKind::Delete,
                        }))
                        .collect();
                    let candidate = apply(text, &edits);
                    if never_negative(&candidate) && parses(&candidate) {
                        found = Some(edits);
                        return true;
                    }
                    false
                })
            });
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

/// Calls `f` on every size-`k` multiset of `items` (indices non-decreasing)
/// until it returns true.
fn for_each_multiset(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(
        items: &[usize],
        k: usize,
        from: usize,
        acc: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if acc.len() == k {
            return f(acc);
        }
        for i in from..items.len() {
            acc.push(items[i]);
            if go(items, k, i, acc, f) {
                return true;
            }
            acc.pop();
        }
        false
    }
    go(items, k, 0, &mut Vec::with_capacity(k), f)
}

fn for_each_combination(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(
        items: &[usize],
        k: usize,
        from: usize,
        acc: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if acc.len() == k {
            return f(acc);
        }
        for i in from..items.len() {
            acc.push(items[i]);
            if go(items, k, i + 1, acc, f) {
                return true;
            }
            acc.pop();
        }
        false
    }
    go(items, k, 0, &mut Vec::with_capacity(k), f)
}

/// Fixes parenthesis mismatches in one PENMAN graph.
///
/// Text that already parses comes back byte-identical with status
/// `Clean`. Otherwise a trailing fix (append missing closers, trim surplus
/// closers at the end) is tried first, then a bounded search over
/// inserting `)` before a role or at the end and deleting existing `)`.
/// `Repaired` output always parses.
pub fn repair_parens(text: &str) -> RepairOutcome {
    let diagnostic = match parse_penman(text) {
        Ok(_) => {
            return RepairOutcome {
                status: RepairStatus::Clean,
                text: text.to_string(),
                edits: Vec::new(),
                diagnostic: None,
            }
        }
        Err(e) => e.to_string(),
    };
    let s = scan(text);
    let attempt = trailing_edits(&s)
        .filter(|edits| parses(&apply(text, edits)))
        .or_else(|| search(text, &s));
    match attempt {
        Some(mut edits) => {
            edits.sort_by_key(|e| e.position);
            RepairOutcome {
                status: RepairStatus::Repaired,
                text: apply(text, &edits),
                edits,
                diagnostic: Some(diagnostic),
            }
        }
        None => RepairOutcome {
            status: RepairStatus::Unrecoverable,
            text: text.to_string(),
            edits: Vec::new(),
            diagnostic: Some(diagnostic),
        },
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairSummary {
    pub clean: usize,
    pub repaired: usize,
    pub unrecoverable: usize,
    pub unrecoverable_ids: Vec<String>,
}

pub fn repair_report<'a, I>(outcomes: I) -> RepairSummary
where
    I: IntoIterator<Item = (&'a str, &'a RepairOutcome)>,
{
    let mut summary = RepairSummary::default();
    for (id, outcome) in outcomes {
        match outcome.status {
            RepairStatus::Clean => summary.clean += 1,
            RepairStatus::Repaired => summary.repaired += 1,
            RepairStatus::Unrecoverable => {
                summary.unrecoverable += 1;
                summary.unrecoverable_ids.push(id.to_string());
            }
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    const WALK: &str = "(s / walk-01\n  :Arg0 (p / person\n    :refer-person 3rd\n    :refer-number Plural)\n  :Arg1 (c / street\n    :refer-number Singular)\n  :aspect Activity\n  :modstr FullAff)";

    #[test]
    fn clean_is_byte_identical() {
        let out = repair_parens(WALK);
        assert_eq!(out.status, RepairStatus::Clean);
        assert_eq!(out.text, WALK);
        assert!(out.edits.is_empty());
    }

    #[test]
    fn missing_final_closer() {
        let broken = &WALK[..WALK.len() - 1];
        let out = repair_parens(broken);
        assert_eq!(out.status, RepairStatus::Repaired);
        assert_eq!(out.text, WALK);
        assert_eq!(
            out.edits,
            vec![Edit {
                position: broken.len(),
                kind: EditKind::Insert
            }]
        );
        assert_eq!(repair_parens(&out.text).status, RepairStatus::Clean);
    }

    #[test]
    fn surplus_trailing_closers() {
        let out = repair_parens(&format!("{WALK}))\n"));
        assert_eq!(out.status, RepairStatus::Repaired);
        assert_eq!(out.text, format!("{WALK}\n"));
    }

    #[test]
    fn interior_missing_closer() {
        // `p` never closed, so `:Arg1` would attach to the person node.
        let broken = "(s / walk-01 :Arg0 (p / person :Arg1 (c / street)";
        let out = repair_parens(broken);
        assert_eq!(out.status, RepairStatus::Repaired);
        assert!(parse_penman(&out.text).is_ok());
    }

    #[test]
    fn stray_interior_closer() {
        let broken = "(s / walk-01 :Arg0 (p / person)) :Arg1 (c / street))";
        let out = repair_parens(broken);
        assert_eq!(out.status, RepairStatus::Repaired);
        assert_eq!(out.edits.len(), 1);
        assert_eq!(
            out.text,
            "(s / walk-01 :Arg0 (p / person) :Arg1 (c / street))"
        );
    }

    #[test]
    fn quoted_parens_are_ignored() {
        let text = "(e / emoticon :value \")\")";
        assert_eq!(repair_parens(text).status, RepairStatus::Clean);
        let out = repair_parens("(e / emoticon :value \")\"");
        assert_eq!(out.status, RepairStatus::Repaired);
        assert_eq!(out.text, text);
    }

    #[test]
    fn hopeless_input() {
        for text in ["", "not a graph", "(a / b :ARG0 (c / d (((("] {
            let out = repair_parens(text);
            assert_eq!(out.status, RepairStatus::Unrecoverable, "{text}");
            assert_eq!(out.text, text);
            assert!(out.diagnostic.is_some());
        }
    }

    #[test]
    fn report_counts() {
        let outcomes = [
            ("a", repair_parens(WALK)),
            ("b", repair_parens(&WALK[..WALK.len() - 1])),
            ("c", repair_parens("junk")),
        ];
        let summary = repair_report(outcomes.iter().map(|(id, o)| (*id, o)));
        assert_eq!(
            (summary.clean, summary.repaired, summary.unrecoverable),
            (1, 1, 1)
        );
        assert_eq!(summary.unrecoverable_ids, vec!["c".to_string()]);
    }
}
