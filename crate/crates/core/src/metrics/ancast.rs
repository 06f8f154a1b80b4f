//! Anchor-broadcast alignment.
//!
//! 1. Anchors: variables whose concept occurs exactly once in each graph
//!    are paired, as are the two tops when their concepts agree.
//! 2. Broadcast: repeatedly align the unaligned pair `(p, g)` with the most
//!    support, where support counts already-aligned neighbour pairs
//!    `(p', g')` joined to `p` and `g` by edges with the same role and
//!    direction. Ties prefer equal concepts, then the lexicographically
//!    smallest variable names.
//! 3. Leftover variables with equal concepts are paired in name order.
//!
//! The result is deterministic and needs no restarts.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap};

use super::problem::{Mapping, Problem};

type Neighbours = Vec<Vec<(usize, u32, bool)>>;

fn neighbours(edges: &[(usize, u32, usize)], n: usize) -> Neighbours {
    let mut out = vec![Vec::new(); n];
    for &(s, r, t) in edges {
        out[s].push((t, r, true));
        out[t].push((s, r, false));
    }
    out
}

pub(crate) fn align(problem: &Problem) -> Mapping {
    let left = &problem.left;
    let right = &problem.right;
    let (n, m) = (left.var_count(), right.var_count());
    let mut mapping: Mapping = vec![None; n];
    let mut owner: Vec<Option<usize>> = vec![None; m];

    let mut left_counts: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, &c) in left.concepts.iter().enumerate() {
        left_counts.entry(c).or_default().push(i);
    }
    let mut right_counts: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, &c) in right.concepts.iter().enumerate() {
        right_counts.entry(c).or_default().push(j);
    }
    for (c, ls) in &left_counts {
        if let (1, Some(rs)) = (ls.len(), right_counts.get(c)) {
            if rs.len() == 1 {
                mapping[ls[0]] = Some(rs[0]);
                owner[rs[0]] = Some(ls[0]);
            }
        }
    }
    if mapping[left.top].is_none()
        && owner[right.top].is_none()
        && left.concepts[left.top] == right.concepts[right.top]
    {
        mapping[left.top] = Some(right.top);
        owner[right.top] = Some(left.top);
    }

    let left_nb = neighbours(&left.edges, n);
    let right_nb = neighbours(&right.edges, m);
    loop {
        let mut support: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for p_anchor in 0..n {
            let Some(g_anchor) = mapping[p_anchor] else { continue };
            for &(p, role, out) in &left_nb[p_anchor] {
                if mapping[p].is_some() {
                    continue;
                }
                for &(g, g_role, g_out) in &right_nb[g_anchor] {
                    if owner[g].is_none() && g_role == role && g_out == out {
                        *support.entry((p, g)).or_default() += 1;
                    }
                }
            }
        }
        let best = support.into_iter().max_by_key(|&((p, g), s)| {
            (
                s,
                left.concepts[p] == right.concepts[g],
                Reverse((left.vars[p].as_str(), right.vars[g].as_str())),
            )
        });
        match best {
            Some(((p, g), _)) => {
                mapping[p] = Some(g);
                owner[g] = Some(p);
            }
            None => break,
        }
    }

    let mut left_order: Vec<usize> = (0..n).filter(|&i| mapping[i].is_none()).collect();
    left_order.sort_by(|&a, &b| left.vars[a].cmp(&left.vars[b]));
    let mut right_order: Vec<usize> = (0..m).collect();
    right_order.sort_by(|&a, &b| right.vars[a].cmp(&right.vars[b]));
    for i in left_order {
        if let Some(&j) = right_order
            .iter()
            .find(|&&j| owner[j].is_none() && right.concepts[j] == left.concepts[i])
        {
            mapping[i] = Some(j);
            owner[j] = Some(i);
        }
    }
    mapping
}
