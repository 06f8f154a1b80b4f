//! Alignment search over a [`Problem`]: restarted hill climbing and an
//! exhaustive branch-and-bound.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use super::problem::{Mapping, Problem};

/// Best mapping found by `restarts` hill-climbing runs. The first run
/// starts from a greedy concept-match assignment, later runs from a
/// randomized one.
pub(crate) fn hill_climb(problem: &Problem, restarts: usize, seed: u64) -> (Mapping, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Mapping, u32)> = None;
    for restart in 0..restarts.max(1) {
        let start = if restart == 0 {
            greedy_start(problem, &mut rng)
        } else {
            random_start(problem, &mut rng)
        };
        let (mapping, score) = climb(problem, start);
        if best.as_ref().is_none_or(|b| score > b.1) {
            best = Some((mapping, score));
        }
        if best.as_ref().unwrap().1 as usize == perfect(problem) {
            break;
        }
    }
    best.unwrap()
}

fn perfect(problem: &Problem) -> usize {
    problem
        .left
        .triple_count()
        .min(problem.right.triple_count())
}

fn greedy_start(problem: &Problem, rng: &mut ChaCha8Rng) -> Mapping {
    let mut used = vec![false; problem.right_len()];
    let mut mapping = vec![None; problem.left_len()];
    for (i, slot) in mapping.iter_mut().enumerate() {
        let best = (0..problem.right_len())
            .filter(|&j| !used[j] && problem.unary[i][j] > 0)
            .map(|j| problem.unary[i][j])
            .max();
        if let Some(best) = best {
            let ties: Vec<usize> = (0..problem.right_len())
                .filter(|&j| !used[j] && problem.unary[i][j] == best)
                .collect();
            let j = *ties.choose(rng).unwrap();
            used[j] = true;
            *slot = Some(j);
        }
    }
    mapping
}

fn random_start(problem: &Problem, rng: &mut ChaCha8Rng) -> Mapping {
    let mut used = vec![false; problem.right_len()];
    let mut mapping = vec![None; problem.left_len()];
    let mut order: Vec<usize> = (0..problem.left_len()).collect();
    order.shuffle(rng);
    for i in order {
        let candidates: Vec<usize> = (0..problem.right_len())
            .filter(|&j| !used[j] && problem.unary[i][j] > 0)
            .collect();
        let pool: Vec<usize> = if candidates.is_empty() || rng.gen_bool(0.2) {
            (0..problem.right_len()).filter(|&j| !used[j]).collect()
        } else {
            candidates
        };
        if let Some(&j) = pool.choose(rng) {
            used[j] = true;
            mapping[i] = Some(j);
        }
    }
    mapping
}

#[derive(Clone, Copy)]
enum Move {
    Assign(usize, Option<usize>),
    Swap(usize, usize),
}

/// Steepest-ascent climb over reassignments and swaps.
fn climb(problem: &Problem, mut mapping: Mapping) -> (Mapping, u32) {
    let n = problem.left_len();
    let m = problem.right_len();
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for (i, j) in mapping.iter().enumerate() {
        if let Some(j) = *j {
            owner[j] = Some(i);
        }
    }
    let mut score = problem.score(&mapping);
    loop {
        let mut best: Option<(i64, Move)> = None;
        let mut consider = |delta: i64, mv: Move| {
            if delta > 0 && best.is_none_or(|b| delta > b.0) {
                best = Some((delta, mv));
            }
        };
        for i in 0..n {
            let before = problem.local_score(&mapping, &[i]) as i64;
            let current = mapping[i];
            let targets = (0..m).filter(|&j| owner[j].is_none()).map(Some);
            for target in targets.chain(std::iter::once(None)) {
                if target == current {
                    continue;
                }
                mapping[i] = target;
                let after = problem.local_score(&mapping, &[i]) as i64;
                consider(after - before, Move::Assign(i, target));
            }
            mapping[i] = current;
        }
        for i in 0..n {
            for k in i + 1..n {
                if mapping[i].is_none() && mapping[k].is_none() {
                    continue;
                }
                let before = problem.local_score(&mapping, &[i, k]) as i64;
                mapping.swap(i, k);
                let after = problem.local_score(&mapping, &[i, k]) as i64;
                mapping.swap(i, k);
                consider(after - before, Move::Swap(i, k));
            }
        }
        let Some((delta, mv)) = best else { break };
        match mv {
            Move::Assign(i, target) => {
                if let Some(old) = mapping[i] {
                    owner[old] = None;
                }
                if let Some(j) = target {
                    owner[j] = Some(i);
                }
                mapping[i] = target;
            }
            Move::Swap(i, k) => {
                mapping.swap(i, k);
                if let Some(j) = mapping[i] {
                    owner[j] = Some(i);
                }
                if let Some(j) = mapping[k] {
                    owner[j] = Some(k);
                }
            }
        }
        score = (score as i64 + delta) as u32;
    }
    debug_assert_eq!(score, problem.score(&mapping));
    (mapping, score)
}

/// Globally optimal mapping by depth-first enumeration of injective
/// partial mappings, pruned by an admissible bound.
pub(crate) fn exact(problem: &Problem) -> (Mapping, u32) {
    let n = problem.left_len();
    // Most constrained (highest potential) variables first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| {
        let degree: u32 = problem.incident[i]
            .iter()
            .map(|&g| problem.groups[g].size())
            .sum();
        std::cmp::Reverse((problem.best_unary(i) + degree, std::cmp::Reverse(i)))
    });
    let mut position = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        position[i] = p;
    }
    // Each group is settled once its later endpoint is assigned.
    let mut settles: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, group) in problem.groups.iter().enumerate() {
        let last = if position[group.a] >= position[group.b] {
            group.a
        } else {
            group.b
        };
        settles[position[last]].push(g);
    }
    let mut suffix = vec![0u32; n + 1];
    for p in (0..n).rev() {
        let i = order[p];
        let groups: u32 = settles[p].iter().map(|&g| problem.groups[g].size()).sum();
        suffix[p] = suffix[p + 1] + problem.best_unary(i) + groups;
    }
    // Candidate order per variable: strongest unary match first, then
    // leaving the variable unmapped.
    let candidates: Vec<Vec<Option<usize>>> = (0..n)
        .map(|i| {
            let mut c: Vec<usize> = (0..problem.right_len()).collect();
            c.sort_by_key(|&j| (std::cmp::Reverse(problem.unary[i][j]), j));
            c.into_iter().map(Some).chain(std::iter::once(None)).collect()
        })
        .collect();

    let mut search = Search {
        problem,
        order: &order,
        settles: &settles,
        suffix: &suffix,
        candidates: &candidates,
        mapping: vec![None; n],
        used: vec![false; problem.right_len()],
        best_mapping: vec![None; n],
        best: 0,
    };
    search.descend(0, 0);
    (search.best_mapping, search.best)
}

struct Search<'a> {
    problem: &'a Problem,
    order: &'a [usize],
    settles: &'a [Vec<usize>],
    suffix: &'a [u32],
    candidates: &'a [Vec<Option<usize>>],
    mapping: Mapping,
    used: Vec<bool>,
    best_mapping: Mapping,
    best: u32,
}

impl Search<'_> {
    fn descend(&mut self, p: usize, current: u32) {
        if p == self.order.len() {
            if current > self.best {
                self.best = current;
                self.best_mapping = self.mapping.clone();
            }
            return;
        }
        if current + self.suffix[p] <= self.best {
            return;
        }
        let i = self.order[p];
        for &candidate in &self.candidates[i] {
            if let Some(j) = candidate {
                if self.used[j] {
                    continue;
                }
                self.used[j] = true;
            }
            self.mapping[i] = candidate;
            let mut gain = candidate.map_or(0, |j| self.problem.unary[i][j]);
            for &g in &self.settles[p] {
                let group = &self.problem.groups[g];
                if let (Some(ja), Some(jb)) = (self.mapping[group.a], self.mapping[group.b]) {
                    gain += self.problem.binary(g, ja, jb);
                }
            }
            self.descend(p + 1, current + gain);
            self.mapping[i] = None;
            if let Some(j) = candidate {
                self.used[j] = false;
            }
        }
    }
}
