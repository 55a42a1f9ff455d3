//! Exact chromatic number by DSATUR branch and bound.
//!
//! The search is seeded with a maximum clique (lower bound, pre-colored to
//! break symmetry) and a greedy DSATUR coloring (upper bound). When the node
//! budget runs out the best bounds found so far are returned instead of a
//! possibly wrong number.

use serde::Serialize;

use crate::graphs::ConstraintGraph;

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Chromatic {
    Exact { value: usize },
    Unknown { lower: usize, upper: usize },
}

impl Chromatic {
    pub fn exact(self) -> Option<usize> {
        match self {
            Chromatic::Exact { value } => Some(value),
            Chromatic::Unknown { .. } => None,
        }
    }

    pub fn lower(self) -> usize {
        match self {
            Chromatic::Exact { value } => value,
            Chromatic::Unknown { lower, .. } => lower,
        }
    }

    pub fn upper(self) -> usize {
        match self {
            Chromatic::Exact { value } => value,
            Chromatic::Unknown { upper, .. } => upper,
        }
    }
}

/// Chromatic number of the whole graph.
pub fn chromatic_of(g: &ConstraintGraph, budget: u64) -> Chromatic {
    let n = g.n_vertices();
    if n == 0 {
        return Chromatic::Exact { value: 0 };
    }
    if g.n_edges() == 0 {
        return Chromatic::Exact { value: 1 };
    }
    let mut nodes = 0u64;
    let clique = max_clique(g, budget / 2, &mut nodes);
    let (upper, _) = dsatur_greedy(g);
    if clique.len() == upper {
        return Chromatic::Exact { value: upper };
    }
    let mut search = Search::new(g, upper, clique.len(), budget.saturating_sub(nodes));
    for (c, &v) in clique.iter().enumerate() {
        search.assign(v, c);
    }
    search.used = clique.len();
    search.branch(n - clique.len());
    if search.exhausted {
        Chromatic::Unknown {
            lower: clique.len(),
            upper: search.best,
        }
    } else {
        Chromatic::Exact { value: search.best }
    }
}

/// Greedy DSATUR coloring. Returns the number of colors and the coloring.
pub fn dsatur_greedy(g: &ConstraintGraph) -> (usize, Vec<usize>) {
    let n = g.n_vertices();
    let mut color = vec![usize::MAX; n];
    let mut seen: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut sat = vec![0usize; n];
    let mut used = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| color[v] == usize::MAX)
            .max_by_key(|&v| (sat[v], g.degree(v), std::cmp::Reverse(v)))
            .expect("an uncolored vertex remains");
        let c = (0..)
            .find(|&c| !seen[v].get(c).copied().unwrap_or(false))
            .expect("some color is free");
        color[v] = c;
        used = used.max(c + 1);
        for &u in g.neighbors(v) {
            let s = &mut seen[u];
            if s.len() <= c {
                s.resize(c + 1, false);
            }
            if !s[c] {
                s[c] = true;
                sat[u] += 1;
            }
        }
    }
    (used, color)
}

/// Maximum clique by Bron-Kerbosch with pivoting. Returns the best clique
/// found within the budget.
pub fn max_clique(g: &ConstraintGraph, budget: u64, nodes: &mut u64) -> Vec<usize> {
    let mut best = Vec::new();
    let mut current = Vec::new();
    let candidates: Vec<usize> = (0..g.n_vertices()).collect();
    bron_kerbosch(
        g,
        &mut current,
        candidates,
        Vec::new(),
        &mut best,
        budget,
        nodes,
    );
    best.sort_unstable();
    best
}

fn bron_kerbosch(
    g: &ConstraintGraph,
    current: &mut Vec<usize>,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    best: &mut Vec<usize>,
    budget: u64,
    nodes: &mut u64,
) {
    *nodes += 1;
    if p.is_empty() {
        if x.is_empty() && current.len() > best.len() {
            best.clone_from(current);
        }
        return;
    }
    if current.len() + p.len() <= best.len() || *nodes >= budget {
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| g.has_edge(u, v)).count())
        .expect("p is nonempty");
    let branch: Vec<usize> = p
        .iter()
        .copied()
        .filter(|&v| !g.has_edge(pivot, v))
        .collect();
    for v in branch {
        let nbrs = g.neighbors(v);
        let p_next = p
            .iter()
            .copied()
            .filter(|u| nbrs.binary_search(u).is_ok())
            .collect();
        let x_next = x
            .iter()
            .copied()
            .filter(|u| nbrs.binary_search(u).is_ok())
            .collect();
        current.push(v);
        bron_kerbosch(g, current, p_next, x_next, best, budget, nodes);
        current.pop();
        p.retain(|&u| u != v);
        x.push(v);
    }
}

struct Search<'g> {
    g: &'g ConstraintGraph,
    color: Vec<usize>,
    /// `count[v][c]`: colored neighbors of `v` holding color `c`.
    count: Vec<Vec<u32>>,
    sat: Vec<usize>,
    used: usize,
    best: usize,
    lower: usize,
    budget: u64,
    nodes: u64,
    exhausted: bool,
}

impl<'g> Search<'g> {
    fn new(g: &'g ConstraintGraph, upper: usize, lower: usize, budget: u64) -> Self {
        let n = g.n_vertices();
        Self {
            g,
            color: vec![usize::MAX; n],
            count: vec![vec![0; upper]; n],
            sat: vec![0; n],
            used: 0,
            best: upper,
            lower,
            budget,
            nodes: 0,
            exhausted: false,
        }
    }

    fn assign(&mut self, v: usize, c: usize) {
        self.color[v] = c;
        for &u in self.g.neighbors(v) {
            let k = &mut self.count[u][c];
            if *k == 0 {
                self.sat[u] += 1;
            }
            *k += 1;
        }
    }

    fn unassign(&mut self, v: usize) {
        let c = self.color[v];
        self.color[v] = usize::MAX;
        for &u in self.g.neighbors(v) {
            let k = &mut self.count[u][c];
            *k -= 1;
            if *k == 0 {
                self.sat[u] -= 1;
            }
        }
    }

    /// Returns true once an optimal coloring is proven or the budget is gone.
    fn branch(&mut self, remaining: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return true;
        }
        if remaining == 0 {
            if self.used < self.best {
                self.best = self.used;
            }
            return self.best <= self.lower;
        }
        let n = self.g.n_vertices();
        let v = (0..n)
            .filter(|&v| self.color[v] == usize::MAX)
            .max_by_key(|&v| (self.sat[v], self.g.degree(v), std::cmp::Reverse(v)))
            .expect("remaining > 0");
        let limit = (self.used + 1).min(self.best - 1);
        for c in 0..limit {
            if self.count[v][c] != 0 {
                continue;
            }
            let opened = c == self.used;
            if opened {
                self.used += 1;
            }
            self.assign(v, c);
            let done = self.branch(remaining - 1);
            self.unassign(v);
            if opened {
                self.used -= 1;
            }
            if done {
                return true;
            }
        }
        false
    }
}
