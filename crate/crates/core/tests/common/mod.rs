//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use cfl_core::{ConstraintGraph, SensingGraph};
use rand::Rng;

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> ConstraintGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    ConstraintGraph::from_edges(n, edges).unwrap()
}

/// Each constraint edge sensed in one random direction, or both with
/// probability `both`.
pub fn covering_sensing<R: Rng>(rng: &mut R, g: &ConstraintGraph, both: f64) -> SensingGraph {
    let mut arcs = Vec::new();
    for (i, j) in g.edges() {
        if rng.random_bool(both) {
            arcs.push((i, j));
            arcs.push((j, i));
        } else if rng.random_bool(0.5) {
            arcs.push((i, j));
        } else {
            arcs.push((j, i));
        }
    }
    SensingGraph::from_edges(g.n_vertices(), arcs).unwrap()
}

/// Arbitrary directed graph on `n` vertices without self-loops.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, p: f64) -> SensingGraph {
    let mut arcs = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if i != j && rng.random_bool(p) {
                arcs.push((j, i));
            }
        }
    }
    SensingGraph::from_edges(n, arcs).unwrap()
}

/// Transitive closure by Floyd–Warshall: `reach[u][v]` iff a directed path
/// leads from `u` to `v` (every vertex reaches itself).
pub fn reachability(s: &SensingGraph) -> Vec<Vec<bool>> {
    let n = s.n_vertices();
    let mut r = vec![vec![false; n]; n];
    for (u, row) in r.iter_mut().enumerate() {
        row[u] = true;
    }
    for (from, to) in s.edges() {
        r[from][to] = true;
    }
    for k in 0..n {
        for u in 0..n {
            if r[u][k] {
                for v in 0..n {
                    if r[k][v] {
                        r[u][v] = true;
                    }
                }
            }
        }
    }
    r
}

/// Chromatic number by exhaustive search over restricted growth strings.
pub fn brute_chromatic(g: &ConstraintGraph) -> usize {
    fn go(g: &ConstraintGraph, v: usize, used: usize, colors: &mut [usize], best: &mut usize) {
        if v == colors.len() {
            *best = (*best).min(used);
            return;
        }
        for c in 0..=used {
            if c == used && used + 1 >= *best {
                break;
            }
            if g.neighbors(v).iter().any(|&u| u < v && colors[u] == c) {
                continue;
            }
            colors[v] = c;
            go(g, v + 1, used.max(c + 1), colors, best);
        }
    }
    let n = g.n_vertices();
    if n == 0 {
        return 0;
    }
    let mut best = n + 1;
    go(g, 0, 0, &mut vec![0; n], &mut best);
    best
}

pub fn proper(g: &ConstraintGraph, colors: &[usize]) -> bool {
    g.edges().all(|(i, j)| colors[i] != colors[j])
}
