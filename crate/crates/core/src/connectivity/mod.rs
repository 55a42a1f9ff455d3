//! Structure of the induced sensing graph: strongly connected components,
//! their in-degrees, chromatic numbers, and the component-wise sufficient
//! condition for convergence.

mod chromatic;

pub use chromatic::{chromatic_of, dsatur_greedy, max_clique, Chromatic, DEFAULT_NODE_BUDGET};

use serde::Serialize;
use thiserror::Error;

use crate::graphs::{self, ConditionA, ConstraintGraph, GraphError, Palette, SensingGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConnectivityError {
    #[error("component {id} does not exist ({count} components)")]
    InvalidComponent { id: usize, count: usize },
    #[error("vertex subset is empty")]
    EmptySubset,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Maximal strongly connected components, numbered in topological order of
/// the condensation (components with no incoming edges first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SccDecomposition {
    pub component_of: Vec<usize>,
    /// Vertex sets, each sorted ascending.
    pub components: Vec<Vec<usize>>,
    /// Sorted, deduplicated edges between distinct components.
    pub condensation_edges: Vec<(usize, usize)>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Tarjan's algorithm with an explicit call stack.
pub fn scc_decompose(s: &SensingGraph) -> SccDecomposition {
    const UNVISITED: usize = usize::MAX;
    let n = s.n_vertices();
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut raw_components: Vec<Vec<usize>> = Vec::new();
    let mut next_index = 0;
    // (vertex, position in its successor list)
    let mut calls: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        calls.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            let succ = s.targets(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("v is on the stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                raw_components.push(comp);
            }
        }
    }

    // Tarjan emits sinks first.
    raw_components.reverse();
    let mut component_of = vec![0; n];
    for (k, comp) in raw_components.iter().enumerate() {
        for &v in comp {
            component_of[v] = k;
        }
    }
    let mut condensation_edges: Vec<(usize, usize)> = s
        .edges()
        .map(|(j, i)| (component_of[j], component_of[i]))
        .filter(|(a, b)| a != b)
        .collect();
    condensation_edges.sort_unstable();
    condensation_edges.dedup();
    SccDecomposition {
        component_of,
        components: raw_components,
        condensation_edges,
    }
}

pub fn is_strongly_connected(s: &SensingGraph) -> bool {
    scc_decompose(s).len() == 1
}

/// Number of distinct vertices outside component `k` with at least one
/// sensing edge into it.
pub fn component_in_degree(
    s: &SensingGraph,
    dec: &SccDecomposition,
    k: usize,
) -> Result<usize, ConnectivityError> {
    let comp = dec
        .components
        .get(k)
        .ok_or(ConnectivityError::InvalidComponent {
            id: k,
            count: dec.len(),
        })?;
    let mut sources: Vec<usize> = comp
        .iter()
        .flat_map(|&i| s.sources(i).iter().copied())
        .filter(|&j| dec.component_of[j] != k)
        .collect();
    sources.sort_unstable();
    sources.dedup();
    Ok(sources.len())
}

/// Chromatic number of the subgraph of `g` generated by `subset`.
pub fn chromatic_number(
    g: &ConstraintGraph,
    subset: &[usize],
) -> Result<Chromatic, ConnectivityError> {
    chromatic_number_with_budget(g, subset, DEFAULT_NODE_BUDGET)
}

pub fn chromatic_number_with_budget(
    g: &ConstraintGraph,
    subset: &[usize],
    budget: u64,
) -> Result<Chromatic, ConnectivityError> {
    if subset.is_empty() {
        return Err(ConnectivityError::EmptySubset);
    }
    let sub = g.induced(subset)?;
    Ok(chromatic_of(&sub, budget))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub id: usize,
    pub size: usize,
    pub in_degree: usize,
    pub chromatic: Chromatic,
    /// `None` when the chromatic bounds straddle `D - in_degree`.
    pub eligible: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem2Report {
    pub components: Vec<ComponentReport>,
    pub overall: Verdict,
}

fn eligibility(chromatic: Chromatic, slack: isize) -> Option<bool> {
    if chromatic.upper() as isize <= slack {
        Some(true)
    } else if chromatic.lower() as isize > slack {
        Some(false)
    } else {
        None
    }
}

/// Checks `chi(V_k) <= D - deg(V_k)` for every maximal strongly connected
/// component of the sensing graph.
pub fn check_theorem2(
    g: &ConstraintGraph,
    s: &SensingGraph,
    palette: Palette,
) -> Result<Theorem2Report, ConnectivityError> {
    check_theorem2_with_budget(g, s, palette, DEFAULT_NODE_BUDGET)
}

pub fn check_theorem2_with_budget(
    g: &ConstraintGraph,
    s: &SensingGraph,
    palette: Palette,
    budget: u64,
) -> Result<Theorem2Report, ConnectivityError> {
    s.validate_subset(g)?;
    let dec = scc_decompose(s);
    component_reports(g, s, &dec, palette, budget)
}

fn component_reports(
    g: &ConstraintGraph,
    s: &SensingGraph,
    dec: &SccDecomposition,
    palette: Palette,
    budget: u64,
) -> Result<Theorem2Report, ConnectivityError> {
    let mut components = Vec::with_capacity(dec.len());
    for (id, comp) in dec.components.iter().enumerate() {
        let in_degree = component_in_degree(s, dec, id)?;
        let chromatic = chromatic_number_with_budget(g, comp, budget)?;
        let slack = palette.n_colors() as isize - in_degree as isize;
        components.push(ComponentReport {
            id,
            size: comp.len(),
            in_degree,
            chromatic,
            eligible: eligibility(chromatic, slack),
        });
    }
    let overall = if components.iter().any(|c| c.eligible == Some(false)) {
        Verdict::Fails
    } else if components.iter().all(|c| c.eligible == Some(true)) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(Theorem2Report {
        components,
        overall,
    })
}

/// Per-vertex eligibility: the vertex's component satisfies the in-degree
/// condition and every constraint edge touching that component is sensed in
/// at least one direction. Unknown components count as ineligible.
pub fn node_eligibility(
    g: &ConstraintGraph,
    s: &SensingGraph,
    palette: Palette,
) -> Result<Vec<bool>, ConnectivityError> {
    let dec = scc_decompose(s);
    s.validate_subset(g)?;
    let report = component_reports(g, s, &dec, palette, DEFAULT_NODE_BUDGET)?;
    Ok(eligibility_from_report(g, s, &dec, &report))
}

fn eligibility_from_report(
    g: &ConstraintGraph,
    s: &SensingGraph,
    dec: &SccDecomposition,
    report: &Theorem2Report,
) -> Vec<bool> {
    let mut covered = vec![true; dec.len()];
    for (i, j) in g.edges() {
        if !s.has_edge(i, j) && !s.has_edge(j, i) {
            covered[dec.component_of[i]] = false;
            covered[dec.component_of[j]] = false;
        }
    }
    (0..g.n_vertices())
        .map(|v| {
            let k = dec.component_of[v];
            covered[k] && report.components[k].eligible == Some(true)
        })
        .collect()
}

/// Everything the `analyze` command reports about an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub n_vertices: usize,
    pub n_colors: usize,
    pub condition_a: ConditionA,
    pub strongly_connected: bool,
    pub chromatic: Chromatic,
    pub components: Vec<ComponentReport>,
    pub theorem2: Verdict,
    pub node_eligibility: Vec<bool>,
    pub node_eligibility_fraction: f64,
}

pub fn analyze(
    g: &ConstraintGraph,
    s: &SensingGraph,
    palette: Palette,
) -> Result<Analysis, ConnectivityError> {
    analyze_with_budget(g, s, palette, DEFAULT_NODE_BUDGET)
}

pub fn analyze_with_budget(
    g: &ConstraintGraph,
    s: &SensingGraph,
    palette: Palette,
    budget: u64,
) -> Result<Analysis, ConnectivityError> {
    let condition_a = graphs::check_condition_a(g, s)?;
    let dec = scc_decompose(s);
    let report = component_reports(g, s, &dec, palette, budget)?;
    let chromatic = chromatic_of(g, budget);
    for c in &report.components {
        if let (Some(sub), Some(full)) = (c.chromatic.exact(), chromatic.exact()) {
            assert!(
                sub <= full,
                "component chromatic {sub} exceeds graph chromatic {full}"
            );
        }
    }
    let node_eligibility = eligibility_from_report(g, s, &dec, &report);
    let n = g.n_vertices();
    let node_eligibility_fraction = if n == 0 {
        1.0
    } else {
        node_eligibility.iter().filter(|&&e| e).count() as f64 / n as f64
    };
    Ok(Analysis {
        n_vertices: n,
        n_colors: palette.n_colors(),
        condition_a,
        strongly_connected: dec.len() == 1,
        chromatic,
        components: report.components,
        theorem2: report.overall,
        node_eligibility,
        node_eligibility_fraction,
    })
}
