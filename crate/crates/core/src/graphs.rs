//! Constraint and sensing graphs, color assignments, and the satisfaction
//! predicates evaluated on them.
//!
//! Vertices are dense indices `0..n`. Colors are 0-based.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("vertex {vertex} has color {color} outside palette of {colors}")]
    ColorOutOfRange {
        vertex: usize,
        color: usize,
        colors: usize,
    },
    #[error("palette must contain at least one color")]
    EmptyPalette,
    #[error("sensing edge ({from} -> {to}) is not a constraint edge")]
    NotSubset { from: usize, to: usize },
    #[error("sensing does not cover {} constraint edge(s), first {:?}", .0.len(), .0.first())]
    ConditionAViolated(Vec<(usize, usize)>),
    #[error("restricted and full satisfaction disagree")]
    SatisfactionMismatch,
}

/// Number of available colors. Always at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Palette(usize);

impl Palette {
    pub fn new(n_colors: usize) -> Result<Self, GraphError> {
        if n_colors == 0 {
            return Err(GraphError::EmptyPalette);
        }
        Ok(Self(n_colors))
    }

    pub fn n_colors(self) -> usize {
        self.0
    }
}

/// Undirected constraint graph stored as sorted, symmetric adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintGraph {
    adj: Vec<Vec<usize>>,
}

impl ConstraintGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds the graph from undirected edges. Each pair is inserted in both
    /// directions; duplicates are ignored.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (i, j) in edges {
            check_vertex(i, n)?;
            check_vertex(j, n)?;
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adj })
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.adj.len() && self.adj[i].binary_search(&j).is_ok()
    }

    /// Undirected edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Subgraph generated by `subset`. Vertex `k` of the result is `subset[k]`.
    pub fn induced(&self, subset: &[usize]) -> Result<ConstraintGraph, GraphError> {
        let n = self.n_vertices();
        let mut local = vec![usize::MAX; n];
        for (k, &v) in subset.iter().enumerate() {
            check_vertex(v, n)?;
            local[v] = k;
        }
        let adj = subset
            .iter()
            .map(|&v| {
                let mut ns: Vec<usize> = self.adj[v]
                    .iter()
                    .filter_map(|&u| (local[u] != usize::MAX).then_some(local[u]))
                    .collect();
                ns.sort_unstable();
                ns.dedup();
                ns
            })
            .collect();
        Ok(Self { adj })
    }
}

/// Oriented sensing graph. An edge `(j, i)` lies in the information set
/// `C_i`: vertex `i` observes the clause it shares with `j`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SensingGraph {
    sources: Vec<Vec<usize>>,
    targets: Vec<Vec<usize>>,
}

impl SensingGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            sources: vec![Vec::new(); n],
            targets: vec![Vec::new(); n],
        }
    }

    /// Builds from directed edges `(j, i)`, meaning `i` senses `j`.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut sources = vec![Vec::new(); n];
        let mut targets = vec![Vec::new(); n];
        for (j, i) in edges {
            check_vertex(j, n)?;
            check_vertex(i, n)?;
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            sources[i].push(j);
            targets[j].push(i);
        }
        for list in sources.iter_mut().chain(targets.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { sources, targets })
    }

    /// Perfect sensing: every constraint edge is observed in both directions.
    pub fn full(g: &ConstraintGraph) -> Self {
        Self {
            sources: g.adj.clone(),
            targets: g.adj.clone(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.sources.len()
    }

    pub fn n_edges(&self) -> usize {
        self.sources.iter().map(Vec::len).sum()
    }

    /// Sources `j` of the edges `(j, i)` in `C_i`.
    pub fn sources(&self, i: usize) -> &[usize] {
        &self.sources[i]
    }

    /// Vertices that sense `j`.
    pub fn targets(&self, j: usize) -> &[usize] {
        &self.targets[j]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        to < self.sources.len() && self.sources[to].binary_search(&from).is_ok()
    }

    /// All directed edges `(from, to)` ordered by source.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.targets
            .iter()
            .enumerate()
            .flat_map(|(j, ts)| ts.iter().map(move |&i| (j, i)))
    }

    /// Checks `C_i ⊆ M_i` for every vertex.
    pub fn validate_subset(&self, g: &ConstraintGraph) -> Result<(), GraphError> {
        expect_len(g.n_vertices(), self.n_vertices())?;
        match self.edges().find(|&(j, i)| !g.has_edge(j, i)) {
            Some((from, to)) => Err(GraphError::NotSubset { from, to }),
            None => Ok(()),
        }
    }

    /// Constraint graph whose edges are the symmetric closure of this one.
    pub fn symmetric_closure(&self) -> ConstraintGraph {
        ConstraintGraph::from_edges(self.n_vertices(), self.edges())
            .expect("sensing edges are validated on construction")
    }

    /// Same edges with every orientation reversed.
    pub fn transpose(&self) -> Self {
        Self {
            sources: self.targets.clone(),
            targets: self.sources.clone(),
        }
    }
}

/// A color for every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(colors: Vec<usize>, palette: Palette) -> Result<Self, GraphError> {
        if let Some((vertex, &color)) = colors
            .iter()
            .enumerate()
            .find(|(_, &c)| c >= palette.n_colors())
        {
            return Err(GraphError::ColorOutOfRange {
                vertex,
                color,
                colors: palette.n_colors(),
            });
        }
        Ok(Self(colors))
    }

    pub(crate) fn from_raw(colors: Vec<usize>) -> Self {
        Self(colors)
    }

    pub fn colors(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_vertex(v: usize, n: usize) -> Result<(), GraphError> {
    if v < n {
        Ok(())
    } else {
        Err(GraphError::VertexOutOfRange { vertex: v, n })
    }
}

fn expect_len(expected: usize, found: usize) -> Result<(), GraphError> {
    if expected == found {
        Ok(())
    } else {
        Err(GraphError::LengthMismatch { expected, found })
    }
}

/// Difference clause on an edge: true iff its endpoints have distinct colors.
pub fn clause(x: &Assignment, (i, j): (usize, usize)) -> Result<bool, GraphError> {
    check_vertex(i, x.len())?;
    check_vertex(j, x.len())?;
    Ok(x.0[i] != x.0[j])
}

pub fn is_proper_coloring(g: &ConstraintGraph, x: &Assignment) -> Result<bool, GraphError> {
    expect_len(g.n_vertices(), x.len())?;
    Ok(g.edges().all(|(i, j)| x.0[i] != x.0[j]))
}

/// Whether every clause observed by `i` is satisfied. An empty information
/// set counts as satisfied.
pub(crate) fn senses_no_conflict(s: &SensingGraph, colors: &[usize], i: usize) -> bool {
    let c = colors[i];
    s.sources(i).iter().all(|&j| colors[j] != c)
}

/// Whether `i` is satisfied on every constraint edge it participates in.
pub(crate) fn fully_satisfied(g: &ConstraintGraph, colors: &[usize], i: usize) -> bool {
    let c = colors[i];
    g.neighbors(i).iter().all(|&j| colors[j] != c)
}

/// Vertices that observe at least one conflict through their information
/// set, in increasing order.
pub fn unsatisfied_set(s: &SensingGraph, x: &Assignment) -> Result<Vec<usize>, GraphError> {
    expect_len(s.n_vertices(), x.len())?;
    Ok((0..s.n_vertices())
        .filter(|&i| !senses_no_conflict(s, &x.0, i))
        .collect())
}

/// Result of checking that each constraint edge is sensed in at least one
/// direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionA {
    pub holds: bool,
    /// Uncovered undirected edges as `(i, j)` with `i < j`.
    pub uncovered: Vec<(usize, usize)>,
}

pub fn check_condition_a(g: &ConstraintGraph, s: &SensingGraph) -> Result<ConditionA, GraphError> {
    s.validate_subset(g)?;
    let uncovered: Vec<_> = g
        .edges()
        .filter(|&(i, j)| !s.has_edge(i, j) && !s.has_edge(j, i))
        .collect();
    Ok(ConditionA {
        holds: uncovered.is_empty(),
        uncovered,
    })
}

/// Evaluates satisfaction under sensing restrictions and cross-checks it
/// against full satisfaction. Requires every constraint edge to be sensed.
pub fn restricted_equals_full(
    g: &ConstraintGraph,
    s: &SensingGraph,
    x: &Assignment,
) -> Result<bool, GraphError> {
    let cond = check_condition_a(g, s)?;
    if !cond.holds {
        return Err(GraphError::ConditionAViolated(cond.uncovered));
    }
    let restricted = unsatisfied_set(s, x)?.is_empty();
    if restricted != is_proper_coloring(g, x)? {
        return Err(GraphError::SatisfactionMismatch);
    }
    Ok(restricted)
}
