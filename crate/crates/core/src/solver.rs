//! Communication-free learning solver.
//!
//! Each vertex keeps a probability vector over the palette. Every round all
//! vertices sample a color, then each vertex checks its information set on
//! the completed assignment: a satisfied vertex locks onto its color, an
//! unsatisfied one moves probability mass away from the color it just tried.
//! Rounds are synchronous.

use serde::Serialize;
use thiserror::Error;

use crate::graphs::{self, Assignment, ConstraintGraph, Palette, SensingGraph};
use crate::rng;

pub const DEFAULT_A: f64 = 1.0;
pub const DEFAULT_B: f64 = 0.1;
pub const DEFAULT_MAX_ROUNDS: u64 = 100_000;

/// Rows are renormalized every this many rounds.
const RENORMALIZE_EVERY: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("parameter `{name}` = {value} must lie in (0, 1]")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("state has {state} vertices but sensing graph has {sensing}")]
    DimensionMismatch { state: usize, sensing: usize },
    #[error("solver needs at least one vertex")]
    NoVertices,
    #[error("max_rounds must be at least 1")]
    NoRounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverParams {
    a: f64,
    b: f64,
    palette: Palette,
}

impl SolverParams {
    pub fn new(a: f64, b: f64, palette: Palette) -> Result<Self, SolverError> {
        for (name, value) in [("a", a), ("b", b)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(SolverError::InvalidParam { name, value });
            }
        }
        Ok(Self { a, b, palette })
    }

    /// `a = 1`, `b = 0.1`.
    pub fn with_palette(palette: Palette) -> Self {
        Self {
            a: DEFAULT_A,
            b: DEFAULT_B,
            palette,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn palette(&self) -> Palette {
        self.palette
    }

    pub fn n_colors(&self) -> usize {
        self.palette.n_colors()
    }

    /// Denominator `D - 1 + a/b` shared by both branches of the update.
    fn normalizer(&self) -> f64 {
        (self.n_colors() - 1) as f64 + self.a / self.b
    }

    /// Lower bound on any entry of a row right after an unsatisfied update.
    pub fn gamma(&self) -> f64 {
        self.a.min(self.b) / self.normalizer()
    }
}

pub fn gamma(params: &SolverParams) -> f64 {
    params.gamma()
}

/// Update applied by a vertex that saw no conflict: point mass on `chosen`.
pub fn satisfied_update(row: &mut [f64], chosen: usize) {
    row.fill(0.0);
    row[chosen] = 1.0;
}

/// Update applied by a vertex that saw a conflict after choosing `chosen`.
pub fn unsatisfied_update(row: &mut [f64], chosen: usize, params: &SolverParams) {
    let keep = 1.0 - params.b;
    let norm = params.normalizer();
    let to_chosen = params.a / norm;
    let to_other = params.b / norm;
    for (j, p) in row.iter_mut().enumerate() {
        let boost = if j == chosen { to_chosen } else { to_other };
        *p = keep * *p + boost;
    }
}

/// Inverse-CDF sample of a probability row.
fn sample_row(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = j;
            if u < acc {
                return j;
            }
        }
    }
    last_positive
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    n_colors: usize,
    probs: Vec<f64>,
    colors: Vec<usize>,
    satisfied: Vec<bool>,
    round: u64,
    seed: u64,
}

impl SolverState {
    /// Uniform rows. The first assignment is drawn by the first [`step`](Self::step).
    pub fn init(n: usize, params: &SolverParams, seed: u64) -> Result<Self, SolverError> {
        if n == 0 {
            return Err(SolverError::NoVertices);
        }
        let d = params.n_colors();
        Ok(Self {
            n_colors: d,
            probs: vec![1.0 / d as f64; n * d],
            colors: vec![0; n],
            satisfied: vec![false; n],
            round: 0,
            seed,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.n_colors..(i + 1) * self.n_colors]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.n_colors)
    }

    /// Assignment drawn in the latest round (all zeros before the first).
    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn assignment(&self) -> Assignment {
        Assignment::from_raw(self.colors.clone())
    }

    /// Per-vertex outcome of the latest round.
    pub fn satisfied(&self) -> &[bool] {
        &self.satisfied
    }

    /// One synchronous round. Returns the number of vertices that sensed a
    /// conflict.
    pub fn step(
        &mut self,
        sensing: &SensingGraph,
        params: &SolverParams,
    ) -> Result<usize, SolverError> {
        if sensing.n_vertices() != self.n_vertices() {
            return Err(SolverError::DimensionMismatch {
                state: self.n_vertices(),
                sensing: sensing.n_vertices(),
            });
        }
        let d = self.n_colors;
        for (i, row) in self.probs.chunks_exact(d).enumerate() {
            let u = rng::uniform(self.seed, i as u64, self.round);
            self.colors[i] = sample_row(row, u);
        }
        let mut unsatisfied = 0;
        for i in 0..self.n_vertices() {
            self.satisfied[i] = graphs::senses_no_conflict(sensing, &self.colors, i);
        }
        for (i, row) in self.probs.chunks_exact_mut(d).enumerate() {
            if self.satisfied[i] {
                satisfied_update(row, self.colors[i]);
            } else {
                unsatisfied_update(row, self.colors[i], params);
                unsatisfied += 1;
            }
        }
        self.round += 1;
        if self.round.is_multiple_of(RENORMALIZE_EVERY) {
            self.renormalize();
        }
        Ok(unsatisfied)
    }

    fn renormalize(&mut self) {
        for row in self.probs.chunks_exact_mut(self.n_colors) {
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
        }
    }

    /// True iff every row is a point mass, i.e. the next assignment is
    /// certain to repeat the current one.
    pub fn absorption_check(&self) -> bool {
        self.rows()
            .all(|row| row.iter().all(|&p| p == 0.0 || p == 1.0) && row.contains(&1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub converged: bool,
    pub rounds_used: u64,
    pub final_assignment: Assignment,
    /// Satisfaction of each vertex on every constraint edge, when a
    /// constraint graph was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_vertex_full_satisfaction: Option<Vec<bool>>,
}

impl RunOutcome {
    pub fn fraction_fully_satisfied(&self) -> Option<f64> {
        self.per_vertex_full_satisfaction.as_ref().map(|sat| {
            if sat.is_empty() {
                1.0
            } else {
                sat.iter().filter(|&&s| s).count() as f64 / sat.len() as f64
            }
        })
    }
}

/// Steps until no vertex senses a conflict or `max_rounds` is exhausted.
pub fn run(
    sensing: &SensingGraph,
    graph: Option<&ConstraintGraph>,
    params: &SolverParams,
    seed: u64,
    max_rounds: u64,
) -> Result<RunOutcome, SolverError> {
    if max_rounds == 0 {
        return Err(SolverError::NoRounds);
    }
    let mut state = SolverState::init(sensing.n_vertices(), params, seed)?;
    let mut converged = false;
    while state.round() < max_rounds {
        if state.step(sensing, params)? == 0 {
            converged = true;
            break;
        }
    }
    let per_vertex_full_satisfaction = graph.map(|g| {
        (0..g.n_vertices())
            .map(|i| graphs::fully_satisfied(g, state.colors(), i))
            .collect()
    });
    Ok(RunOutcome {
        converged,
        rounds_used: state.round(),
        final_assignment: state.assignment(),
        per_vertex_full_satisfaction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b): (f64, f64) = ($a, $b);
            assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
        }};
    }

    fn params(a: f64, b: f64, d: usize) -> SolverParams {
        SolverParams::new(a, b, Palette::new(d).unwrap()).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_close!(params(1.0, 0.1, 3).gamma(), 0.1 / 12.0, 1e-15);
        assert_close!(params(1.0, 0.1, 11).gamma(), 0.005, 1e-15);
        for d in 1..8 {
            assert_close!(params(0.3, 0.3, d).gamma(), 0.3 / d as f64, 1e-15);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = Palette::new(3).unwrap();
        assert!(SolverParams::new(0.0, 0.1, p).is_err());
        assert!(SolverParams::new(1.0, 1.5, p).is_err());
        assert!(SolverParams::new(f64::NAN, 0.5, p).is_err());
        assert!(SolverParams::new(1.0, 1.0, p).is_ok());
    }

    #[test]
    fn init_is_uniform() {
        let s = SolverState::init(2, &params(1.0, 0.1, 4), 0).unwrap();
        assert!(s.rows().flatten().all(|&p| p == 0.25));
        assert_eq!(s.round(), 0);
        let one = SolverState::init(1, &params(1.0, 0.1, 1), 0).unwrap();
        assert_eq!(one.row(0), &[1.0]);
        assert!(SolverState::init(0, &params(1.0, 0.1, 2), 0).is_err());
    }

    #[test]
    fn unsatisfied_update_example() {
        let mut row = [1.0 / 3.0; 3];
        unsatisfied_update(&mut row, 0, &params(1.0, 0.1, 3));
        // 0.9/3 + 1/12 and 0.9/3 + 0.1/12
        assert_close!(row[0], 0.383_333_333_333_333_3, 1e-12);
        assert_close!(row[1], 0.308_333_333_333_333_3, 1e-12);
        assert_close!(row[2], 0.308_333_333_333_333_3, 1e-12);
        assert_close!(row.iter().sum::<f64>(), 1.0, 1e-15);
    }

    #[test]
    fn satisfied_update_is_point_mass() {
        let mut row = [0.2, 0.5, 0.3];
        satisfied_update(&mut row, 2);
        assert_eq!(row, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn sampling_follows_cdf() {
        let row = [0.25, 0.0, 0.75];
        assert_eq!(sample_row(&row, 0.0), 0);
        assert_eq!(sample_row(&row, 0.2499), 0);
        assert_eq!(sample_row(&row, 0.25), 2);
        assert_eq!(sample_row(&row, 0.999_999_999), 2);
        assert_eq!(sample_row(&[0.0, 1.0, 0.0], 0.0), 1);
    }

    #[test]
    fn unsensed_vertex_freezes_after_first_round() {
        // 1 senses 0; 0 senses nothing.
        let s = SensingGraph::from_edges(2, [(0, 1)]).unwrap();
        let p = params(1.0, 0.1, 3);
        let mut state = SolverState::init(2, &p, 42).unwrap();
        state.step(&s, &p).unwrap();
        let first = state.colors()[0];
        assert!(state.satisfied()[0]);
        for _ in 0..50 {
            state.step(&s, &p).unwrap();
            assert_eq!(state.colors()[0], first);
        }
    }

    #[test]
    fn step_rejects_dimension_mismatch() {
        let p = params(1.0, 0.1, 2);
        let mut state = SolverState::init(3, &p, 0).unwrap();
        assert_eq!(
            state.step(&SensingGraph::empty(2), &p),
            Err(SolverError::DimensionMismatch {
                state: 3,
                sensing: 2
            })
        );
    }

    #[test]
    fn single_vertex_converges_in_one_round() {
        let out = run(&SensingGraph::empty(1), None, &params(1.0, 0.1, 1), 3, 10).unwrap();
        assert!(out.converged);
        assert_eq!(out.rounds_used, 1);
    }

    #[test]
    fn infeasible_triangle_never_converges() {
        let g = ConstraintGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let s = SensingGraph::full(&g);
        for seed in 0..5 {
            let out = run(&s, Some(&g), &params(1.0, 0.1, 2), seed, 1000).unwrap();
            assert!(!out.converged);
            assert_eq!(out.rounds_used, 1000);
        }
    }

    #[test]
    fn absorption_check_cases() {
        let p = params(1.0, 0.1, 3);
        let g = ConstraintGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let s = SensingGraph::full(&g);
        let fresh = SolverState::init(3, &p, 9).unwrap();
        assert!(!fresh.absorption_check());

        let mut state = fresh.clone();
        while state.step(&s, &p).unwrap() != 0 {
            // Any unsatisfied vertex leaves a non-degenerate row behind.
            assert!(!state.absorption_check());
        }
        assert!(state.absorption_check());
    }

    #[test]
    fn run_is_deterministic() {
        let g = ConstraintGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let s = SensingGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (2, 0)]).unwrap();
        let p = params(1.0, 0.1, 3);
        let a = run(&s, Some(&g), &p, 77, 10_000).unwrap();
        let b = run(&s, Some(&g), &p, 77, 10_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn renormalization_keeps_rows_stochastic() {
        // Infeasible, so every vertex stays unsatisfied for many rounds.
        let g = ConstraintGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let s = SensingGraph::full(&g);
        let p = params(0.7, 0.3, 2);
        let mut state = SolverState::init(3, &p, 5).unwrap();
        for _ in 0..3 * RENORMALIZE_EVERY {
            state.step(&s, &p).unwrap();
            for row in state.rows() {
                assert_close!(row.iter().sum::<f64>(), 1.0, 1e-9);
            }
        }
    }
}
