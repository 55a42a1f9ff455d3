//! Decentralized graph coloring by communication-free learning, with
//! asymmetric (hidden-terminal) sensing.
//!
//! - [`graphs`]: constraint/sensing graphs and satisfaction predicates
//! - [`solver`]: the stochastic learning solver
//! - [`connectivity`]: SCCs, in-degrees, chromatic numbers, convergence conditions
//! - [`wireless`]: path loss, coverage radii, random interference graphs
//! - [`harness`]: batch experiments, summaries, CSV/JSON output
//! - [`bounds`]: worst-case convergence-time bounds

pub mod bounds;
pub mod connectivity;
pub mod format;
pub mod graphs;
pub mod harness;
pub mod rng;
pub mod solver;
pub mod wireless;

pub use connectivity::{Chromatic, ComponentReport, SccDecomposition};
pub use format::GraphFile;
pub use graphs::{Assignment, ConstraintGraph, Palette, SensingGraph};
pub use harness::{ExperimentConfig, PaletteRule, TrialRecord};
pub use solver::{RunOutcome, SolverParams, SolverState};
