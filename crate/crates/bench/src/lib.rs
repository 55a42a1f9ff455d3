//! Shared fixtures for the benchmarks.

use cfl_core::wireless::{self, DbmConfig};
use cfl_core::{ConstraintGraph, SensingGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A DBM instance at intensity `lambda` and detection threshold
/// `threshold_dbm`, reproducible from `seed`.
pub fn dbm_instance(lambda: f64, threshold_dbm: f64, seed: u64) -> (ConstraintGraph, SensingGraph) {
    let cfg = DbmConfig::new(lambda, threshold_dbm);
    let inst = wireless::generate_dbm(&cfg, &mut ChaCha8Rng::seed_from_u64(seed))
        .expect("default DBM configuration is valid");
    (inst.graph, inst.sensing)
}

/// Undirected ring of length `n` with one chord every `step` vertices.
pub fn chorded_ring(n: usize, step: usize) -> ConstraintGraph {
    let mut edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    edges.extend((0..n).step_by(step).map(|i| (i, (i + n / 2) % n)));
    edges.retain(|&(i, j)| i != j);
    ConstraintGraph::from_edges(n, edges).expect("ring indices are in range")
}
