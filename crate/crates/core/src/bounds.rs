//! Worst-case convergence-time bounds, evaluated in the log domain.
//!
//! With sensing restrictions the bound is `N^3 exp(N^4 ln(1/gamma)) ln(1/eps)`;
//! with perfect sensing it is `N exp(N(N+1)/2 ln(1/gamma)) ln(1/eps)`. Both
//! overflow `f64` for modest `N`, so the natural log is the primary output.

use serde::Serialize;
use thiserror::Error;

use crate::solver::SolverParams;

pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("N must be at least 1")]
    ZeroVertices,
    #[error("gamma = {0} must lie in (0, 1)")]
    Gamma(f64),
    #[error("epsilon = {0} must lie in (0, 1)")]
    Epsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    n: u64,
    gamma: f64,
    epsilon: f64,
}

impl BoundInputs {
    pub fn new(n: u64, gamma: f64, epsilon: f64) -> Result<Self, BoundError> {
        if n == 0 {
            return Err(BoundError::ZeroVertices);
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(BoundError::Gamma(gamma));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(BoundError::Epsilon(epsilon));
        }
        Ok(Self { n, gamma, epsilon })
    }

    pub fn from_params(n: u64, params: &SolverParams, epsilon: f64) -> Result<Self, BoundError> {
        Self::new(n, params.gamma(), epsilon)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    /// Natural log of the bound.
    pub ln: f64,
    /// The bound itself, or `None` when it overflows `f64`.
    pub linear: Option<f64>,
}

impl Bound {
    fn from_ln(ln: f64) -> Self {
        let v = ln.exp();
        Self {
            ln,
            linear: v.is_finite().then_some(v),
        }
    }
}

/// Error-free transformation `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free transformation `a * b = p + e`.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `n_pow * ln(n) + exponent * ln(1/gamma) + ln(ln(1/eps))`, accumulated
/// with compensated arithmetic so the result is within an ulp or so of the
/// exactly rounded value.
fn log_bound(n_pow: f64, n: u64, exponent: f64, gamma: f64, epsilon: f64) -> f64 {
    let ln_n = (n as f64).ln();
    let (t1, e1) = two_prod(n_pow, ln_n);
    let (t2, e2) = two_prod(exponent, -gamma.ln());
    let t3 = (-epsilon.ln()).ln();
    let (s, e3) = two_sum(t1, t2);
    let (s, e4) = two_sum(s, t3);
    s + (e1 + e2 + e3 + e4)
}

pub fn theorem1_bound(inputs: &BoundInputs) -> Bound {
    let n = inputs.n as f64;
    Bound::from_ln(log_bound(
        3.0,
        inputs.n,
        n * n * n * n,
        inputs.gamma,
        inputs.epsilon,
    ))
}

pub fn corollary2_bound(inputs: &BoundInputs) -> Bound {
    let n = inputs.n as f64;
    Bound::from_ln(log_bound(
        1.0,
        inputs.n,
        n * (n + 1.0) / 2.0,
        inputs.gamma,
        inputs.epsilon,
    ))
}
