//! Branching-process statistics of `#E_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::level::LevelSet;
use crate::params::PercolationParams;

const EXTINCTION_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Serialize)]
pub struct BranchingStats {
    pub mean_offspring: f64,
    pub extinction_prob: f64,
    /// Present when computed for a particular realization.
    pub martingale_z: Option<f64>,
}

/// Offspring generating function `G(s) = prod_i (1 - p_i + p_i s)`.
pub fn offspring_pgf(params: &PercolationParams, s: f64) -> f64 {
    params.probs().iter().map(|&p| 1.0 - p + p * s).product()
}

/// Smallest fixed point of the offspring generating function in `[0, 1]`,
/// by monotone iteration from 0.
pub fn extinction_probability(params: &PercolationParams) -> f64 {
    if !params.supercritical() {
        return 1.0;
    }
    let mut q = 0.0f64;
    // Near criticality the iteration converges slowly; cap the work and
    // finish with bisection on G(s) - s, which is negative on (q, 1).
    for _ in 0..1_000_000 {
        let next = offspring_pgf(params, q);
        if (next - q).abs() <= EXTINCTION_TOL {
            return next;
        }
        q = next;
    }
    let (mut lo, mut hi) = (q, 1.0 - 1e-15);
    while offspring_pgf(params, hi) - hi >= 0.0 && hi > lo {
        hi = (lo + hi) / 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if offspring_pgf(params, mid) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Marker for parameters with `sum p < 1`, whose set is a.s. empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExpectedDimension {
    Value(f64),
    Subcritical,
}

impl ExpectedDimension {
    pub fn value(self) -> Option<f64> {
        match self {
            ExpectedDimension::Value(v) => Some(v),
            ExpectedDimension::Subcritical => None,
        }
    }
}

/// Almost-sure dimension on survival, `log(sum p) / log M`.
pub fn expected_dimension(params: &PercolationParams) -> ExpectedDimension {
    let s = params.mean_offspring();
    if s < 1.0 {
        ExpectedDimension::Subcritical
    } else {
        ExpectedDimension::Value(s.ln() / (params.m() as f64).ln())
    }
}

/// `#E_n / (sum p)^n`.
pub fn martingale_z(level_set: &LevelSet, params: &PercolationParams) -> Result<f64> {
    if !params.supercritical() {
        return Err(Error::Precondition(format!(
            "martingale normalisation requires sum p > 1, got {}",
            params.mean_offspring()
        )));
    }
    Ok(level_set.len() as f64 / params.mean_offspring().powi(level_set.level() as i32))
}

pub fn branching_stats(params: &PercolationParams) -> BranchingStats {
    BranchingStats {
        mean_offspring: params.mean_offspring(),
        extinction_prob: extinction_probability(params),
        martingale_z: None,
    }
}

/// Variance of `#E_n` for a Galton-Watson process whose offspring law is a
/// sum of independent Bernoulli(`p_i`).
pub fn count_variance(params: &PercolationParams, n: u32) -> f64 {
    let m = params.mean_offspring();
    let s2: f64 = params.probs().iter().map(|p| p * (1.0 - p)).sum();
    if n == 0 {
        return 0.0;
    }
    if (m - 1.0).abs() < 1e-12 {
        return n as f64 * s2;
    }
    s2 * m.powi(n as i32 - 1) * (m.powi(n as i32) - 1.0) / (m - 1.0)
}
