use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::PercolationParams;

/// Deterministic carpet pattern: a set of retained planar symbols, all with
/// the same retention probability `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pattern {
    m: u32,
    symbols: Vec<u32>,
    p: f64,
}

impl Pattern {
    pub fn new(m: u32, mut symbols: Vec<u32>, p: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParams(format!("M must be at least 2, got {m}")));
        }
        symbols.sort_unstable();
        symbols.dedup();
        if symbols.is_empty() {
            return Err(Error::InvalidParams("pattern has no symbols".into()));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s >= m * m) {
            return Err(Error::InvalidParams(format!("symbol {s} outside the {m}x{m} alphabet")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::ProbabilityOutOfRange { index: 0, value: p });
        }
        Ok(Pattern { m, symbols, p })
    }

    pub fn full(m: u32, p: f64) -> Result<Self> {
        Self::new(m, (0..m * m).collect(), p)
    }

    /// The eight outer cells of the `3 x 3` grid.
    pub fn sierpinski(p: f64) -> Result<Self> {
        Self::new(3, (0..9).filter(|&s| s != 4).collect(), p)
    }

    /// The six cells off the middle row of the `3 x 3` grid.
    pub fn cantor(p: f64) -> Result<Self> {
        Self::new(3, (0..9).filter(|s| s / 3 != 1).collect(), p)
    }

    /// Pattern of a planar table whose nonzero entries are all equal.
    pub fn from_params(params: &PercolationParams) -> Result<Self> {
        params.require_planar()?;
        let symbols: Vec<u32> = (0..params.alphabet_size())
            .filter(|&l| params.prob(l) > 0.0)
            .collect();
        let p = symbols
            .first()
            .map(|&l| params.prob(l))
            .ok_or_else(|| Error::InvalidParams("all probabilities are zero".into()))?;
        if symbols.iter().any(|&l| params.prob(l) != p) {
            return Err(Error::InvalidParams(
                "nonzero probabilities differ; not a pattern".into(),
            ));
        }
        Self::new(params.m(), symbols, p)
    }

    pub fn to_params(&self, seed: u64) -> Result<PercolationParams> {
        let mut probs = vec![0.0; (self.m * self.m) as usize];
        for &s in &self.symbols {
            probs[s as usize] = self.p;
        }
        PercolationParams::new(2, self.m, probs, seed)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    /// Symbols as `(column, row)` pairs.
    pub fn symbols_xy(&self) -> Vec<(u32, u32)> {
        self.symbols.iter().map(|&s| (s % self.m, s / self.m)).collect()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains(&self, symbol: u32) -> bool {
        self.symbols.binary_search(&symbol).is_ok()
    }

    pub fn is_subset_of(&self, other: &Pattern) -> bool {
        self.m == other.m && self.symbols.iter().all(|&s| other.contains(s))
    }
}
