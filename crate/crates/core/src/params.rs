//! Construction parameters for a fractal percolation set.
//!
//! The alphabet is `{0..M-1}^d`. A letter is stored as its flat index
//! `c_0 + c_1*M + ... + c_{d-1}*M^{d-1}`, so for `d = 2` the letter `(i, j)`
//! (column `i` along the x-axis, row `j` along the y-axis) has index
//! `i + M*j` and a row-major table listed bottom row first is already in
//! letter order.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Relative slack used when comparing `sum p` with 1 or with `M`.
pub const CRITICALITY_TOL: f64 = 1e-12;

/// Unvalidated parameter record, as read from a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub d: u32,
    pub m: u32,
    pub probs: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercolationParams {
    d: u32,
    m: u32,
    probs: Vec<f64>,
    seed: u64,
}

/// Validates a raw parameter record.
pub fn validate_params(raw: &RawParams) -> Result<PercolationParams> {
    PercolationParams::new(raw.d, raw.m, raw.probs.clone(), raw.seed)
}

impl PercolationParams {
    pub fn new(d: u32, m: u32, probs: Vec<f64>, seed: u64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParams(format!("d must be at least 1, got {d}")));
        }
        if m < 2 {
            return Err(Error::InvalidParams(format!("M must be at least 2, got {m}")));
        }
        let size = (m as u64)
            .checked_pow(d)
            .filter(|&s| s <= 1 << 24)
            .ok_or_else(|| Error::InvalidParams(format!("alphabet {m}^{d} too large")))?;
        if probs.len() as u64 != size {
            return Err(Error::InvalidParams(format!(
                "probability table has {} entries, expected M^d = {size}",
                probs.len()
            )));
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::ProbabilityOutOfRange { index, value });
        }
        Ok(Self { d, m, probs, seed })
    }

    /// Homogeneous parameters: every letter retained with probability `p`.
    pub fn homogeneous(d: u32, m: u32, p: f64, seed: u64) -> Result<Self> {
        let size = (m as usize).checked_pow(d).unwrap_or(usize::MAX).min(1 << 25);
        Self::new(d, m, vec![p; size], seed)
    }

    /// Planar parameters from a table `rows[j][i]` (row `j`, column `i`),
    /// bottom row first.
    pub fn planar_from_rows(m: u32, rows: &[Vec<f64>], seed: u64) -> Result<Self> {
        if rows.len() != m as usize || rows.iter().any(|r| r.len() != m as usize) {
            return Err(Error::InvalidParams(format!("probability matrix must be {m}x{m}")));
        }
        Self::new(2, m, rows.concat(), seed)
    }

    /// Randomized Sierpinski carpet: `M = 3`, centre cell removed.
    pub fn sierpinski_carpet(p: f64, seed: u64) -> Result<Self> {
        let mut probs = vec![p; 9];
        probs[4] = 0.0;
        Self::new(2, 3, probs, seed)
    }

    /// Cantor-like random carpet: `M = 3`, the middle row (`j = 1`) removed,
    /// so every realization lies in `[0,1] x C` with `C` the middle-thirds
    /// Cantor set.
    pub fn cantor_carpet(p: f64, seed: u64) -> Result<Self> {
        let rows = vec![vec![p; 3], vec![0.0; 3], vec![p; 3]];
        Self::planar_from_rows(3, &rows, seed)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, letter: u32) -> f64 {
        self.probs[letter as usize]
    }

    pub fn alphabet_size(&self) -> u32 {
        self.probs.len() as u32
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.d, self.m, probs, self.seed)
    }

    /// Mean offspring count of the associated branching process.
    pub fn mean_offspring(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `sum p > 1`, up to [`CRITICALITY_TOL`] so that tables such as nine
    /// copies of `1/9` count as critical.
    pub fn supercritical(&self) -> bool {
        self.mean_offspring() > 1.0 + CRITICALITY_TOL
    }

    /// Expected dimension exceeds one: `sum p > M`.
    pub fn dim_gt_1(&self) -> bool {
        self.mean_offspring() > self.m as f64 * (1.0 + CRITICALITY_TOL)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.probs.iter().all(|&p| p == self.probs[0])
    }

    /// Decodes a letter into its `d` coordinates, first axis first.
    pub fn letter_coords(&self, letter: u32) -> Vec<u32> {
        let mut rest = letter;
        (0..self.d)
            .map(|_| {
                let c = rest % self.m;
                rest /= self.m;
                c
            })
            .collect()
    }

    /// Planar letter `(column, row)`.
    pub fn letter_xy(&self, letter: u32) -> (u32, u32) {
        (letter % self.m, letter / self.m)
    }

    /// Fingerprint of everything that determines a realization.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.d.to_le_bytes());
        h.update(self.m.to_le_bytes());
        for p in &self.probs {
            h.update(p.to_bits().to_le_bytes());
        }
        h.update(self.seed.to_le_bytes());
        let out = h.finalize();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_raw(&self) -> RawParams {
        RawParams {
            d: self.d,
            m: self.m,
            probs: self.probs.clone(),
            seed: self.seed,
        }
    }

    pub(crate) fn require_planar(&self) -> Result<()> {
        if self.d != 2 {
            return Err(Error::Precondition(format!(
                "operation requires d = 2, got d = {}",
                self.d
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_retention_flags() {
        let p = PercolationParams::homogeneous(2, 3, 1.0, 0).unwrap();
        assert_eq!(p.mean_offspring(), 9.0);
        assert!(p.supercritical());
        assert!(p.dim_gt_1());
    }

    #[test]
    fn critical_boundary_is_not_supercritical() {
        let p = PercolationParams::homogeneous(2, 3, 1.0 / 9.0, 0).unwrap();
        assert!((p.mean_offspring() - 1.0).abs() < 1e-12);
        // the float sum lands a hair above 1
        assert!(!p.supercritical());
        assert!(!p.dim_gt_1());
    }

    #[test]
    fn rejects_out_of_range_probability() {
        let mut probs = vec![0.5; 9];
        probs[3] = 1.2;
        let err = PercolationParams::new(2, 3, probs, 0).unwrap_err();
        assert_eq!(err, Error::ProbabilityOutOfRange { index: 3, value: 1.2 });
        assert!(err.to_string().contains("probability out of range"));
    }

    #[test]
    fn rejects_bad_shape() {
        assert!(PercolationParams::new(2, 1, vec![0.5], 0).is_err());
        assert!(PercolationParams::new(0, 3, vec![], 0).is_err());
        assert!(PercolationParams::new(2, 3, vec![0.5; 8], 0).is_err());
        assert!(PercolationParams::new(2, 3, vec![f64::NAN; 9], 0).is_err());
    }

    #[test]
    fn cantor_carpet_removes_middle_row() {
        let p = PercolationParams::cantor_carpet(0.75, 0).unwrap();
        for letter in 0..9 {
            let (_, row) = p.letter_xy(letter);
            assert_eq!(p.prob(letter) == 0.0, row == 1);
        }
        assert!((p.mean_offspring() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn letter_coords_match_planar_layout() {
        let p = PercolationParams::homogeneous(2, 3, 0.5, 0).unwrap();
        assert_eq!(p.letter_coords(5), vec![2, 1]);
        assert_eq!(p.letter_xy(5), (2, 1));
        let q = PercolationParams::homogeneous(3, 2, 0.5, 0).unwrap();
        assert_eq!(q.letter_coords(6), vec![0, 1, 1]);
    }

    #[test]
    fn digest_depends_on_seed() {
        let a = PercolationParams::homogeneous(2, 3, 0.7, 1).unwrap();
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), a.with_seed(2).digest());
    }
}
