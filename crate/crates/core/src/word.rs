use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Address of a level-`n` cell: the sequence of letters chosen at each
/// subdivision step, first step first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellWord {
    letters: Vec<u32>,
}

impl CellWord {
    pub fn root() -> Self {
        CellWord { letters: Vec::new() }
    }

    pub fn new(letters: Vec<u32>) -> Self {
        CellWord { letters }
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn level(&self) -> u32 {
        self.letters.len() as u32
    }

    pub fn last_letter(&self) -> Option<u32> {
        self.letters.last().copied()
    }

    pub fn prefix(&self, len: usize) -> CellWord {
        CellWord::new(self.letters[..len.min(self.letters.len())].to_vec())
    }

    pub fn push(&mut self, letter: u32) {
        self.letters.push(letter);
    }

    /// Integer corner coordinates of the addressed cell in `[0, M^n - 1]^d`.
    /// The first letter selects the coarsest digit, so the cell is
    /// `S_{i_1} o S_{i_2} o ... o S_{i_n}(Q)`.
    pub fn corner(&self, m: u32, d: u32) -> Vec<u64> {
        let mut coords = vec![0u64; d as usize];
        for &letter in &self.letters {
            let mut rest = letter;
            for c in coords.iter_mut() {
                *c = *c * m as u64 + (rest % m) as u64;
                rest /= m;
            }
        }
        coords
    }

    /// Inverse of [`CellWord::corner`].
    pub fn from_corner(coords: &[u64], m: u32, n: u32) -> Result<CellWord> {
        let side = (m as u64)
            .checked_pow(n)
            .ok_or_else(|| Error::LevelTooDeep(format!("M^n overflows for n = {n}")))?;
        if coords.iter().any(|&c| c >= side) {
            return Err(Error::Domain(format!("corner {coords:?} outside [0, {side})")));
        }
        let mut letters = vec![0u32; n as usize];
        let mut scale = side;
        for letter in letters.iter_mut() {
            scale /= m as u64;
            let mut l = 0u64;
            for c in coords.iter().rev() {
                l = l * m as u64 + (c / scale) % m as u64;
            }
            *letter = l as u32;
        }
        Ok(CellWord { letters })
    }
}
