//! Level-`n` approximations of a percolation set.

use serde::Serialize;

use crate::branching::extinction_probability;
use crate::error::{Error, Result};
use crate::params::PercolationParams;
use crate::rng::{derive_seed, NodeKey};
use crate::word::CellWord;

/// Default bound on the number of cells materialised at one level.
pub const DEFAULT_CELL_CAP: usize = 50_000_000;

/// Default number of draws tried by [`sample_conditioned`].
pub const DEFAULT_MAX_ATTEMPTS: u32 = 1000;

/// The retained cells of one level.
///
/// Cells are stored as flat coordinate indices `c_0 + c_1*L + ...` with
/// `L = M^n`, listed in tree order (lexicographic order of their words).
/// Tree order is canonical, so two level sets are equal iff their cell
/// vectors are equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSet {
    n: u32,
    d: u32,
    m: u32,
    cells: Vec<u64>,
    params_digest: String,
}

fn side_len(m: u32, n: u32) -> Result<u64> {
    (m as u64)
        .checked_pow(n)
        .ok_or_else(|| Error::LevelTooDeep(format!("M^n overflows 64 bits at n = {n}")))
}

fn check_index_width(m: u32, d: u32, n: u32) -> Result<()> {
    let ok = (m as u64)
        .checked_pow(n)
        .and_then(|s| s.checked_pow(d))
        .is_some();
    if ok {
        Ok(())
    } else {
        Err(Error::LevelTooDeep(format!(
            "M^(d*n) exceeds 64 bits for M = {m}, d = {d}, n = {n}"
        )))
    }
}

impl LevelSet {
    /// Builds a level set from arbitrary corner coordinates, putting them in
    /// tree order and removing duplicates.
    pub fn from_corners(
        m: u32,
        d: u32,
        n: u32,
        corners: &[Vec<u64>],
        params_digest: impl Into<String>,
    ) -> Result<Self> {
        check_index_width(m, d, n)?;
        let side = side_len(m, n)?;
        let mut keyed = Vec::with_capacity(corners.len());
        for c in corners {
            if c.len() != d as usize || c.iter().any(|&x| x >= side) {
                return Err(Error::Domain(format!("corner {c:?} invalid at level {n}")));
            }
            let flat = c.iter().rev().fold(0u64, |acc, &x| acc * side + x);
            keyed.push((tree_key(c, m, n), flat));
        }
        keyed.sort_unstable();
        keyed.dedup();
        Ok(LevelSet {
            n,
            d,
            m,
            cells: keyed.into_iter().map(|(_, f)| f).collect(),
            params_digest: params_digest.into(),
        })
    }

    /// The whole grid `{0..M^n-1}^d`.
    pub fn full(m: u32, d: u32, n: u32) -> Result<Self> {
        let params = PercolationParams::homogeneous(d, m, 1.0, 0)?;
        sample_level_set(&params, n)
    }

    pub fn empty(m: u32, d: u32, n: u32) -> Self {
        LevelSet {
            n,
            d,
            m,
            cells: Vec::new(),
            params_digest: String::new(),
        }
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn params_digest(&self) -> &str {
        &self.params_digest
    }

    /// Side length `M^n` of the integer grid.
    pub fn side(&self) -> u64 {
        (self.m as u64).pow(self.n)
    }

    pub fn flat_cells(&self) -> &[u64] {
        &self.cells
    }

    fn decode(&self, flat: u64) -> Vec<u64> {
        let side = self.side();
        let mut rest = flat;
        (0..self.d)
            .map(|_| {
                let c = rest % side;
                rest /= side;
                c
            })
            .collect()
    }

    /// Corner coordinates of every cell, in tree order.
    pub fn corners(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        self.cells.iter().map(move |&f| self.decode(f))
    }

    /// Planar corners `(column, row)`.
    pub fn corners_2d(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let side = self.side();
        self.cells.iter().map(move |&f| (f % side, f / side))
    }

    pub fn words(&self) -> impl Iterator<Item = CellWord> + '_ {
        self.corners()
            .map(move |c| CellWord::from_corner(&c, self.m, self.n).expect("cell within grid"))
    }

    pub fn contains_corner(&self, corner: &[u64]) -> bool {
        let side = self.side();
        if corner.len() != self.d as usize || corner.iter().any(|&c| c >= side) {
            return false;
        }
        let flat = corner.iter().rev().fold(0u64, |acc, &x| acc * side + x);
        let key = tree_key(corner, self.m, self.n);
        self.cells
            .binary_search_by(|&f| tree_key(&self.decode(f), self.m, self.n).cmp(&key))
            .map(|i| self.cells[i] == flat)
            .unwrap_or(false)
    }

    /// Set of level-`(n-1)` parents, in tree order.
    pub fn parents(&self) -> Result<LevelSet> {
        if self.n == 0 {
            return Err(Error::Precondition("root level has no parents".into()));
        }
        let m = self.m as u64;
        let corners: Vec<Vec<u64>> = self
            .corners()
            .map(|c| c.into_iter().map(|x| x / m).collect())
            .collect();
        LevelSet::from_corners(self.m, self.d, self.n - 1, &corners, self.params_digest.clone())
    }

    /// True when every cell of `self` is a cell of `other`.
    pub fn is_subset_of(&self, other: &LevelSet) -> bool {
        if self.n != other.n || self.d != other.d || self.m != other.m {
            return false;
        }
        let mut theirs = other.cells.clone();
        theirs.sort_unstable();
        self.cells.iter().all(|c| theirs.binary_search(c).is_ok())
    }
}

/// Lexicographic key of a word, computed from its corner.
fn tree_key(corner: &[u64], m: u32, n: u32) -> u64 {
    let word = CellWord::from_corner(corner, m, n).expect("corner within grid");
    let base = (m as u64).pow(corner.len() as u32);
    word.letters()
        .iter()
        .fold(0u64, |acc, &l| acc * base + l as u64)
}

/// Breadth-first sampler yielding `E_0, E_1, ...` for one seed.
pub struct LevelSampler<'a> {
    params: &'a PercolationParams,
    level: u32,
    frontier: Vec<(u64, NodeKey)>,
    cap: usize,
    digest: String,
    live_letters: Vec<(u32, f64, Vec<u64>)>,
}

impl<'a> LevelSampler<'a> {
    pub fn new(params: &'a PercolationParams) -> Self {
        Self::with_cap(params, DEFAULT_CELL_CAP)
    }

    pub fn with_cap(params: &'a PercolationParams, cap: usize) -> Self {
        let live_letters = (0..params.alphabet_size())
            .filter(|&l| params.prob(l) > 0.0)
            .map(|l| {
                let coords = params.letter_coords(l).into_iter().map(u64::from).collect();
                (l, params.prob(l), coords)
            })
            .collect();
        LevelSampler {
            params,
            level: 0,
            frontier: vec![(0, NodeKey::root(params.seed()))],
            cap,
            digest: params.digest(),
            live_letters,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn count(&self) -> usize {
        self.frontier.len()
    }

    /// The current level as a [`LevelSet`].
    pub fn current(&self) -> LevelSet {
        LevelSet {
            n: self.level,
            d: self.params.d(),
            m: self.params.m(),
            cells: self.frontier.iter().map(|&(f, _)| f).collect(),
            params_digest: self.digest.clone(),
        }
    }

    /// Advances one level.
    pub fn advance(&mut self) -> Result<()> {
        let d = self.params.d();
        let m = self.params.m() as u64;
        check_index_width(self.params.m(), d, self.level + 1)?;
        let side = m.pow(self.level);
        let child_side = side * m;
        let mut next = Vec::with_capacity(self.frontier.len() * 2);
        let mut coords = vec![0u64; d as usize];
        for &(flat, key) in &self.frontier {
            let mut rest = flat;
            for c in coords.iter_mut() {
                *c = rest % side;
                rest /= side;
            }
            for (letter, p, off) in &self.live_letters {
                let child = key.child(*letter);
                if child.draw() < *p {
                    let child_flat = coords
                        .iter()
                        .zip(off)
                        .rev()
                        .fold(0u64, |acc, (&c, &o)| acc * child_side + c * m + o);
                    next.push((child_flat, child));
                }
            }
            if next.len() > self.cap {
                return Err(Error::LevelTooDeep(format!(
                    "more than {} cells at level {}",
                    self.cap,
                    self.level + 1
                )));
            }
        }
        self.frontier = next;
        self.level += 1;
        Ok(())
    }
}

/// Samples `E_n`, the cells all of whose prefixes survive.
pub fn sample_level_set(params: &PercolationParams, n: u32) -> Result<LevelSet> {
    sample_level_set_capped(params, n, DEFAULT_CELL_CAP)
}

pub fn sample_level_set_capped(params: &PercolationParams, n: u32, cap: usize) -> Result<LevelSet> {
    let mut s = LevelSampler::with_cap(params, cap);
    while s.level() < n && s.count() > 0 {
        s.advance()?;
    }
    if s.level() < n {
        return Ok(LevelSet::empty(params.m(), params.d(), n).with_digest(params.digest()));
    }
    Ok(s.current())
}

/// `E_0, ..., E_n` for one seed.
pub fn sample_levels(params: &PercolationParams, n: u32) -> Result<Vec<LevelSet>> {
    let mut s = LevelSampler::new(params);
    let mut out = vec![s.current()];
    while s.level() < n {
        s.advance()?;
        out.push(s.current());
    }
    Ok(out)
}

/// Cell counts `#E_0, ..., #E_n` without retaining the level sets.
pub fn level_counts(params: &PercolationParams, n: u32) -> Result<Vec<u64>> {
    let mut s = LevelSampler::new(params);
    let mut out = vec![1u64];
    while s.level() < n {
        if s.count() == 0 {
            out.push(0);
            s.level += 1;
            continue;
        }
        s.advance()?;
        out.push(s.count() as u64);
    }
    Ok(out)
}

impl LevelSet {
    fn with_digest(mut self, digest: String) -> Self {
        self.params_digest = digest;
        self
    }
}

/// Result of sampling conditioned on survival to level `n`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionedSample {
    pub level_set: LevelSet,
    pub rejected: u32,
    pub seed_used: u64,
}

/// Rejection sampling of a non-empty `E_n`. Attempt `k` uses
/// `derive_seed(params.seed(), k)`.
pub fn sample_conditioned(
    params: &PercolationParams,
    n: u32,
    max_attempts: u32,
) -> Result<ConditionedSample> {
    if !params.supercritical() {
        return Err(Error::Precondition(format!(
            "conditioning requires a supercritical table (sum p = {})",
            params.mean_offspring()
        )));
    }
    for k in 0..max_attempts {
        let seed = derive_seed(params.seed(), k as u64);
        let ls = sample_level_set(&params.with_seed(seed), n)?;
        if !ls.is_empty() {
            return Ok(ConditionedSample {
                level_set: ls,
                rejected: k,
                seed_used: seed,
            });
        }
    }
    Err(Error::ExtinctionDominated {
        attempts: max_attempts,
        extinction_probability: extinction_probability(params),
    })
}

/// Cellwise intersection of two level sets of the same geometry.
pub fn intersect_level_sets(a: &LevelSet, b: &LevelSet) -> Result<LevelSet> {
    if a.n != b.n || a.d != b.d || a.m != b.m {
        return Err(Error::Mismatch(format!(
            "cannot intersect (n={}, d={}, M={}) with (n={}, d={}, M={})",
            a.n, a.d, a.m, b.n, b.d, b.m
        )));
    }
    let mut theirs = b.cells.clone();
    theirs.sort_unstable();
    let cells = a
        .cells
        .iter()
        .copied()
        .filter(|c| theirs.binary_search(c).is_ok())
        .collect();
    Ok(LevelSet {
        n: a.n,
        d: a.d,
        m: a.m,
        cells,
        params_digest: format!("{}&{}", a.params_digest, b.params_digest),
    })
}

/// Planar bit grid, bit `(i, j)` addressing column `i` and row `j`, row 0 at
/// the bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGrid {
    side: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitGrid {
    pub fn new(side: usize) -> Self {
        let words_per_row = side.div_ceil(64);
        BitGrid {
            side,
            words_per_row,
            bits: vec![0; words_per_row * side],
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.words_per_row + i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.bits[j * self.words_per_row + i / 64];
        if value {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Rasterises a planar level set onto an `M^n x M^n` bit grid.
pub fn raster(level_set: &LevelSet) -> Result<BitGrid> {
    if level_set.d() != 2 {
        return Err(Error::Precondition(format!(
            "raster requires d = 2, got d = {}",
            level_set.d()
        )));
    }
    let side = usize::try_from(level_set.side())
        .ok()
        .filter(|&s| s <= 1 << 16)
        .ok_or_else(|| Error::LevelTooDeep(format!("raster side {} too large", level_set.side())))?;
    let mut grid = BitGrid::new(side);
    for (a, b) in level_set.corners_2d() {
        grid.set(a as usize, b as usize, true);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homo(p: f64, seed: u64) -> PercolationParams {
        PercolationParams::homogeneous(2, 3, p, seed).unwrap()
    }

    #[test]
    fn full_retention_gives_full_grid() {
        let ls = sample_level_set(&homo(1.0, 0), 2).unwrap();
        assert_eq!(ls.len(), 81);
    }

    #[test]
    fn zero_retention_is_empty() {
        let ls = sample_level_set(&homo(0.0, 0), 1).unwrap();
        assert!(ls.is_empty());
        assert_eq!(ls.level(), 1);
    }

    #[test]
    fn root_level_is_single_cell() {
        let ls = sample_level_set(&homo(0.3, 5), 0).unwrap();
        assert_eq!(ls.len(), 1);
        assert_eq!(ls.corners().next().unwrap(), vec![0, 0]);
    }

    #[test]
    fn cells_follow_tree_order() {
        let ls = sample_level_set(&homo(0.8, 3), 3).unwrap();
        let keys: Vec<u64> = ls.corners().map(|c| tree_key(&c, 3, 3)).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        let rebuilt =
            LevelSet::from_corners(3, 2, 3, &ls.corners().collect::<Vec<_>>(), ls.params_digest())
                .unwrap();
        assert_eq!(rebuilt, ls);
    }

    #[test]
    fn nesting_holds() {
        for seed in 0..20 {
            let levels = sample_levels(&homo(0.6, seed), 5).unwrap();
            for w in levels.windows(2) {
                if w[1].is_empty() {
                    continue;
                }
                assert!(w[1].parents().unwrap().is_subset_of(&w[0]));
            }
        }
    }

    #[test]
    fn cap_signals_level_too_deep() {
        let err = sample_level_set_capped(&homo(1.0, 0), 4, 100).unwrap_err();
        assert!(matches!(err, Error::LevelTooDeep(_)));
    }

    #[test]
    fn conditioned_full_retention_first_attempt() {
        let s = sample_conditioned(&homo(1.0, 9), 3, 10).unwrap();
        assert_eq!(s.rejected, 0);
        assert_eq!(s.level_set.len(), 729);
    }

    #[test]
    fn conditioned_rejects_subcritical() {
        let p = homo(1.0 / 9.0, 0);
        assert!(matches!(
            sample_conditioned(&p, 3, 10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn conditioned_reports_extinction_dominated() {
        let p = PercolationParams::homogeneous(2, 2, 0.26, 0).unwrap();
        match sample_conditioned(&p, 30, 3) {
            Err(Error::ExtinctionDominated {
                attempts,
                extinction_probability,
            }) => {
                assert_eq!(attempts, 3);
                assert!(extinction_probability > 0.85);
            }
            Ok(s) => assert!(!s.level_set.is_empty()),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn intersection_identities() {
        let a = sample_level_set(&homo(0.7, 11), 3).unwrap();
        let full = LevelSet::full(3, 2, 3).unwrap();
        assert_eq!(intersect_level_sets(&a, &a).unwrap().flat_cells(), a.flat_cells());
        assert_eq!(intersect_level_sets(&a, &full).unwrap().flat_cells(), a.flat_cells());
        let other_level = sample_level_set(&homo(0.7, 11), 2).unwrap();
        assert!(matches!(
            intersect_level_sets(&a, &other_level),
            Err(Error::Mismatch(_))
        ));
    }

    #[test]
    fn raster_single_cell() {
        let ls = LevelSet::from_corners(3, 2, 1, &[vec![0, 0]], "").unwrap();
        let g = raster(&ls).unwrap();
        assert_eq!(g.side(), 3);
        assert!(g.get(0, 0));
        assert_eq!(g.count_ones(), 1);
    }

    #[test]
    fn raster_full_and_empty() {
        let g = raster(&LevelSet::full(3, 2, 2).unwrap()).unwrap();
        assert_eq!(g.count_ones(), 81);
        let e = raster(&LevelSet::empty(3, 2, 2)).unwrap();
        assert_eq!(e.count_ones(), 0);
        let d3 = LevelSet::empty(2, 3, 1);
        assert!(raster(&d3).is_err());
    }

    #[test]
    fn three_dimensional_sampling() {
        let p = PercolationParams::homogeneous(3, 2, 1.0, 0).unwrap();
        let ls = sample_level_set(&p, 2).unwrap();
        assert_eq!(ls.len(), 64);
        assert!(ls.corners().all(|c| c.len() == 3 && c.iter().all(|&x| x < 4)));
    }
}
