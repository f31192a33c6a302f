//! Cells of a planar set met by the line `l(x) = { p : Pi(p) = x }`.
//!
//! Counting walks the construction tree depth first and tracks, for every
//! visited cell, the relative entrance point `psi = M^n x - a + b beta` of
//! the line. A child `(i, j)` of a cell meets the line iff
//! `M psi - i + j beta` lies in `[-beta, 1]`, so only cells on the slice
//! are ever visited. In exact mode `psi` is kept as an integer numerator.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::direction::{Offset, SliceQuery, Slope};
use super::pattern::Pattern;
use crate::error::{Error, Result};
use crate::level::LevelSet;
use crate::params::PercolationParams;
use crate::rng::NodeKey;
use crate::stats::{linear_fit, LineFit};
use crate::transfer::GridFunction;
use crate::word::CellWord;

/// Upper bound on cells visited by one slice walk.
pub const SLICE_NODE_CAP: u64 = 1 << 34;

/// Whether a line that only touches the boundary of a cell meets it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Contact {
    /// The line must cross the open cell.
    #[default]
    Interior,
    /// Boundary contact counts.
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    South,
    West,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entrance {
    pub side: Side,
    pub psi: f64,
}

trait Kernel {
    type S: Clone;
    fn child(&self, s: &Self::S, i: u32, j: u32) -> Self::S;
    fn inside(&self, s: &Self::S) -> bool;
    fn south(&self, s: &Self::S) -> bool;
    fn psi(&self, s: &Self::S) -> f64;
}

/// `psi = y / den`, `beta = b / den`.
struct ExactKernel<T> {
    m: T,
    den: T,
    b: T,
    id: Vec<T>,
    jb: Vec<T>,
    zero: T,
    closed: bool,
}

impl<T> ExactKernel<T>
where
    T: Clone + Ord + Signed + From<i64>,
{
    fn new(m: u32, den: T, b: T, contact: Contact) -> Self {
        let id = (0..m).map(|i| T::from(i as i64) * den.clone()).collect();
        let jb = (0..m).map(|j| T::from(j as i64) * b.clone()).collect();
        ExactKernel {
            m: T::from(m as i64),
            den,
            b,
            id,
            jb,
            zero: T::from(0),
            closed: contact == Contact::Closed,
        }
    }
}

impl<T> Kernel for ExactKernel<T>
where
    T: Clone + Ord + Signed + ToPrimitive,
{
    type S = T;

    #[inline]
    fn child(&self, s: &T, i: u32, j: u32) -> T {
        self.m.clone() * s.clone() - self.id[i as usize].clone() + self.jb[j as usize].clone()
    }

    #[inline]
    fn inside(&self, s: &T) -> bool {
        let nb = -self.b.clone();
        if self.closed {
            *s >= nb && *s <= self.den
        } else {
            *s > nb && *s < self.den
        }
    }

    fn south(&self, s: &T) -> bool {
        *s >= self.zero
    }

    fn psi(&self, s: &T) -> f64 {
        s.to_f64().unwrap_or(f64::NAN) / self.den.to_f64().unwrap_or(f64::NAN)
    }
}

struct FloatKernel {
    m: f64,
    beta: f64,
    closed: bool,
}

impl Kernel for FloatKernel {
    type S = f64;

    #[inline]
    fn child(&self, s: &f64, i: u32, j: u32) -> f64 {
        self.m * s - i as f64 + j as f64 * self.beta
    }

    #[inline]
    fn inside(&self, s: &f64) -> bool {
        if self.closed {
            *s >= -self.beta && *s <= 1.0
        } else {
            *s > -self.beta && *s < 1.0
        }
    }

    fn south(&self, s: &f64) -> bool {
        *s >= 0.0
    }

    fn psi(&self, s: &f64) -> f64 {
        *s
    }
}

/// A child symbol: original letter (for retention draws) and its position
/// `(i, j)` in the direction's frame.
#[derive(Clone, Copy)]
struct Sym {
    letter: u32,
    i: u32,
    j: u32,
    prob: f64,
}

/// Visit data for each cell on the slice.
struct Visit<'a, S> {
    level: u32,
    state: &'a S,
    row: u64,
}

fn walk<K: Kernel>(
    k: &K,
    root: K::S,
    m: u32,
    syms: &[Sym],
    n: u32,
    seed: Option<u64>,
    mut visit: impl FnMut(Visit<'_, K::S>),
) -> Result<()> {
    let mut stack = vec![(0u32, root, 0u64, NodeKey::root(seed.unwrap_or(0)))];
    let mut visited = 0u64;
    while let Some((level, s, row, key)) = stack.pop() {
        visited += 1;
        if visited > SLICE_NODE_CAP {
            return Err(Error::LevelTooDeep(format!(
                "slice walk exceeded {SLICE_NODE_CAP} cells"
            )));
        }
        visit(Visit {
            level,
            state: &s,
            row,
        });
        if level == n {
            continue;
        }
        for sym in syms.iter().rev() {
            let ck = match seed {
                Some(_) => {
                    let c = key.child(sym.letter);
                    if c.draw() >= sym.prob {
                        continue;
                    }
                    c
                }
                None => key,
            };
            let cs = k.child(&s, sym.i, sym.j);
            if k.inside(&cs) {
                stack.push((
                    level + 1,
                    cs,
                    row.wrapping_mul(m as u64).wrapping_add(sym.j as u64),
                    ck,
                ));
            }
        }
    }
    Ok(())
}

fn bits(x: i128) -> u32 {
    128 - x.unsigned_abs().leading_zeros()
}

/// Runs `f` with a kernel matching the query: `i128` or `BigInt` in exact
/// mode, `f64` otherwise.
fn with_kernel<R>(
    q: &SliceQuery,
    m: u32,
    contact: Contact,
    f: impl KernelUser<R>,
) -> Result<R> {
    match (q.direction.slope(), q.x) {
        (Slope::Exact(beta), Offset::Exact(x)) => {
            let (u, v) = (*beta.numer() as i128, *beta.denom() as i128);
            let (s, t) = (*x.numer() as i128, *x.denom() as i128);
            let den = v * t;
            let b = u * t;
            let y0 = s * v;
            // |child| <= 3 M den
            if bits(den) + 32 - m.leading_zeros() + 2 < 126 {
                f.run(ExactKernel::new(m, den, b, contact), y0)
            } else {
                let big = |z: i128| BigInt::from(z);
                f.run(ExactKernel::new(m, big(den), big(b), contact), big(y0))
            }
        }
        _ => f.run(
            FloatKernel {
                m: m as f64,
                beta: q.direction.beta(),
                closed: contact == Contact::Closed,
            },
            q.x.to_f64(),
        ),
    }
}

trait KernelUser<R> {
    fn run<K: Kernel>(self, k: K, root: K::S) -> Result<R>;
}

fn pattern_syms(pattern: &Pattern, q: &SliceQuery) -> Vec<Sym> {
    let m = pattern.m();
    pattern
        .symbols()
        .iter()
        .map(|&letter| {
            let (i, j) = q
                .direction
                .symmetry()
                .apply_corner((letter % m) as u64, (letter / m) as u64, m as u64);
            Sym {
                letter,
                i: i as u32,
                j: j as u32,
                prob: pattern.p(),
            }
        })
        .collect()
}

fn params_syms(params: &PercolationParams, q: &SliceQuery) -> Vec<Sym> {
    let m = params.m();
    (0..params.alphabet_size())
        .filter(|&l| params.prob(l) > 0.0)
        .map(|letter| {
            let (a, b) = params.letter_xy(letter);
            let (i, j) = q.direction.symmetry().apply_corner(a as u64, b as u64, m as u64);
            Sym {
                letter,
                i: i as u32,
                j: j as u32,
                prob: params.prob(letter),
            }
        })
        .collect()
}

struct Counter<'a> {
    m: u32,
    syms: &'a [Sym],
    n: u32,
    seed: Option<u64>,
}

impl KernelUser<Vec<u64>> for Counter<'_> {
    fn run<K: Kernel>(self, k: K, root: K::S) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.n as usize + 1];
        walk(&k, root, self.m, self.syms, self.n, self.seed, |v| {
            counts[v.level as usize] += 1
        })?;
        Ok(counts)
    }
}

/// `N_n` for levels `0..=n` of the deterministic pattern set.
pub fn pattern_slice_counts_with(
    pattern: &Pattern,
    q: &SliceQuery,
    n: u32,
    contact: Contact,
) -> Result<Vec<u64>> {
    let syms = pattern_syms(pattern, q);
    let c = Counter {
        m: pattern.m(),
        syms: &syms,
        n,
        seed: None,
    };
    with_kernel(q, pattern.m(), contact, c)
}

/// Exact `N_n` for levels `0..=n`, interior contact.
pub fn pattern_slice_counts(pattern: &Pattern, q: &SliceQuery, n: u32) -> Result<Vec<u64>> {
    require_exact(q)?;
    pattern_slice_counts_with(pattern, q, n, Contact::Interior)
}

/// Exact number of level-`n` cells of the deterministic pattern set crossed
/// by the line.
pub fn pattern_slice_count(pattern: &Pattern, q: &SliceQuery, n: u32) -> Result<u64> {
    Ok(*pattern_slice_counts(pattern, q, n)?.last().expect("n + 1 levels"))
}

/// Slice cell counts of one realization, levels `0..=n`. Equal to
/// `slice_cells_with(sample_level_set(params, k), q, contact).len()` for
/// every `k`, but only the cells on the line are generated.
pub fn realization_slice_counts(
    params: &PercolationParams,
    q: &SliceQuery,
    n: u32,
    contact: Contact,
) -> Result<Vec<u64>> {
    params.require_planar()?;
    let syms = params_syms(params, q);
    let c = Counter {
        m: params.m(),
        syms: &syms,
        n,
        seed: Some(params.seed()),
    };
    with_kernel(q, params.m(), contact, c)
}

fn require_exact(q: &SliceQuery) -> Result<()> {
    if q.is_exact() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "exact slice counting requires rational beta and x".into(),
        ))
    }
}

/// Exact membership of cell `(a, b)` of side `1/L`: the line through `x`
/// meets the cell. Integers throughout; falls back to `BigInt`.
fn meets_exact(a: u64, b: u64, l: u64, beta: (i64, i64), x: (i64, i64), contact: Contact) -> bool {
    let (u, v) = (BigInt::from(beta.0), BigInt::from(beta.1));
    let (s, t) = (BigInt::from(x.0), BigInt::from(x.1));
    let (a, b, l) = (BigInt::from(a), BigInt::from(b), BigInt::from(l));
    let mid = &s * &v * &l;
    let lo = (&a * &v - (&b + 1u32) * &u) * &t;
    let hi = ((&a + 1u32) * &v - &b * &u) * &t;
    match contact {
        Contact::Interior => lo < mid && mid < hi,
        Contact::Closed => lo <= mid && mid <= hi,
    }
}

fn meets_exact_i128(a: u64, b: u64, l: u64, beta: (i64, i64), x: (i64, i64), contact: Contact) -> Option<bool> {
    let (u, v) = (beta.0 as i128, beta.1 as i128);
    let (s, t) = (x.0 as i128, x.1 as i128);
    let (a, b, l) = (a as i128, b as i128, l as i128);
    let mid = s.checked_mul(v)?.checked_mul(l)?;
    let lo = a
        .checked_mul(v)?
        .checked_sub((b + 1).checked_mul(u)?)?
        .checked_mul(t)?;
    let hi = (a + 1)
        .checked_mul(v)?
        .checked_sub(b.checked_mul(u)?)?
        .checked_mul(t)?;
    Some(match contact {
        Contact::Interior => lo < mid && mid < hi,
        Contact::Closed => lo <= mid && mid <= hi,
    })
}

/// Retained cells of `ls` crossed by the line, interior contact.
pub fn slice_cells(ls: &LevelSet, q: &SliceQuery) -> Result<Vec<CellWord>> {
    slice_cells_with(ls, q, Contact::Interior)
}

pub fn slice_cells_with(ls: &LevelSet, q: &SliceQuery, contact: Contact) -> Result<Vec<CellWord>> {
    if ls.d() != 2 {
        return Err(Error::Precondition(format!("slices require d = 2, got d = {}", ls.d())));
    }
    let l = ls.side();
    let sym = q.direction.symmetry();
    let m = ls.m();
    let n = ls.level();
    let meets: Box<dyn Fn(u64, u64) -> bool> = match (q.direction.slope(), q.x) {
        (Slope::Exact(beta), Offset::Exact(x)) => {
            let beta = (*beta.numer(), *beta.denom());
            let x = (*x.numer(), *x.denom());
            Box::new(move |a, b| {
                meets_exact_i128(a, b, l, beta, x, contact)
                    .unwrap_or_else(|| meets_exact(a, b, l, beta, x, contact))
            })
        }
        _ => {
            let beta = q.direction.beta();
            let x = q.x.to_f64();
            let s = l as f64;
            Box::new(move |a, b| {
                let lo = (a as f64 - (b + 1) as f64 * beta) / s;
                let hi = ((a + 1) as f64 - b as f64 * beta) / s;
                match contact {
                    Contact::Interior => lo < x && x < hi,
                    Contact::Closed => lo <= x && x <= hi,
                }
            })
        }
    };
    ls.corners_2d()
        .filter(|&(a, b)| {
            let (a2, b2) = sym.apply_corner(a, b, l);
            meets(a2, b2)
        })
        .map(|(a, b)| CellWord::from_corner(&[a, b], m, n))
        .collect()
}

/// Side through which the line enters the cell, and the relative entrance
/// point `psi = M^n x - a + b beta`.
pub fn classify_entrance(word: &CellWord, m: u32, q: &SliceQuery) -> Result<Entrance> {
    let c = word.corner(m, 2);
    let l = (m as u64)
        .checked_pow(word.level())
        .ok_or_else(|| Error::LevelTooDeep("M^n overflows 64 bits".into()))?;
    let (a, b) = q.direction.symmetry().apply_corner(c[0], c[1], l);
    match (q.direction.slope(), q.x) {
        (Slope::Exact(beta), Offset::Exact(x)) => {
            let (u, v) = (BigInt::from(*beta.numer()), BigInt::from(*beta.denom()));
            let (s, t) = (BigInt::from(*x.numer()), BigInt::from(*x.denom()));
            let (a, b, l) = (BigInt::from(a), BigInt::from(b), BigInt::from(l));
            // psi = num / (v t)
            let num = &s * &v * &l - &a * &v * &t + &b * &u * &t;
            let den = &v * &t;
            if num < -(&u * &t) || num > den {
                return Err(Error::Domain("cell does not meet the line".into()));
            }
            let psi = num_rational::BigRational::new(num.clone(), den)
                .to_f64()
                .unwrap_or(f64::NAN);
            let side = if num.is_negative() { Side::West } else { Side::South };
            Ok(Entrance { side, psi })
        }
        _ => {
            let beta = q.direction.beta();
            let psi = l as f64 * q.x.to_f64() - a as f64 + b as f64 * beta;
            if !(-beta..=1.0).contains(&psi) {
                return Err(Error::Domain("cell does not meet the line".into()));
            }
            let side = if psi >= 0.0 { Side::South } else { Side::West };
            Ok(Entrance { side, psi })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicAverage {
    pub average: f64,
    pub terms: usize,
    /// Row index `k` of each southern cell, in tree order.
    pub rows: Vec<u64>,
    /// Entrance point of each southern cell, in the same order.
    pub entrances: Vec<f64>,
}

struct Southern<'a> {
    m: u32,
    syms: &'a [Sym],
    n: u32,
}

impl KernelUser<Vec<(u64, f64)>> for Southern<'_> {
    fn run<K: Kernel>(self, k: K, root: K::S) -> Result<Vec<(u64, f64)>> {
        let mut out = Vec::new();
        let n = self.n;
        walk(&k, root, self.m, self.syms, n, None, |v| {
            if v.level == n && k.south(v.state) {
                out.push((v.row, k.psi(v.state)));
            }
        })?;
        Ok(out)
    }
}

/// Average of `h` over the southern entrance points of the level-`n`
/// slice cells of the deterministic pattern.
pub fn partial_ergodic_sum(
    h: &GridFunction,
    q: &SliceQuery,
    n: u32,
    pattern: &Pattern,
) -> Result<ErgodicAverage> {
    let tol = 1e-6 * (1.0 + h.sup_norm()) * (h.hi() - h.lo());
    if h.integral().abs() > tol {
        return Err(Error::Precondition(format!(
            "h must have zero mean, integral is {}",
            h.integral()
        )));
    }
    (pattern.m() as u64)
        .checked_pow(n)
        .ok_or_else(|| Error::LevelTooDeep("M^n overflows 64 bits".into()))?;
    let syms = pattern_syms(pattern, q);
    let found = with_kernel(
        q,
        pattern.m(),
        Contact::Interior,
        Southern {
            m: pattern.m(),
            syms: &syms,
            n,
        },
    )?;
    if found.is_empty() {
        return Err(Error::EmptySum("no southern slice cells".into()));
    }
    let sum: f64 = found.iter().map(|&(_, psi)| h.eval(psi)).sum();
    Ok(ErgodicAverage {
        average: sum / found.len() as f64,
        terms: found.len(),
        rows: found.iter().map(|&(r, _)| r).collect(),
        entrances: found.iter().map(|&(_, p)| p).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceDimension {
    pub estimate: f64,
    pub fit: LineFit,
    /// `(n, N_n)` over the regression window.
    pub counts: Vec<(u32, u64)>,
}

/// Least-squares slope of `log N_n` against `n log M` for `n_lo..=n_hi`.
pub fn slice_box_dimension_from_counts(counts: &[u64], m: u32, n_lo: u32, n_hi: u32) -> Result<SliceDimension> {
    if n_lo < 1 || n_hi <= n_lo || counts.len() <= n_hi as usize {
        return Err(Error::Precondition(format!("invalid window {n_lo}..={n_hi}")));
    }
    let window: Vec<(u32, u64)> = (n_lo..=n_hi).map(|k| (k, counts[k as usize])).collect();
    if let Some(&(k, _)) = window.iter().find(|(_, c)| *c == 0) {
        return Err(Error::EmptySum(format!("slice is empty at level {k}")));
    }
    let lm = (m as f64).ln();
    let xs: Vec<f64> = window.iter().map(|&(k, _)| k as f64 * lm).collect();
    let ys: Vec<f64> = window.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys).expect("window has at least two levels");
    Ok(SliceDimension {
        estimate: fit.slope,
        fit,
        counts: window,
    })
}

pub fn slice_box_dimension(
    pattern: &Pattern,
    q: &SliceQuery,
    n_lo: u32,
    n_hi: u32,
) -> Result<SliceDimension> {
    if n_lo < 1 || n_hi <= n_lo {
        return Err(Error::Precondition(format!("invalid window {n_lo}..={n_hi}")));
    }
    let counts = pattern_slice_counts(pattern, q, n_hi)?;
    slice_box_dimension_from_counts(&counts, pattern.m(), n_lo, n_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::direction::Direction;
    use crate::geometry::projection::project_cell_exact;
    use crate::level::sample_level_set;
    use num_rational::BigRational;

    fn q(bn: i64, bd: i64, xn: i64, xd: i64) -> SliceQuery {
        SliceQuery::exact(Direction::exact(bn, bd).unwrap(), xn, xd).unwrap()
    }

    fn brute_count(pattern: &Pattern, query: &SliceQuery, n: u32, contact: Contact) -> usize {
        let ls = sample_level_set(&Pattern::new(pattern.m(), pattern.symbols().to_vec(), 1.0).unwrap().to_params(0).unwrap(), n).unwrap();
        let x = match query.x {
            Offset::Exact(r) => BigRational::new((*r.numer()).into(), (*r.denom()).into()),
            _ => unreachable!(),
        };
        ls.words()
            .filter(|w| {
                let (lo, hi) = project_cell_exact(w, pattern.m(), &query.direction).unwrap();
                match contact {
                    Contact::Interior => lo < x && x < hi,
                    Contact::Closed => lo <= x && x <= hi,
                }
            })
            .count()
    }

    #[test]
    fn full_grid_diagonal() {
        let ls = LevelSet::full(3, 2, 1).unwrap();
        let cells = slice_cells(&ls, &q(1, 1, 0, 1)).unwrap();
        let corners: Vec<Vec<u64>> = cells.iter().map(|w| w.corner(3, 2)).collect();
        assert_eq!(corners, vec![vec![0, 0], vec![1, 1], vec![2, 2]]);
        assert_eq!(pattern_slice_count(&Pattern::full(3, 1.0).unwrap(), &q(1, 1, 0, 1), 1).unwrap(), 3);
    }

    #[test]
    fn sierpinski_closed_contact_at_one_third() {
        let ls = sample_level_set(&PercolationParams::sierpinski_carpet(1.0, 0).unwrap(), 1).unwrap();
        let cells = slice_cells_with(&ls, &q(1, 1, 1, 3), Contact::Closed).unwrap();
        let mut corners: Vec<(u64, u64)> = cells.iter().map(|w| {
            let c = w.corner(3, 2);
            (c[0], c[1])
        }).collect();
        corners.sort();
        assert_eq!(corners, vec![(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]);
    }

    #[test]
    fn empty_and_root() {
        assert!(slice_cells(&LevelSet::empty(3, 2, 3), &q(1, 2, 0, 1)).unwrap().is_empty());
        let pat = Pattern::sierpinski(1.0).unwrap();
        assert_eq!(pattern_slice_count(&pat, &q(1, 2, 1, 5), 0).unwrap(), 1);
    }

    #[test]
    fn sierpinski_diagonal_is_powers_of_two() {
        let pat = Pattern::sierpinski(1.0).unwrap();
        let counts = pattern_slice_counts(&pat, &q(1, 1, 0, 1), 10).unwrap();
        for (n, c) in counts.iter().enumerate() {
            assert_eq!(*c, 1 << n);
        }
    }

    #[test]
    fn pruned_counts_match_brute_force() {
        let pats = [Pattern::sierpinski(1.0).unwrap(), Pattern::cantor(1.0).unwrap(), Pattern::full(3, 1.0).unwrap()];
        let queries = [q(1, 2, 1, 7), q(2, 3, -1, 5), q(1, 1, 1, 3), q(0, 1, 4, 9), q(3, 5, 0, 1)];
        for pat in &pats {
            for query in &queries {
                for contact in [Contact::Interior, Contact::Closed] {
                    let counts = pattern_slice_counts_with(pat, query, 4, contact).unwrap();
                    for n in 0..=4 {
                        assert_eq!(counts[n as usize] as usize, brute_count(pat, query, n, contact));
                    }
                }
            }
        }
    }

    #[test]
    fn bigint_path_matches_i128() {
        let pat = Pattern::sierpinski(1.0).unwrap();
        let small = q(1, 3, 1, 7);
        let big_den = 7 * (1i64 << 40);
        let big = q(1 << 40, 3 * (1i64 << 40), 1 << 40, big_den);
        assert_eq!(
            pattern_slice_counts(&pat, &small, 6).unwrap(),
            pattern_slice_counts(&pat, &big, 6).unwrap()
        );
        // denominators near 2^62 force the BigInt kernel
        let wide = SliceQuery::exact(
            Direction::exact(1 << 61, (1 << 62) - 1).unwrap(),
            (1 << 61) + 1,
            (1 << 62) - 3,
        )
        .unwrap();
        let counts = pattern_slice_counts(&pat, &wide, 4).unwrap();
        for n in 0..=4 {
            assert_eq!(counts[n as usize] as usize, brute_count(&pat, &wide, n, Contact::Interior));
        }
    }

    #[test]
    fn symmetric_directions_match_brute_force() {
        let pat = Pattern::cantor(1.0).unwrap();
        for (num, den) in [(-1, 2), (5, 3), (-7, 2), (1, 0)] {
            let dir = Direction::from_cot(num, den).unwrap();
            let query = SliceQuery::exact(dir, 2, 7).unwrap();
            let counts = pattern_slice_counts(&pat, &query, 4).unwrap();
            for n in 0..=4 {
                assert_eq!(counts[n as usize] as usize, brute_count(&pat, &query, n, Contact::Interior));
            }
        }
    }

    #[test]
    fn realization_counts_match_slice_cells() {
        let params = PercolationParams::homogeneous(2, 3, 0.7, 11).unwrap();
        for query in [q(1, 2, 1, 7), SliceQuery::float(Direction::float(0.37).unwrap(), 0.231).unwrap()] {
            let counts = realization_slice_counts(&params, &query, 5, Contact::Interior).unwrap();
            for n in 0..=5 {
                let ls = sample_level_set(&params, n).unwrap();
                assert_eq!(counts[n as usize] as usize, slice_cells(&ls, &query).unwrap().len());
            }
        }
    }

    #[test]
    fn entrance_examples() {
        let d = Direction::exact(1, 2).unwrap();
        let root = CellWord::root();
        let e = classify_entrance(&root, 3, &SliceQuery::exact(d, 3, 10).unwrap()).unwrap();
        assert_eq!(e.side, Side::South);
        assert!((e.psi - 0.3).abs() < 1e-15);
        let e = classify_entrance(&root, 3, &SliceQuery::exact(d, -1, 4).unwrap()).unwrap();
        assert_eq!(e.side, Side::West);
        assert_eq!(e.psi, -0.25);
        let cell = CellWord::from_corner(&[0, 0], 3, 1).unwrap();
        let e = classify_entrance(&cell, 3, &SliceQuery::exact(d, 1, 10).unwrap()).unwrap();
        assert_eq!(e.side, Side::South);
        assert!((e.psi - 0.3).abs() < 1e-15);
        let far = CellWord::from_corner(&[2, 0], 3, 1).unwrap();
        assert!(classify_entrance(&far, 3, &SliceQuery::exact(d, 1, 10).unwrap()).is_err());
    }

    #[test]
    fn slice_dimension_of_diagonal() {
        let pat = Pattern::sierpinski(1.0).unwrap();
        let dim = slice_box_dimension(&pat, &q(1, 1, 0, 1), 1, 10).unwrap();
        assert!((dim.estimate - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    }
}
