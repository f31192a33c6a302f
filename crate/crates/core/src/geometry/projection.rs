use num_bigint::BigInt;
use num_rational::BigRational;

use super::direction::{Direction, Slope};
use super::interval::{ExactUnion, IntervalUnion};
use super::pattern::Pattern;
use crate::error::{Error, Result};
use crate::level::LevelSet;
use crate::word::CellWord;

/// Upper bound on the number of components tracked when projecting a
/// deterministic pattern.
pub const PATTERN_PROJECTION_CAP: usize = 1 << 20;

fn transformed_corner(word: &CellWord, m: u32, dir: &Direction) -> (u64, u64, u64) {
    let c = word.corner(m, 2);
    let side = (m as u64).pow(word.level());
    let (a, b) = dir.symmetry().apply_corner(c[0], c[1], side);
    (a, b, side)
}

/// Projected interval `[(a - (b+1) beta) / M^n, (a + 1 - b beta) / M^n]` of
/// the cell addressed by `word`, with `(a, b)` its corner after the
/// direction's symmetry.
pub fn project_cell(word: &CellWord, m: u32, dir: &Direction) -> (f64, f64) {
    let (a, b, side) = transformed_corner(word, m, dir);
    let beta = dir.beta();
    let s = side as f64;
    (
        (a as f64 - (b + 1) as f64 * beta) / s,
        ((a + 1) as f64 - b as f64 * beta) / s,
    )
}

/// Exact variant of [`project_cell`].
pub fn project_cell_exact(
    word: &CellWord,
    m: u32,
    dir: &Direction,
) -> Result<(BigRational, BigRational)> {
    let beta = dir.require_exact()?;
    let (a, b, side) = transformed_corner(word, m, dir);
    let u = BigInt::from(*beta.numer());
    let v = BigInt::from(*beta.denom());
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    let scale = &v * BigInt::from(side);
    let lo = &a * &v - (&b + 1) * &u;
    let hi = (&a + 1) * &v - &b * &u;
    Ok((
        BigRational::new(lo, scale.clone()),
        BigRational::new(hi, scale),
    ))
}

fn require_planar(ls: &LevelSet) -> Result<()> {
    if ls.d() != 2 {
        return Err(Error::Precondition(format!(
            "projection requires d = 2, got d = {}",
            ls.d()
        )));
    }
    Ok(())
}

/// Union of the projected cells of a planar level set.
pub fn project_level_set(ls: &LevelSet, dir: &Direction) -> Result<IntervalUnion<f64>> {
    require_planar(ls)?;
    let side = ls.side();
    let s = side as f64;
    let beta = dir.beta();
    let sym = dir.symmetry();
    let v = ls
        .corners_2d()
        .map(|(a, b)| {
            let (a, b) = sym.apply_corner(a, b, side);
            (
                (a as f64 - (b + 1) as f64 * beta) / s,
                ((a + 1) as f64 - b as f64 * beta) / s,
            )
        })
        .collect();
    Ok(IntervalUnion::from_intervals(v))
}

/// Exact projection with endpoints over the common scale `den(beta) * M^n`.
pub fn project_level_set_exact(ls: &LevelSet, dir: &Direction) -> Result<ExactUnion> {
    require_planar(ls)?;
    let beta = dir.require_exact()?;
    let u = *beta.numer() as i128;
    let v = *beta.denom() as i128;
    let side = ls.side();
    let scale = v
        .checked_mul(side as i128)
        .filter(|s| s.checked_mul(4).is_some())
        .ok_or_else(|| Error::LevelTooDeep("exact projection scale overflows 128 bits".into()))?;
    let sym = dir.symmetry();
    let v_ivs = ls
        .corners_2d()
        .map(|(a, b)| {
            let (a, b) = sym.apply_corner(a, b, side);
            let (a, b) = (a as i128, b as i128);
            (a * v - (b + 1) * u, (a + 1) * v - b * u)
        })
        .collect();
    Ok(ExactUnion {
        scale,
        union: IntervalUnion::from_intervals(v_ivs),
    })
}

/// Level-`n` approximation of the middle-thirds Cantor set, over scale `3^n`.
pub fn cantor_approximation(n: u32) -> Result<ExactUnion> {
    let scale = 3i128
        .checked_pow(n)
        .filter(|_| n <= 40)
        .ok_or_else(|| Error::LevelTooDeep(format!("Cantor approximation at n = {n}")))?;
    let mut starts = vec![0i128];
    for k in 0..n {
        let step = 2 * 3i128.pow(n - k - 1);
        starts = starts.iter().flat_map(|&s| [s, s + step]).collect();
    }
    Ok(ExactUnion {
        scale,
        union: IntervalUnion::from_intervals(starts.into_iter().map(|s| (s, s + 1)).collect()),
    })
}

/// Exact projection of the deterministic level-`n` pattern set, built on
/// the interval union rather than on individual cells.
pub fn pattern_projection_exact(pattern: &Pattern, dir: &Direction, n: u32) -> Result<ExactUnion> {
    let beta = match dir.slope() {
        Slope::Exact(b) => b,
        Slope::Float(_) => return Err(Error::Precondition("exact direction required".into())),
    };
    let u = *beta.numer() as i128;
    let v = *beta.denom() as i128;
    let m = pattern.m() as i128;
    let offsets: Vec<i128> = pattern
        .symbols_xy()
        .into_iter()
        .map(|(i, j)| {
            let (i, j) = dir.symmetry().apply_corner(i as u64, j as u64, pattern.m() as u64);
            i as i128 * v - j as i128 * u
        })
        .collect();
    let overflow = || Error::LevelTooDeep("pattern projection scale overflows 128 bits".into());
    let mut scale = v;
    let mut union = IntervalUnion::from_intervals(vec![(-u, v)]);
    let mut unit = 1i128;
    for _ in 0..n {
        let ivs: Vec<(i128, i128)> = offsets
            .iter()
            .flat_map(|&o| {
                let shift = o * unit;
                union.intervals().iter().map(move |&(a, b)| (a + shift, b + shift))
            })
            .collect();
        union = IntervalUnion::from_intervals(ivs);
        if union.len() > PATTERN_PROJECTION_CAP {
            return Err(Error::LevelTooDeep(format!(
                "pattern projection has more than {PATTERN_PROJECTION_CAP} components"
            )));
        }
        scale = scale.checked_mul(m).filter(|s| s.checked_mul(4 * m).is_some()).ok_or_else(overflow)?;
        unit = unit.checked_mul(m).ok_or_else(overflow)?;
    }
    Ok(ExactUnion { scale, union })
}
