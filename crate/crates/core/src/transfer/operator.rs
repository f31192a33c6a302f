use serde::Serialize;

use super::cantor::cantor_function;
use super::grid::GridFunction;
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::params::PercolationParams;

/// Blow-up guard for normalised iterates.
pub const BLOW_UP_LIMIT: f64 = 1e6;

/// `t -> slope * t + offset` restricted to `support`, which it maps onto
/// `[-beta, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineMap {
    pub slope: f64,
    pub offset: f64,
    pub support: (f64, f64),
}

impl AffineMap {
    #[inline]
    pub fn apply(&self, t: f64) -> f64 {
        self.slope * t + self.offset
    }

    /// `next` applied after `self`, on the part of the support that `self`
    /// maps into the support of `next`.
    pub fn then(&self, next: &AffineMap) -> AffineMap {
        let inv = |y: f64| (y - self.offset) / self.slope;
        AffineMap {
            slope: self.slope * next.slope,
            offset: next.slope * self.offset + next.offset,
            support: (inv(next.support.0), inv(next.support.1)),
        }
    }
}

/// `psi(t) = M^n t - a + b beta` for the level-`n` cell with corner `(a, b)`
/// in the direction's frame.
pub fn psi_map(dir: &Direction, m: u32, corner: (u64, u64), n: u32) -> Result<AffineMap> {
    let side = (m as u64)
        .checked_pow(n)
        .ok_or_else(|| Error::LevelTooDeep("M^n overflows 64 bits".into()))?;
    let (a, b) = corner;
    if a >= side || b >= side {
        return Err(Error::Domain(format!("corner ({a}, {b}) outside level {n}")));
    }
    let beta = dir.beta();
    let s = side as f64;
    Ok(AffineMap {
        slope: s,
        offset: -(a as f64) + b as f64 * beta,
        support: ((a as f64 - (b + 1) as f64 * beta) / s, ((a + 1) as f64 - b as f64 * beta) / s),
    })
}

/// Symbols `(p, i, j)` with positive probability, in the direction's frame.
pub(crate) fn frame_symbols(params: &PercolationParams, dir: &Direction) -> Result<Vec<(f64, u32, u32)>> {
    params.require_planar()?;
    let m = params.m() as u64;
    Ok((0..params.alphabet_size())
        .filter(|&l| params.prob(l) > 0.0)
        .map(|l| {
            let (a, b) = params.letter_xy(l);
            let (i, j) = dir.symmetry().apply_corner(a as u64, b as u64, m);
            (params.prob(l), i as u32, j as u32)
        })
        .collect())
}

fn check_domain(dir: &Direction, g: &GridFunction) -> Result<()> {
    let lo = -dir.beta();
    let tol = 1e-12;
    if (g.lo() - lo).abs() > tol || (g.hi() - 1.0).abs() > tol {
        return Err(Error::Mismatch(format!(
            "grid domain [{}, {}] differs from [{lo}, 1]",
            g.lo(),
            g.hi()
        )));
    }
    Ok(())
}

/// `(F g)(x) = sum_i p_i g(psi_i(x))`, sampled on the grid of `g`.
#[allow(non_snake_case)]
pub fn apply_F(params: &PercolationParams, dir: &Direction, g: &GridFunction) -> Result<GridFunction> {
    check_domain(dir, g)?;
    let syms = frame_symbols(params, dir)?;
    let m = params.m() as f64;
    let beta = dir.beta();
    let shifts: Vec<(f64, f64)> = syms
        .iter()
        .map(|&(p, i, j)| (p, -(i as f64) + j as f64 * beta))
        .collect();
    let values = g
        .nodes()
        .map(|x| {
            let mx = m * x;
            shifts.iter().map(|&(p, c)| p * g.eval(mx + c)).sum()
        })
        .collect();
    GridFunction::new(g.lo(), g.hi(), values)
}

/// `F^r g`.
#[allow(non_snake_case)]
pub fn apply_F_power(
    params: &PercolationParams,
    dir: &Direction,
    g: &GridFunction,
    r: u32,
) -> Result<GridFunction> {
    (0..r).try_fold(g.clone(), |acc, _| apply_F(params, dir, &acc))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iterates {
    pub f: GridFunction,
    /// `||f_{k+1} - f_k||_inf` for `k = 0..n`.
    pub differences: Vec<f64>,
}

/// `f_k = (M / sum p) F f_{k-1}`, `f_0 = g0`.
pub fn normalized_iterate(
    params: &PercolationParams,
    dir: &Direction,
    g0: &GridFunction,
    n: u32,
) -> Result<Iterates> {
    let s = params.mean_offspring();
    if s == 0.0 {
        return Err(Error::EmptySum("all retention probabilities vanish".into()));
    }
    let factor = params.m() as f64 / s;
    let mut f = g0.clone();
    let mut differences = Vec::with_capacity(n as usize);
    for k in 0..n {
        let next = apply_F(params, dir, &f)?.scaled(factor);
        if next.sup_norm() > BLOW_UP_LIMIT {
            return Err(Error::BlowUp(format!("iterate {} exceeds {BLOW_UP_LIMIT}", k + 1)));
        }
        differences.push(next.sup_distance(&f)?);
        f = next;
    }
    Ok(Iterates { f, differences })
}

/// Density of the projected natural measure of the Cantor-like carpet at
/// slope `beta`: rises as `C((x + beta)/beta)`, equals 1 on
/// `[0, 1 - beta)`, falls as `C((1 - x)/beta)`. Integrates to 1.
pub fn cantor_carpet_density(beta: f64, x: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta = {beta} outside (0, 1)")));
    }
    if x < -beta || x > 1.0 {
        Ok(0.0)
    } else if x < 0.0 {
        cantor_function(((x + beta) / beta).clamp(0.0, 1.0))
    } else if x < 1.0 - beta {
        Ok(1.0)
    } else {
        cantor_function(((1.0 - x) / beta).clamp(0.0, 1.0))
    }
}

pub fn closed_form_density_cantor_carpet(dir: &Direction, intervals: usize) -> Result<GridFunction> {
    let beta = dir.beta();
    cantor_carpet_density(beta, 0.0)?;
    let g = GridFunction::on_direction(dir, intervals, |x| cantor_carpet_density(beta, x).unwrap_or(0.0))?;
    Ok(g)
}

/// `||(M / sum p) F f - f||_inf` on the grid.
pub fn eigen_residual(params: &PercolationParams, dir: &Direction, f: &GridFunction) -> Result<f64> {
    let s = params.mean_offspring();
    if s == 0.0 {
        return Err(Error::EmptySum("all retention probabilities vanish".into()));
    }
    let ff = apply_F(params, dir, f)?.scaled(params.m() as f64 / s);
    ff.sup_distance(f)
}
