//! Numerical certificates for Conditions A and B.
//!
//! Verdicts hold at the stated grid resolution with the stated margin; they
//! are not interval-arithmetic proofs.

use serde::Serialize;

use super::grid::GridFunction;
use super::operator::apply_F;
use crate::error::{Error, Result};
use crate::geometry::{Direction, Symmetry};
use crate::params::PercolationParams;

pub const DEFAULT_EPS_FLOOR: f64 = 0.01;
pub const DEFAULT_POSITIVITY_FLOOR: f64 = 1e-6;
/// Grid cells at each endpoint exempt from the positivity floor.
pub const COLLAR_CELLS: usize = 2;
/// Half-widths of the candidate `I_1`, as fractions of the domain length.
pub const A_LADDER: [f64; 9] = [0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionKind {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCertificate {
    pub kind: ConditionKind,
    pub beta: f64,
    pub symmetry: Symmetry,
    pub i1: Option<(f64, f64)>,
    pub i2: Option<(f64, f64)>,
    pub r: Option<u32>,
    /// A: `min_{I_2} F^r 1_{I_1} - 1`; B: achieved `epsilon`.
    pub margin: f64,
    pub candidate_digest: Option<String>,
    pub epsilon: Option<f64>,
    pub verdict: Verdict,
    pub grid_intervals: usize,
    /// `delta` for A, `epsilon_floor` for B.
    pub safety_margin: f64,
    /// Largest `integral of F^r 1_{I_1}` seen during an A search.
    pub iterate_mass: Option<f64>,
}

/// Searches for `I_1`, `I_2` and `r <= r_max` with `F^r 1_{I_1} >= 1 + delta`
/// on `I_2`. `I_1` runs through a centred ladder; `I_2` is the largest grid
/// interval around the centre on which the bound holds.
#[allow(non_snake_case)]
pub fn check_condition_A(
    params: &PercolationParams,
    dir: &Direction,
    r_max: u32,
    delta: f64,
    intervals: usize,
) -> Result<ConditionCertificate> {
    params.require_planar()?;
    let base = GridFunction::on_direction(dir, intervals, |_| 0.0)?;
    let n = base.intervals();
    let centre = n / 2;
    let mut best_mass: f64 = 0.0;
    let mut best_margin = f64::NEG_INFINITY;
    for &frac in &A_LADDER {
        let half = ((frac * n as f64).round() as usize).max(1);
        if half + 1 >= centre {
            continue;
        }
        let (a, b) = (centre - half, centre + half);
        // the interpolant of this node vector stays below 1_{[x_a, x_b]}
        let values = (0..=n).map(|k| if k > a && k < b { 1.0 } else { 0.0 }).collect();
        let mut g = GridFunction::new(base.lo(), base.hi(), values)?;
        for r in 1..=r_max {
            g = apply_F(params, dir, &g)?;
            best_mass = best_mass.max(g.integral());
            let v = g.values();
            let ok = |k: usize| v[k] >= 1.0 + delta;
            if !ok(centre) {
                continue;
            }
            let (mut l, mut h) = (centre, centre);
            while l > 1 && ok(l - 1) {
                l -= 1;
            }
            while h + 1 < n && ok(h + 1) {
                h += 1;
            }
            let min_on = v[l..=h].iter().cloned().fold(f64::INFINITY, f64::min);
            best_margin = best_margin.max(min_on - 1.0);
            if l < a && h > b {
                return Ok(ConditionCertificate {
                    kind: ConditionKind::A,
                    beta: dir.beta(),
                    symmetry: dir.symmetry(),
                    i1: Some((base.node(a), base.node(b))),
                    i2: Some((base.node(l), base.node(h))),
                    r: Some(r),
                    margin: min_on - 1.0,
                    candidate_digest: None,
                    epsilon: None,
                    verdict: Verdict::Holds,
                    grid_intervals: n,
                    safety_margin: delta,
                    iterate_mass: Some(best_mass),
                });
            }
        }
    }
    Ok(ConditionCertificate {
        kind: ConditionKind::A,
        beta: dir.beta(),
        symmetry: dir.symmetry(),
        i1: None,
        i2: None,
        r: None,
        margin: if best_margin.is_finite() { best_margin } else { -1.0 },
        candidate_digest: None,
        epsilon: None,
        verdict: Verdict::Inconclusive,
        grid_intervals: n,
        safety_margin: delta,
        iterate_mass: Some(best_mass),
    })
}

/// Checks `F g >= (1 + eps_floor) g` at every interior node for a candidate
/// `g` that vanishes at the endpoints and is at least `positivity_floor`
/// away from a collar of [`COLLAR_CELLS`] cells.
#[allow(non_snake_case)]
pub fn check_condition_B(
    params: &PercolationParams,
    dir: &Direction,
    g: &GridFunction,
    eps_floor: f64,
    positivity_floor: f64,
) -> Result<ConditionCertificate> {
    let n = g.intervals();
    let v = g.values();
    if n <= 2 * COLLAR_CELLS {
        return Err(Error::Structural(format!("grid of {n} intervals is too coarse")));
    }
    if v.iter().any(|&x| x < 0.0) {
        return Err(Error::Structural("candidate takes negative values".into()));
    }
    let scale = g.sup_norm();
    if scale == 0.0 {
        return Err(Error::Structural("candidate vanishes identically".into()));
    }
    if v[0] > 1e-12 * scale || v[n] > 1e-12 * scale {
        return Err(Error::Structural("candidate does not vanish at the endpoints".into()));
    }
    if let Some(k) = (COLLAR_CELLS..=n - COLLAR_CELLS).find(|&k| v[k] < positivity_floor) {
        return Err(Error::Structural(format!(
            "candidate below positivity floor {positivity_floor} at x = {}",
            g.node(k)
        )));
    }
    let fg = apply_F(params, dir, g)?;
    let w = fg.values();
    let holds = (1..n).all(|k| w[k] >= (1.0 + eps_floor) * v[k]);
    let eps = (1..n)
        .filter(|&k| v[k] >= positivity_floor)
        .map(|k| w[k] / v[k])
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    Ok(ConditionCertificate {
        kind: ConditionKind::B,
        beta: dir.beta(),
        symmetry: dir.symmetry(),
        i1: None,
        i2: None,
        r: None,
        margin: eps,
        candidate_digest: Some(g.digest()),
        epsilon: Some(eps),
        verdict: if holds { Verdict::Holds } else { Verdict::Fails },
        grid_intervals: n,
        safety_margin: eps_floor,
        iterate_mass: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::grid::{tent, trapezoid};
    use crate::transfer::operator::closed_form_density_cantor_carpet;

    #[test]
    fn zero_params_are_inconclusive() {
        let params = PercolationParams::homogeneous(2, 3, 0.0, 0).unwrap();
        let c = check_condition_A(&params, &Direction::float(0.5).unwrap(), 3, 0.05, 512).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert_eq!(c.iterate_mass, Some(0.0));
    }

    #[test]
    fn homogeneous_condition_a() {
        let params = PercolationParams::homogeneous(2, 3, 0.9, 0).unwrap();
        let c = check_condition_A(&params, &Direction::float(0.6).unwrap(), 5, 0.05, 1024).unwrap();
        assert_eq!(c.verdict, Verdict::Holds);
        let (i1, i2) = (c.i1.unwrap(), c.i2.unwrap());
        assert!(i2.0 < i1.0 && i1.1 < i2.1);
        assert!(-0.6 < i2.0 && i2.1 < 1.0);
        assert!(c.r.unwrap() <= 5);
    }

    #[test]
    fn cantor_carpet_condition_a() {
        let params = PercolationParams::cantor_carpet(0.9, 0).unwrap();
        let c = check_condition_A(&params, &Direction::float(0.5).unwrap(), 5, 0.05, 1024).unwrap();
        assert_eq!(c.verdict, Verdict::Holds);
    }

    #[test]
    fn condition_b_on_eigenfunctions() {
        let d = Direction::float(0.5).unwrap();
        let params = PercolationParams::cantor_carpet(0.75, 0).unwrap();
        let g = closed_form_density_cantor_carpet(&d, 4096).unwrap();
        let c = check_condition_B(&params, &d, &g, DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR).unwrap();
        assert_eq!(c.verdict, Verdict::Holds);
        assert!((c.epsilon.unwrap() - 0.5).abs() < 0.1);

        let d = Direction::float(0.6).unwrap();
        let params = PercolationParams::homogeneous(2, 3, 0.5, 0).unwrap();
        let g = trapezoid(&d, 4096).unwrap();
        let c = check_condition_B(&params, &d, &g, DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR).unwrap();
        assert_eq!(c.verdict, Verdict::Holds);
        assert!((c.epsilon.unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn condition_b_fails_below_dimension_one() {
        let d = Direction::float(0.5).unwrap();
        let params = PercolationParams::homogeneous(2, 3, 0.3, 0).unwrap();
        let g = tent(&d, 1024).unwrap();
        let c = check_condition_B(&params, &d, &g, DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR).unwrap();
        assert_eq!(c.verdict, Verdict::Fails);
        assert!(c.epsilon.unwrap() < 0.0);
    }

    #[test]
    fn structural_errors_are_distinct() {
        let d = Direction::float(0.5).unwrap();
        let params = PercolationParams::homogeneous(2, 3, 0.5, 0).unwrap();
        let flat = GridFunction::on_direction(&d, 64, |_| 1.0).unwrap();
        assert!(matches!(
            check_condition_B(&params, &d, &flat, 0.01, 1e-6),
            Err(Error::Structural(_))
        ));
        let neg = tent(&d, 64).unwrap().scaled(-1.0);
        assert!(matches!(check_condition_B(&params, &d, &neg, 0.01, 1e-6), Err(Error::Structural(_))));
        let hole = tent(&d, 64).unwrap().map(|v| if v > 1.0 { 0.0 } else { v });
        assert!(matches!(check_condition_B(&params, &d, &hole, 0.01, 1e-6), Err(Error::Structural(_))));
    }
}
