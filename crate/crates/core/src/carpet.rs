//! Thresholds for the randomized Sierpiński carpet and direction scans.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    cantor_approximation, largest_interior_interval, pattern_projection_exact, pattern_slice_counts,
    project_level_set, project_level_set_exact, Direction, Offset, Pattern, SliceQuery,
};
use crate::level::sample_level_set;
use crate::params::PercolationParams;
use crate::rng::{derive_seed, NodeKey};
use crate::transfer::conditions::{DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR};
use crate::stats::{mean, quantile_sorted, sorted, LineFit};
use crate::transfer::{
    check_condition_A, check_condition_B, closed_form_density_cantor_carpet, normalized_iterate,
    trapezoid, ConditionCertificate, Verdict,
};

/// Denominator of the random rational offsets.
pub const DEFAULT_X_DENOMINATOR: i64 = 1_000_003;

/// `count` offsets `k / den` drawn uniformly from the open interval
/// `(-beta, 1)`. Draw `t` uses the key `NodeKey::root(seed).child(t)`.
pub fn random_offsets(dir: &Direction, count: usize, seed: u64, den: i64) -> Result<Vec<SliceQuery>> {
    let beta = dir.require_exact()?;
    if den < 2 {
        return Err(Error::Domain(format!("offset denominator {den} < 2")));
    }
    let lo = (-(*beta.numer() as i128) * den as i128).div_euclid(*beta.denom() as i128) + 1;
    let hi = den as i128 - 1;
    let span = (hi - lo + 1) as u128;
    let root = NodeKey::root(seed);
    (0..count)
        .map(|t| {
            let r = root.child(t as u32).raw() as u128;
            let k = lo + ((r * span) >> 64) as i128;
            SliceQuery::exact(*dir, k as i64, den)
        })
        .collect()
}

/// `log N / (n log m)`, the level-`n` growth exponent of a slice count.
pub fn growth_exponent(count: u64, m: u32, n: u32) -> Option<f64> {
    if count == 0 || n == 0 {
        return None;
    }
    Some((count as f64).ln() / (n as f64 * (m as f64).ln()))
}

/// Inverts `(8/3)(1 - eps) = 3^slope`.
pub fn epsilon_from_slope(slope: f64) -> f64 {
    1.0 - 3f64.powf(slope) * 3.0 / 8.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonEstimate {
    pub median: f64,
    /// Interquartile band `(q25, q75)` of the per-offset values.
    pub band: (f64, f64),
    pub level: u32,
    /// Per-offset `(num, den)`, in sampling order.
    pub offsets: Vec<(i64, i64)>,
    /// `N_{alpha,x,k}` for `k = 0..=level`, one row per offset.
    pub counts: Vec<Vec<u64>>,
    /// Growth exponents; `None` where the slice is empty at `level`.
    pub exponents: Vec<Option<f64>>,
    pub epsilons: Vec<Option<f64>>,
}

impl EpsilonEstimate {
    pub fn median_exponent(&self) -> f64 {
        let v: Vec<f64> = self.exponents.iter().flatten().copied().collect();
        quantile_sorted(&sorted(&v), 0.5)
    }
}

fn require_eight_cell_carpet(pattern: &Pattern) -> Result<()> {
    if pattern.m() != 3 || pattern.len() != 8 {
        return Err(Error::OutOfModel(format!(
            "epsilon_alpha needs an 8-symbol pattern on the 3x3 grid, got {} symbols with M={}",
            pattern.len(),
            pattern.m()
        )));
    }
    Ok(())
}

/// Per-offset `eps` from the level-`n` growth exponent of the deterministic
/// slice count, aggregated by median and interquartile band.
pub fn epsilon_alpha(
    pattern: &Pattern,
    dir: &Direction,
    x_samples: usize,
    n: u32,
    seed: u64,
) -> Result<EpsilonEstimate> {
    require_eight_cell_carpet(pattern)?;
    if n == 0 || x_samples == 0 {
        return Err(Error::Precondition("need n >= 1 and at least one offset".into()));
    }
    let queries = random_offsets(dir, x_samples, seed, DEFAULT_X_DENOMINATOR)?;
    epsilon_alpha_at(pattern, &queries, n)
}

/// [`epsilon_alpha`] on caller-chosen offsets.
pub fn epsilon_alpha_at(pattern: &Pattern, queries: &[SliceQuery], n: u32) -> Result<EpsilonEstimate> {
    require_eight_cell_carpet(pattern)?;
    let counts: Vec<Vec<u64>> = queries
        .par_iter()
        .map(|q| pattern_slice_counts(pattern, q, n))
        .collect::<Result<_>>()?;
    let exponents: Vec<Option<f64>> = counts.iter().map(|c| growth_exponent(c[n as usize], 3, n)).collect();
    let epsilons: Vec<Option<f64>> = exponents.iter().map(|e| e.map(epsilon_from_slope)).collect();
    let finite: Vec<f64> = epsilons.iter().flatten().copied().collect();
    if finite.is_empty() {
        return Err(Error::EmptySum("every sampled slice is empty".into()));
    }
    let s = sorted(&finite);
    let offsets = queries
        .iter()
        .map(|q| match q.x {
            Offset::Exact(r) => (*r.numer(), *r.denom()),
            Offset::Float(_) => unreachable!("exact counting rejected a float offset"),
        })
        .collect();
    Ok(EpsilonEstimate {
        median: quantile_sorted(&s, 0.5),
        band: (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75)),
        level: n,
        offsets,
        counts,
        exponents,
        epsilons,
    })
}

/// `(3/8) / (1 - eps^2)`.
pub fn p_threshold(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    Ok(0.375 / (1.0 - epsilon * epsilon))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub beta: (i64, i64),
    pub symmetry: crate::geometry::Symmetry,
    pub seed: u64,
    pub epsilon: EpsilonEstimate,
    /// `p_threshold` of the median; `None` when the median is not in `(0, 1)`.
    pub p_alpha: Option<f64>,
    /// `p_threshold` at the band ends, where defined.
    pub p_alpha_band: (Option<f64>, Option<f64>),
}

pub fn threshold_report(
    pattern: &Pattern,
    dir: &Direction,
    x_samples: usize,
    n: u32,
    seed: u64,
) -> Result<ThresholdReport> {
    let beta = dir.require_exact()?;
    let epsilon = epsilon_alpha(pattern, dir, x_samples, n, seed)?;
    Ok(ThresholdReport {
        beta: (*beta.numer(), *beta.denom()),
        symmetry: dir.symmetry(),
        seed,
        p_alpha: p_threshold(epsilon.median).ok(),
        p_alpha_band: (p_threshold(epsilon.band.0).ok(), p_threshold(epsilon.band.1).ok()),
        epsilon,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitsCurve {
    pub levels: Vec<u32>,
    pub counts: Vec<u64>,
    /// `N_{alpha,x,k} p^k`.
    pub values: Vec<f64>,
    /// Strictly decreasing over the second half of the window.
    pub eventually_decreasing: bool,
    /// Fit of `log value` against `k`; `None` if some count vanishes.
    pub log_fit: Option<LineFit>,
}

/// The deterministic bound `E #(random slice cells) <= N_{alpha,x,n} p^n`.
pub fn expected_hits_curve(pattern: &Pattern, q: &SliceQuery, p: f64, n_lo: u32, n_hi: u32) -> Result<HitsCurve> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1]")));
    }
    if n_hi <= n_lo {
        return Err(Error::Precondition(format!("invalid window {n_lo}..={n_hi}")));
    }
    let all = pattern_slice_counts(pattern, q, n_hi)?;
    let levels: Vec<u32> = (n_lo..=n_hi).collect();
    let counts: Vec<u64> = levels.iter().map(|&k| all[k as usize]).collect();
    let values: Vec<f64> = levels
        .iter()
        .zip(&counts)
        .map(|(&k, &c)| c as f64 * p.powi(k as i32))
        .collect();
    let half = values.len() / 2;
    let eventually_decreasing = values[half.min(values.len() - 2)..].windows(2).all(|w| w[1] < w[0]);
    let log_fit = if counts.iter().all(|&c| c > 0) {
        let xs: Vec<f64> = levels.iter().map(|&k| k as f64).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        crate::stats::linear_fit(&xs, &ys)
    } else {
        None
    };
    Ok(HitsCurve {
        levels,
        counts,
        values,
        eventually_decreasing,
        log_fit,
    })
}

/// Reduced fractions `a/b` in `[0, 1]` with `b <= max_den`, ascending, as
/// identity-frame directions.
pub fn farey_directions(max_den: i64) -> Result<Vec<Direction>> {
    if max_den < 1 {
        return Err(Error::Domain(format!("max denominator {max_den} < 1")));
    }
    let mut fr: Vec<(i64, i64)> = (1..=max_den)
        .flat_map(|b| (0..=b).map(move |a| (a, b)))
        .filter(|&(a, b)| a.gcd(&b) == 1)
        .collect();
    fr.sort_by(|x, y| (x.0 as i128 * y.1 as i128).cmp(&(y.0 as i128 * x.1 as i128)));
    fr.into_iter().map(|(a, b)| Direction::exact(a, b)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVerdict {
    IntervalLikely,
    ExceptionalLikely,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalStats {
    pub samples: usize,
    pub survived: usize,
    /// Largest interior interval length of each surviving projection.
    pub lengths: Vec<f64>,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Surviving samples whose projection at level `n` is contained in the
    /// level-`n` Cantor approximation; computed only for exact `beta = 0`.
    pub cantor_contained: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanEntry {
    pub beta: f64,
    pub exact_beta: Option<(i64, i64)>,
    pub symmetry: crate::geometry::Symmetry,
    pub alpha: f64,
    pub intervals: IntervalStats,
    pub certificates: Vec<ConditionCertificate>,
    /// Reasons a Condition-B candidate was rejected before checking.
    pub rejected_candidates: Vec<String>,
    /// Total length of the deterministic pattern projection at levels
    /// `1..`, when the table is a pattern.
    pub pattern_projection_lengths: Option<Vec<f64>>,
    /// All surviving samples satisfy the Cantor containment.
    pub exact_containment: bool,
    pub verdict: ScanVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionScan {
    pub params_digest: String,
    pub depth: u32,
    pub seeds: Vec<u64>,
    pub entries: Vec<ScanEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub r_max: u32,
    pub delta: f64,
    pub grid_intervals: usize,
    pub b_iterations: u32,
    pub pattern_levels: u32,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            r_max: 6,
            delta: 0.05,
            grid_intervals: 1024,
            b_iterations: 20,
            pattern_levels: 5,
        }
    }
}

pub(crate) fn is_cantor_frame(params: &PercolationParams, dir: &Direction) -> bool {
    dir.symmetry()
        .transform_params(params)
        .ok()
        .and_then(|t| Pattern::from_params(&t).ok())
        .is_some_and(|p| p.m() == 3 && p.symbols() == [0, 1, 2, 6, 7, 8])
}

fn scan_direction(
    params: &PercolationParams,
    dir: &Direction,
    n: u32,
    seeds: &[u64],
    opts: &ScanOptions,
) -> Result<ScanEntry> {
    let exact_zero = dir.exact_beta().is_some_and(|b| *b.numer() == 0);
    let cantor = if exact_zero { Some(cantor_approximation(n)?) } else { None };
    let mut lengths = Vec::new();
    let mut contained = 0usize;
    for &s in seeds {
        let ls = sample_level_set(&params.with_seed(s), n)?;
        if ls.is_empty() {
            continue;
        }
        lengths.push(largest_interior_interval(&project_level_set(&ls, dir)?).0);
        if let Some(c) = &cantor {
            if project_level_set_exact(&ls, dir)?.is_subset_of(c) == Some(true) {
                contained += 1;
            }
        }
    }
    let srt = sorted(&lengths);
    let survived = lengths.len();
    let intervals = IntervalStats {
        samples: seeds.len(),
        survived,
        mean: (survived > 0).then(|| mean(&lengths)),
        median: (survived > 0).then(|| quantile_sorted(&srt, 0.5)),
        min: srt.first().copied(),
        max: srt.last().copied(),
        cantor_contained: cantor.as_ref().map(|_| contained),
        lengths,
    };

    let mut certificates = Vec::new();
    let mut rejected_candidates = Vec::new();
    certificates.push(check_condition_A(params, dir, opts.r_max, opts.delta, opts.grid_intervals)?);
    let mut candidates = Vec::new();
    if is_cantor_frame(params, dir) && dir.beta() > 0.0 && dir.beta() < 1.0 {
        candidates.push(closed_form_density_cantor_carpet(dir, opts.grid_intervals)?);
    }
    if params.mean_offspring() > 0.0 {
        match normalized_iterate(params, dir, &trapezoid(dir, opts.grid_intervals)?, opts.b_iterations) {
            Ok(it) => candidates.push(it.f),
            Err(e) => rejected_candidates.push(e.to_string()),
        }
    }
    for g in &candidates {
        match check_condition_B(params, dir, g, DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR) {
            Ok(c) => {
                let holds = c.verdict == Verdict::Holds;
                certificates.push(c);
                if holds {
                    break;
                }
            }
            Err(e) => rejected_candidates.push(e.to_string()),
        }
    }

    let pattern_projection_lengths = match Pattern::from_params(params) {
        Ok(p) if dir.is_exact() => Some(
            (1..=opts.pattern_levels.min(n.max(1)))
                .map(|k| pattern_projection_exact(&p, dir, k).map(|u| u.total_length()))
                .collect::<Result<Vec<f64>>>()?,
        ),
        _ => None,
    };
    let exact_containment = survived > 0 && cantor.is_some() && contained == survived;
    let shrinking = pattern_projection_lengths
        .as_ref()
        .is_some_and(|v| v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0]));
    let verdict = if certificates.iter().any(|c| c.verdict == Verdict::Holds) {
        ScanVerdict::IntervalLikely
    } else if exact_containment || shrinking {
        ScanVerdict::ExceptionalLikely
    } else {
        ScanVerdict::Undetermined
    };
    Ok(ScanEntry {
        beta: dir.beta(),
        exact_beta: dir.exact_beta().map(|b| (*b.numer(), *b.denom())),
        symmetry: dir.symmetry(),
        alpha: dir.alpha(),
        intervals,
        certificates,
        rejected_candidates,
        pattern_projection_lengths,
        exact_containment,
        verdict,
    })
}

/// Monte Carlo interval statistics, Condition A/B attempts and a heuristic
/// verdict for each direction. Sample `s` uses `derive_seed(seed, s)`.
pub fn exceptional_scan(
    params: &PercolationParams,
    directions: &[Direction],
    n: u32,
    seeds: usize,
    opts: &ScanOptions,
) -> Result<DirectionScan> {
    params.require_planar()?;
    let seed_list: Vec<u64> = (0..seeds as u64).map(|s| derive_seed(params.seed(), s)).collect();
    let entries = directions
        .par_iter()
        .map(|d| scan_direction(params, d, n, &seed_list, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(DirectionScan {
        params_digest: params.digest(),
        depth: n,
        seeds: seed_list,
        entries,
    })
}
