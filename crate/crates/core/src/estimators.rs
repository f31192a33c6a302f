//! Dimension regressions, projected-measure histograms and Monte Carlo
//! property probes.

use rayon::prelude::*;
use serde::Serialize;

use crate::branching::{count_variance, expected_dimension};
use crate::error::{Error, Result};
use crate::geometry::{
    project_level_set, realization_slice_counts, visible_first_hit, Contact, Direction, RaySide, SliceQuery,
    Symmetry,
};
use crate::level::{
    intersect_level_sets, level_counts, raster, sample_conditioned, sample_level_set, sample_levels,
    LevelSet, DEFAULT_MAX_ATTEMPTS,
};
use crate::params::PercolationParams;
use crate::rng::{derive_seed, NodeKey};
use crate::stats::{linear_fit, mean, variance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionFit {
    pub levels: Vec<u32>,
    pub log_counts: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r_squared: f64,
}

/// Least-squares slope of `log count` against `level * log m`.
pub fn box_counting_dimension(counts: &[(u32, u64)], m: u32) -> Result<DimensionFit> {
    if counts.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 levels, got {}", counts.len())));
    }
    if counts.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Precondition("levels must be strictly increasing".into()));
    }
    if let Some(&(k, _)) = counts.iter().find(|(_, c)| *c == 0) {
        return Err(Error::EmptySum(format!("zero count at level {k}")));
    }
    let lm = (m as f64).ln();
    let xs: Vec<f64> = counts.iter().map(|&(k, _)| k as f64 * lm).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys).expect("at least three points");
    Ok(DimensionFit {
        levels: counts.iter().map(|&(k, _)| k).collect(),
        log_counts: ys,
        slope: fit.slope,
        intercept: fit.intercept,
        stderr: fit.slope_stderr,
        r_squared: fit.r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionSuite {
    pub params_digest: String,
    pub n_lo: u32,
    pub n_hi: u32,
    pub expected: Option<f64>,
    pub seeds_used: Vec<u64>,
    pub rejected: Vec<u32>,
    pub fits: Vec<DimensionFit>,
    pub mean_slope: f64,
}

/// Box-counting fits of `samples` realizations conditioned on survival to
/// `n_hi`. Replicate `s` starts from `derive_seed(params.seed(), s)`.
pub fn dimension_suite(params: &PercolationParams, n_lo: u32, n_hi: u32, samples: usize) -> Result<DimensionSuite> {
    let runs: Vec<(u64, u32, DimensionFit)> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let p = params.with_seed(derive_seed(params.seed(), s));
            let c = sample_conditioned(&p, n_hi, DEFAULT_MAX_ATTEMPTS)?;
            let counts = level_counts(&params.with_seed(c.seed_used), n_hi)?;
            let window: Vec<(u32, u64)> = (n_lo..=n_hi).map(|k| (k, counts[k as usize])).collect();
            Ok((c.seed_used, c.rejected, box_counting_dimension(&window, params.m())?))
        })
        .collect::<Result<_>>()?;
    let slopes: Vec<f64> = runs.iter().map(|r| r.2.slope).collect();
    Ok(DimensionSuite {
        params_digest: params.digest(),
        n_lo,
        n_hi,
        expected: expected_dimension(params).value(),
        seeds_used: runs.iter().map(|r| r.0).collect(),
        rejected: runs.iter().map(|r| r.1).collect(),
        mean_slope: mean(&slopes),
        fits: runs.into_iter().map(|r| r.2).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityHistogram {
    pub beta: f64,
    pub symmetry: Symmetry,
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub level: u32,
    pub cells: usize,
    pub params_digest: String,
}

impl DensityHistogram {
    /// Mass divided by bin width.
    pub fn densities(&self) -> Vec<f64> {
        self.masses
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, e)| m / (e[1] - e[0]))
            .collect()
    }
}

fn projection_domain(dir: &Direction) -> (f64, f64) {
    if dir.beta() == 0.0 {
        (0.0, 1.0)
    } else {
        (-dir.beta(), 1.0)
    }
}

/// Uniform mass `1/#cells` per retained cell, spread uniformly over its
/// projected interval and binned by exact overlap.
pub fn projected_density_histogram(ls: &LevelSet, dir: &Direction, bins: usize) -> Result<DensityHistogram> {
    if ls.d() != 2 {
        return Err(Error::Precondition("histograms need d = 2".into()));
    }
    if ls.is_empty() {
        return Err(Error::EmptySum("empty level set".into()));
    }
    if bins == 0 {
        return Err(Error::Domain("need at least one bin".into()));
    }
    let (lo, hi) = projection_domain(dir);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + k as f64 * width })
        .collect();
    let side = ls.side();
    let l = side as f64;
    let beta = dir.beta();
    let sym = dir.symmetry();
    let mut acc = vec![0.0f64; bins];
    for (a, b) in ls.corners_2d() {
        let (a, b) = sym.apply_corner(a, b, side);
        let (x0, x1) = ((a as f64 - (b as f64 + 1.0) * beta) / l, (a as f64 + 1.0 - b as f64 * beta) / l);
        let len = x1 - x0;
        let k0 = (((x0 - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        let k1 = (((x1 - lo) / width).ceil().max(1.0) as usize).min(bins);
        for (k, slot) in acc.iter_mut().enumerate().take(k1).skip(k0) {
            let ov = x1.min(edges[k + 1]) - x0.max(edges[k]);
            if ov > 0.0 {
                *slot += ov / len;
            }
        }
    }
    let total: f64 = acc.iter().sum();
    Ok(DensityHistogram {
        beta,
        symmetry: sym,
        edges,
        masses: acc.into_iter().map(|v| v / total).collect(),
        level: ls.level(),
        cells: ls.len(),
        params_digest: ls.params_digest().to_string(),
    })
}

pub const CONSERVATION_EPSILONS: [f64; 2] = [0.1, 0.2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub params_digest: String,
    pub beta: f64,
    pub symmetry: Symmetry,
    pub level: u32,
    pub expected_dimension: f64,
    pub seeds_used: Vec<u64>,
    /// `(seed index, x, slope)` per sampled slice.
    pub slices: Vec<(usize, f64, f64)>,
    /// `(eps, fraction of slices with slope >= dim - 1 - eps)`.
    pub fractions: Vec<(f64, f64)>,
}

/// Slice dimensions along random lines through surviving realizations. The
/// offsets are uniform on the level-`n` projection, so each line meets
/// `E_n`; slopes regress slice counts of the realization over levels
/// `1..=n`.
pub fn dimension_conservation_probe(
    params: &PercolationParams,
    dir: &Direction,
    n: u32,
    x_samples: usize,
    seeds: usize,
) -> Result<ConservationReport> {
    params.require_planar()?;
    let s = params.mean_offspring();
    if s <= params.m() as f64 {
        return Err(Error::Precondition(format!(
            "expected dimension must exceed 1 (sum p = {s} <= M = {})",
            params.m()
        )));
    }
    if n < 2 {
        return Err(Error::Precondition("need n >= 2".into()));
    }
    let dim = expected_dimension(params).value().expect("supercritical");
    let runs: Vec<(u64, Vec<(f64, f64)>)> = (0..seeds as u64)
        .into_par_iter()
        .map(|r| {
            let p = params.with_seed(derive_seed(params.seed(), r));
            let c = sample_conditioned(&p, n, DEFAULT_MAX_ATTEMPTS)?;
            let real = params.with_seed(c.seed_used);
            let proj = project_level_set(&c.level_set, dir)?;
            let total = proj.total_length();
            let key = NodeKey::root(c.seed_used).child(u32::MAX);
            let mut out = Vec::with_capacity(x_samples);
            for t in 0..x_samples {
                let mut u = key.child(t as u32).draw() * total;
                let mut x = proj.intervals()[proj.len() - 1].1;
                for &(a, b) in proj.intervals() {
                    if u < b - a {
                        x = a + u;
                        break;
                    }
                    u -= b - a;
                }
                let q = SliceQuery::float(*dir, x)?;
                let counts = realization_slice_counts(&real, &q, n, Contact::Interior)?;
                let window: Vec<(u32, u64)> = (1..=n).map(|k| (k, counts[k as usize])).collect();
                let slope = if window.iter().all(|w| w.1 > 0) {
                    let lm = (params.m() as f64).ln();
                    let xs: Vec<f64> = window.iter().map(|w| w.0 as f64 * lm).collect();
                    let ys: Vec<f64> = window.iter().map(|w| (w.1 as f64).ln()).collect();
                    linear_fit(&xs, &ys).expect("n >= 2").slope
                } else {
                    f64::NEG_INFINITY
                };
                out.push((x, slope));
            }
            Ok((c.seed_used, out))
        })
        .collect::<Result<_>>()?;
    let slices: Vec<(usize, f64, f64)> = runs
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.1.iter().map(move |&(x, s)| (i, x, s)))
        .collect();
    let fractions = CONSERVATION_EPSILONS
        .iter()
        .map(|&e| {
            let ok = slices.iter().filter(|s| s.2 >= dim - 1.0 - e).count();
            (e, ok as f64 / slices.len().max(1) as f64)
        })
        .collect();
    Ok(ConservationReport {
        params_digest: params.digest(),
        beta: dir.beta(),
        symmetry: dir.symmetry(),
        level: n,
        expected_dimension: dim,
        seeds_used: runs.iter().map(|r| r.0).collect(),
        slices,
        fractions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub m: u32,
    pub p: f64,
    pub p_prime: f64,
    pub level: u32,
    pub replicates: usize,
    pub seed: u64,
    pub counts: Vec<u64>,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub expected_mean: f64,
    pub expected_variance: f64,
    /// `(mean - expected) / sqrt(expected_variance / R)`.
    pub z_mean: f64,
    /// `(mean - expected) / (sample sd / sqrt R)`.
    pub z_mean_empirical: f64,
    /// `(variance - expected) / se`, with `se` from the sample fourth moment.
    pub z_variance: f64,
    pub implied_dimension: f64,
}

/// Cell counts of `E(p) ∩ E(p')` from independent realizations, compared
/// with the branching process of retention `p p'`. Pair `r` uses seeds
/// `derive_seed(seed, 2r + 1)` and `derive_seed(seed, 2r + 2)`.
pub fn intersection_moment_test(
    p: f64,
    p_prime: f64,
    m: u32,
    n: u32,
    replicates: usize,
    seed: u64,
) -> Result<MomentReport> {
    let pp = p * p_prime;
    if !(pp * (m * m) as f64 > 1.0) {
        return Err(Error::Precondition(format!("p p' M^2 = {} must exceed 1", pp * (m * m) as f64)));
    }
    if replicates < 2 {
        return Err(Error::Precondition("need at least two replicates".into()));
    }
    let a = PercolationParams::homogeneous(2, m, p, seed)?;
    let b = PercolationParams::homogeneous(2, m, p_prime, seed)?;
    let joint = PercolationParams::homogeneous(2, m, pp, seed)?;
    let counts: Vec<u64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let ea = sample_level_set(&a.with_seed(derive_seed(seed, 2 * r + 1)), n)?;
            let eb = sample_level_set(&b.with_seed(derive_seed(seed, 2 * r + 2)), n)?;
            Ok(intersect_level_sets(&ea, &eb)?.len() as u64)
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let rf = replicates as f64;
    let mu = joint.mean_offspring().powi(n as i32);
    let var = count_variance(&joint, n);
    let sm = mean(&xs);
    let sv = variance(&xs);
    let m4 = xs.iter().map(|x| (x - sm).powi(4)).sum::<f64>() / rf;
    let se_var = ((m4 - sv * sv * (rf - 3.0) / (rf - 1.0)) / rf).max(0.0).sqrt();
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    Ok(MomentReport {
        m,
        p,
        p_prime,
        level: n,
        replicates,
        seed,
        sample_mean: sm,
        sample_variance: sv,
        expected_mean: mu,
        expected_variance: var,
        z_mean: ratio(sm - mu, (var / rf).sqrt()),
        z_mean_empirical: ratio(sm - mu, (sv / rf).sqrt()),
        z_variance: ratio(sv - var, se_var),
        implied_dimension: (pp * (m * m) as f64).ln() / (m as f64).ln(),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionFrequency {
    pub level: u32,
    pub replicates: usize,
    pub extinct: usize,
    pub frequency: f64,
    /// Binomial standard error of `frequency`.
    pub stderr: f64,
    pub analytic: f64,
}

/// Fraction of realizations with `E_n` empty. Replicate `r` uses
/// `derive_seed(params.seed(), r)`.
pub fn extinction_frequency(params: &PercolationParams, n: u32, replicates: usize) -> Result<ExtinctionFrequency> {
    if replicates == 0 {
        return Err(Error::Precondition("need at least one replicate".into()));
    }
    let dead: Vec<bool> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| Ok(level_counts(&params.with_seed(derive_seed(params.seed(), r)), n)?[n as usize] == 0))
        .collect::<Result<_>>()?;
    let extinct = dead.iter().filter(|&&d| d).count();
    let f = extinct as f64 / replicates as f64;
    Ok(ExtinctionFrequency {
        level: n,
        replicates,
        extinct,
        frequency: f,
        stderr: (f * (1.0 - f) / replicates as f64).sqrt(),
        analytic: crate::branching::extinction_probability(params),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityReport {
    pub params_digest: String,
    pub side: RaySide,
    pub n_lo: u32,
    pub n_hi: u32,
    pub seeds_used: Vec<u64>,
    pub fits: Vec<DimensionFit>,
    pub mean_slope: f64,
}

/// Dimension regression of the first-hit set seen from `side`, over
/// realizations conditioned on survival to `n_hi`.
pub fn visibility_probe(
    params: &PercolationParams,
    side: RaySide,
    n_lo: u32,
    n_hi: u32,
    samples: usize,
) -> Result<VisibilityReport> {
    params.require_planar()?;
    let runs: Vec<(u64, DimensionFit)> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let p = params.with_seed(derive_seed(params.seed(), s));
            let c = sample_conditioned(&p, n_hi, DEFAULT_MAX_ATTEMPTS)?;
            let levels = sample_levels(&params.with_seed(c.seed_used), n_hi)?;
            let counts = (n_lo..=n_hi)
                .map(|k| Ok((k, visible_first_hit(&raster(&levels[k as usize])?, side).count as u64)))
                .collect::<Result<Vec<_>>>()?;
            Ok((c.seed_used, box_counting_dimension(&counts, params.m())?))
        })
        .collect::<Result<_>>()?;
    let slopes: Vec<f64> = runs.iter().map(|r| r.1.slope).collect();
    Ok(VisibilityReport {
        params_digest: params.digest(),
        side,
        n_lo,
        n_hi,
        seeds_used: runs.iter().map(|r| r.0).collect(),
        mean_slope: mean(&slopes),
        fits: runs.into_iter().map(|r| r.1).collect(),
    })
}
