//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fractal_percolation::carpet::{epsilon_alpha, p_threshold};
use fractal_percolation::estimators::{
    dimension_suite, extinction_frequency, intersection_moment_test, visibility_probe,
};
use fractal_percolation::geometry::{
    cantor_approximation, pattern_slice_count, pattern_slice_counts_with, project_level_set_exact, Contact,
    Direction, Pattern, RaySide, SliceQuery,
};
use fractal_percolation::level::sample_levels;
use fractal_percolation::rng::derive_seed;
use fractal_percolation::transfer::conditions::{DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR};
use fractal_percolation::transfer::{
    apply_F, check_condition_B, closed_form_density_cantor_carpet, eigen_residual, trapezoid, GridFunction,
    Verdict,
};
use fractal_percolation::PercolationParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, detail: String, started: Instant) {
    println!(
        "{} criterion {id:>2} ({name}): {detail} [{:.1} s]",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_dimension_formula() {
    let t = Instant::now();
    let params = PercolationParams::homogeneous(2, 3, 0.7, 0).unwrap();
    let suite = dimension_suite(&params, 3, 7, 200).unwrap();
    let target = 6.3f64.ln() / 3f64.ln();
    let err = (suite.mean_slope - target).abs();
    report(
        1,
        "dimension formula",
        suite.fits.len() == 200 && err <= 0.08,
        format!("mean slope {:.4} vs {target:.4}, |diff| {err:.4} <= 0.08", suite.mean_slope),
        t,
    );
}

fn fixed_point_oracle(p: f64, children: i32) -> f64 {
    // smallest root of s = (1 - p + p s)^children on [0, 1), by bisection
    let f = |s: f64| (1.0 - p + p * s).powi(children) - s;
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_02_extinction() {
    let t = Instant::now();
    let params = PercolationParams::homogeneous(2, 2, 0.3, 0).unwrap();
    let q = fixed_point_oracle(0.3, 4);
    let mc = extinction_frequency(&params, 25, 10_000).unwrap();
    let analytic_ok = (mc.analytic - q).abs() < 1e-9;
    let err = (mc.frequency - q).abs();
    report(
        2,
        "extinction",
        analytic_ok && err <= 0.02,
        format!(
            "analytic {:.6}, oracle {q:.6}, Monte Carlo {:.4} ({} of 10^4), |diff| {err:.4} <= 0.02",
            mc.analytic, mc.frequency, mc.extinct
        ),
        t,
    );
}

#[test]
fn criterion_03_eigenfunction() {
    let t = Instant::now();
    let params = PercolationParams::cantor_carpet(0.75, 0).unwrap();
    let d = Direction::exact(1, 2).unwrap();
    let r = |n| eigen_residual(&params, &d, &closed_form_density_cantor_carpet(&d, n).unwrap()).unwrap();
    let (r1, r2) = (r(4096), r(8192));
    let ratio = r1 / r2;
    report(
        3,
        "eigenfunction",
        r1 <= 0.02 && (ratio - 2.0).abs() <= 0.6,
        format!("residual {r1:.6} at N=4096, {r2:.6} at N=8192, ratio {ratio:.3} in [1.4, 2.6]"),
        t,
    );
}

#[test]
fn criterion_04_condition_b() {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    let carpet = PercolationParams::cantor_carpet(0.75, 0).unwrap();
    for b in [0.3, 0.5, 0.7] {
        let d = Direction::float(b).unwrap();
        let g = closed_form_density_cantor_carpet(&d, 4096).unwrap();
        let c = check_condition_B(&carpet, &d, &g, DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR).unwrap();
        let eps = c.epsilon.unwrap();
        ok &= c.verdict == Verdict::Holds && eps >= 0.4;
        lines.push(format!("carpet beta={b}: {:?} eps={eps:.4}", c.verdict));
    }
    let hom = PercolationParams::homogeneous(2, 3, 0.5, 0).unwrap();
    let d = Direction::float(0.6).unwrap();
    let c = check_condition_B(&hom, &d, &trapezoid(&d, 4096).unwrap(), DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR)
        .unwrap();
    let eps = c.epsilon.unwrap();
    ok &= c.verdict == Verdict::Holds && eps >= 0.4;
    lines.push(format!("homogeneous beta=0.6: {:?} eps={eps:.4}", c.verdict));
    report(4, "Condition B certificates", ok, lines.join("; "), t);
}

/// Independent check: in the swapped frame at `beta = 0` the projection of
/// cell `(a, b)` is `[b/L, (b+1)/L]`, inside the Cantor approximation iff
/// no ternary digit of `b` equals 1.
fn rows_avoid_digit_one(corners: impl Iterator<Item = (u64, u64)>, n: u32) -> bool {
    corners.into_iter().all(|(_, mut b)| {
        (0..n).all(|_| {
            let d = b % 3;
            b /= 3;
            d != 1
        })
    })
}

#[test]
fn criterion_05_exceptional_direction() {
    let t = Instant::now();
    let dir = Direction::from_cot(1, 0).unwrap();
    let mut ok = true;
    let mut checked = 0;
    let mut nonempty = 0;
    for s in 0..100 {
        let params = PercolationParams::cantor_carpet(0.75, derive_seed(0, s)).unwrap();
        let levels = sample_levels(&params, 8).unwrap();
        for (n, ls) in levels.iter().enumerate() {
            let c = cantor_approximation(n as u32).unwrap();
            let proj = project_level_set_exact(ls, &dir).unwrap();
            ok &= proj.is_subset_of(&c) == Some(true);
            ok &= rows_avoid_digit_one(ls.corners_2d(), n as u32);
            checked += 1;
            nonempty += usize::from(!ls.is_empty());
        }
    }
    report(
        5,
        "exceptional direction",
        ok,
        format!("{checked} (seed, level) pairs contained exactly, {nonempty} of them non-empty"),
        t,
    );
}

/// Brute force over all deterministic level-`n` cells with open-cell
/// membership, in exact integers.
fn brute_force_slice(pattern: &Pattern, n: u32, beta: (i64, i64), x: (i64, i64)) -> u64 {
    let m = pattern.m() as i128;
    let l = m.pow(n);
    let (u, v) = (beta.0 as i128, beta.1 as i128);
    let (s, t) = (x.0 as i128, x.1 as i128);
    let syms = pattern.symbols_xy();
    let mut cells = vec![(0i128, 0i128)];
    for _ in 0..n {
        cells = cells
            .iter()
            .flat_map(|&(a, b)| syms.iter().map(move |&(i, j)| (a * m + i as i128, b * m + j as i128)))
            .collect();
    }
    let target = s * v * l;
    cells
        .iter()
        .filter(|&&(a, b)| (a * v - (b + 1) * u) * t < target && target < ((a + 1) * v - b * u) * t)
        .count() as u64
}

#[test]
fn criterion_06_slice_counting() {
    let t = Instant::now();
    let pat = Pattern::sierpinski(1.0).unwrap();
    let diag = SliceQuery::exact(Direction::exact(1, 1).unwrap(), 0, 1).unwrap();
    let mut ok = (0..=10).all(|n| pattern_slice_count(&pat, &diag, n).unwrap() == 1u64 << n);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for _ in 0..25 {
        let v = rng.gen_range(1..=40i64);
        let u = rng.gen_range(0..=v);
        let tden = rng.gen_range(2..=997i64);
        let lo = (-u * tden).div_euclid(v) + 1;
        let s = rng.gen_range(lo..tden);
        let q = SliceQuery::exact(Direction::exact(u, v).unwrap(), s, tden).unwrap();
        let fast = pattern_slice_counts_with(&pat, &q, 6, Contact::Interior).unwrap();
        let g = num_integer::gcd(u, v);
        let h = num_integer::gcd(s, tden).max(1);
        for n in 0..=6 {
            if fast[n as usize] != brute_force_slice(&pat, n, (u / g, v / g), (s / h, tden / h)) {
                mismatches += 1;
            }
        }
    }
    ok &= mismatches == 0;
    report(
        6,
        "slice counting",
        ok,
        format!("diagonal 2^n for n <= 10; {mismatches} mismatches against brute force on 25 random (beta, x), n <= 6"),
        t,
    );
}

#[test]
fn criterion_07_strict_dimension_gap() {
    let t = Instant::now();
    let pat = Pattern::sierpinski(1.0).unwrap();
    let e = epsilon_alpha(&pat, &Direction::exact(1, 1).unwrap(), 50, 12, 0).unwrap();
    let bound = 8f64.ln() / 3f64.ln() - 1.0;
    let med = e.median_exponent();
    let p_alpha = p_threshold(e.median).ok();
    report(
        7,
        "strict dimension gap",
        med < bound && p_alpha.is_some_and(|p| p > 0.375),
        format!(
            "median slice-dimension {med:.5} < {bound:.5}; median eps {:.5}; p_alpha {}",
            e.median,
            p_alpha.map_or("undefined".to_string(), |p| format!("{p:.7} > 0.375"))
        ),
        t,
    );
}

#[test]
fn criterion_08_intersection_coupling() {
    let t = Instant::now();
    let r = intersection_moment_test(0.8, 0.7, 3, 5, 2000, 0).unwrap();
    let target = (9.0f64 * 0.56).powi(5);
    let se = (r.sample_variance / 2000.0).sqrt();
    let z = (r.sample_mean - target) / se;
    report(
        8,
        "intersection coupling",
        z.abs() <= 3.0,
        format!("mean {:.2} vs {target:.2}, SE {se:.2}, z {z:.3}", r.sample_mean),
        t,
    );
}

/// Random piecewise-linear function on `[lo, 1]`: knots at sorted random
/// positions, random nonnegative values, zero outside.
fn random_piecewise(rng: &mut ChaCha8Rng, lo: f64) -> (Vec<(f64, f64)>, f64) {
    let k = rng.gen_range(3..10);
    let mut xs: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..1.0)).collect();
    xs.push(lo);
    xs.push(1.0);
    xs.sort_by(f64::total_cmp);
    let knots: Vec<(f64, f64)> = xs.iter().map(|&x| (x, rng.gen_range(0.0..2.0))).collect();
    let integral = knots.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    (knots, integral)
}

fn eval_knots(knots: &[(f64, f64)], x: f64) -> f64 {
    knots
        .windows(2)
        .find(|w| x >= w[0].0 && x <= w[1].0)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            if len == 0.0 {
                w[0].1
            } else {
                w[0].1 + (w[1].1 - w[0].1) * (x - w[0].0) / len
            }
        })
        .unwrap_or(0.0)
}

#[test]
fn criterion_09_operator_integral_identity() {
    let t = Instant::now();
    let sets = [
        (PercolationParams::homogeneous(2, 3, 0.5, 0).unwrap(), Direction::float(0.6).unwrap()),
        (PercolationParams::cantor_carpet(0.75, 0).unwrap(), Direction::exact(1, 2).unwrap()),
        (
            PercolationParams::planar_from_rows(2, &[vec![0.9, 0.4], vec![0.2, 0.7]], 0).unwrap(),
            Direction::float(0.35).unwrap(),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for (params, d) in &sets {
        let factor = params.mean_offspring() / params.m() as f64;
        for _ in 0..20 {
            let (knots, exact) = random_piecewise(&mut rng, -d.beta());
            let g = GridFunction::on_direction(d, 4096, |x| eval_knots(&knots, x)).unwrap();
            let fg = apply_F(params, d, &g).unwrap();
            worst = worst.max((fg.integral() - factor * exact).abs());
        }
    }
    report(
        9,
        "operator integral identity",
        worst <= 1e-3,
        format!("max |int F g - (sum p / M) int g| = {worst:.2e} over 3 x 20 functions"),
        t,
    );
}

#[test]
fn criterion_10_visibility_probe() {
    let t = Instant::now();
    let params = PercolationParams::homogeneous(2, 3, 0.8, 0).unwrap();
    let r = visibility_probe(&params, RaySide::Bottom, 4, 8, 50).unwrap();
    report(
        10,
        "visibility probe",
        r.fits.len() == 50 && (0.9..=1.1).contains(&r.mean_slope),
        format!("mean first-hit dimension {:.4} in [0.9, 1.1]", r.mean_slope),
        t,
    );
}

fn run_cli(dir: &Path, command: &str, config: &str, jobs: usize) -> Vec<(String, Vec<u8>)> {
    std::fs::create_dir_all(dir).unwrap();
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("out-{jobs}"));
    let status = Command::new(env!("CARGO_BIN_EXE_fracperc"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--jobs")
        .arg(jobs.to_string())
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{command} failed: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_11_reproducibility() {
    let t = Instant::now();
    let carpet = r#"[[0.75,0.75,0.75],[0,0,0],[0.75,0.75,0.75]]"#;
    let suites: Vec<(&str, &str, String)> = vec![
        ("1", "stats", r#"{"params":{"m":3,"probs":0.7},"stats":["dimension"],"n_lo":3,"n":7,"replicates":200}"#.into()),
        ("2", "extinction", r#"{"params":{"m":2,"probs":0.3},"n":25,"replicates":10000}"#.into()),
        ("3", "eigen", format!(r#"{{"params":{{"m":3,"probs":{carpet}}},"direction":{{"cot":{{"num":1,"den":2}}}},"grid":4096}}"#)),
        ("4", "condition", format!(r#"{{"params":{{"m":3,"probs":{carpet}}},"direction":{{"alpha_rad":1.2793395323170296}},"grid":4096}}"#)),
        ("4", "condition", r#"{"params":{"m":3,"probs":0.5},"direction":{"cot":{"num":3,"den":5}},"grid":4096}"#.into()),
        ("5", "scan", format!(r#"{{"params":{{"m":3,"probs":{carpet}}},"directions":[{{"cot":{{"num":1,"den":0}}}}],"n":8,"replicates":100}}"#)),
        ("6", "slice", r#"{"params":{"m":3,"probs":[[1,1,1],[1,0,1],[1,1,1]]},"direction":{"cot":{"num":1,"den":1}},"x":{"num":0,"den":1},"n":10}"#.into()),
        ("7", "threshold", r#"{"params":{"m":3,"probs":[[1,1,1],[1,0,1],[1,1,1]]},"direction":{"cot":{"num":1,"den":1}},"n":12,"x_samples":50}"#.into()),
        ("8", "stats", r#"{"params":{"m":3,"probs":0.8},"stats":["moments"],"p_prime":0.7,"n":5,"replicates":2000}"#.into()),
        ("9", "eigen", r#"{"params":{"m":2,"probs":[[0.9,0.4],[0.2,0.7]]},"direction":{"alpha_rad":1.2341},"grid":4096,"iterations":30}"#.into()),
        ("10", "stats", r#"{"params":{"m":3,"probs":0.8},"stats":["visibility"],"n_lo":4,"n":8,"replicates":50}"#.into()),
    ];
    let jobs = 4;
    let mut failures = Vec::new();
    for (id, command, config) in &suites {
        let tmp = tempfile::tempdir().unwrap();
        let a = run_cli(tmp.path(), command, config, 1);
        let b = run_cli(tmp.path(), command, config, jobs);
        if a.is_empty() || a != b {
            failures.push(format!("suite {id} ({command})"));
        }
    }
    let ok = failures.is_empty();
    report(
        11,
        "reproducibility",
        ok,
        if ok {
            format!("{} CLI suites byte-identical across --jobs 1 and --jobs {jobs}", suites.len())
        } else {
            format!("outputs differ for {}", failures.join(", "))
        },
        t,
    );
}
