use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ConditionChoice, RunConfig, StatKind, ValidatedConfig};
use super::pgm::to_pgm;
use super::Command;
use crate::branching::extinction_probability;
use crate::carpet::{exceptional_scan, farey_directions, is_cantor_frame, threshold_report, ScanOptions};
use crate::error::{Error, Result};
use crate::estimators::{
    dimension_conservation_probe, dimension_suite, extinction_frequency, intersection_moment_test, visibility_probe,
};
use crate::geometry::{
    largest_interior_interval, pattern_slice_counts, project_level_set, project_level_set_exact,
    realization_slice_counts, slice_box_dimension, Contact, Direction, Offset, Pattern, RaySide,
};
use crate::level::{raster, sample_conditioned, sample_level_set, LevelSet, DEFAULT_MAX_ATTEMPTS};
use crate::numfmt::g12;
use crate::params::PercolationParams;
use crate::transfer::{
    check_condition_A, check_condition_B, closed_form_density_cantor_carpet, eigen_residual, normalized_iterate,
    trapezoid, GridFunction, DEFAULT_GRID,
};
use crate::transfer::conditions::{DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR};

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Serialize)]
struct Provenance<'a> {
    params_digest: String,
    seed: u64,
    config: &'a RunConfig,
}

fn report<T: Serialize>(command: Command, cfg: &ValidatedConfig, result: &T) -> Result<Vec<u8>> {
    let mut body = serde_json::to_value(result).map_err(|e| Error::Parse(e.to_string()))?;
    let prov = Provenance {
        params_digest: cfg.params.digest(),
        seed: cfg.params.seed(),
        config: &cfg.raw,
    };
    let envelope = json!({
        "command": command.name(),
        "provenance": prov,
    });
    match (&mut body, envelope) {
        (Value::Object(map), Value::Object(env)) => {
            for (k, v) in env {
                map.insert(k, v);
            }
        }
        (_, env) => {
            body = json!({ "command": env["command"], "provenance": env["provenance"], "result": body });
        }
    }
    let mut text = serde_json::to_string_pretty(&body).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn stem(command: Command, cfg: &ValidatedConfig) -> String {
    cfg.raw
        .outputs
        .as_ref()
        .and_then(|o| o.prefix.clone())
        .unwrap_or_else(|| command.name().replace('-', "_"))
}

fn file(name: String, bytes: Vec<u8>) -> OutputFile {
    OutputFile { name, bytes }
}

pub fn execute(command: Command, cfg: &ValidatedConfig, base: &Path) -> Result<Vec<OutputFile>> {
    let s = stem(command, cfg);
    match command {
        Command::Sample => {
            let (ls, seed_used, rejected) = sample(cfg, 4)?;
            let grid = raster(&ls)?;
            let meta = json!({
                "level": ls.level(),
                "cells": ls.len(),
                "side": ls.side(),
                "seed_used": seed_used,
                "rejected": rejected,
            });
            Ok(vec![file(format!("{s}.pgm"), to_pgm(&grid).into_bytes()), json_file(&s, command, cfg, &meta)?])
        }
        Command::Project => {
            let dir = cfg.direction()?;
            let (ls, seed_used, rejected) = sample(cfg, 5)?;
            let union = project_level_set(&ls, &dir)?;
            let (len, at) = largest_interior_interval(&union);
            let exact = if dir.is_exact() { Some(project_level_set_exact(&ls, &dir)?) } else { None };
            let out = json!({
                "level": ls.level(),
                "cells": ls.len(),
                "seed_used": seed_used,
                "rejected": rejected,
                "beta": dir.beta(),
                "symmetry": dir.symmetry(),
                "intervals": union.intervals(),
                "total_length": union.total_length(),
                "largest_interval": { "length": len, "interval": at },
                "exact": exact,
            });
            Ok(vec![json_file(&s, command, cfg, &out)?])
        }
        Command::Slice => {
            let q = cfg.query("slice")?;
            let n = cfg.n(6);
            let counts = realization_slice_counts(&cfg.params, &q, n, Contact::Interior)?;
            let pattern = Pattern::from_params(&cfg.params)
                .ok()
                .map(|p| pattern_slice_counts(&p, &q, n))
                .transpose()?;
            let mut csv = String::from(if pattern.is_some() { "level,realization,pattern\n" } else { "level,realization\n" });
            for k in 0..=n as usize {
                csv.push_str(&format!("{k},{}", counts[k]));
                if let Some(p) = &pattern {
                    csv.push_str(&format!(",{}", p[k]));
                }
                csv.push('\n');
            }
            let out = json!({
                "level": n,
                "x": offset_json(q.x),
                "beta": dir_json(&q.direction),
                "symmetry": q.direction.symmetry(),
                "realization": counts,
                "pattern": pattern,
            });
            Ok(vec![file(format!("{s}.csv"), csv.into_bytes()), json_file(&s, command, cfg, &out)?])
        }
        Command::SliceDim => {
            let q = cfg.query("slice-dim")?;
            let pattern = Pattern::from_params(&cfg.params)?;
            let d = slice_box_dimension(&pattern, &q, cfg.raw.n_lo.unwrap_or(1), cfg.n(10))?;
            Ok(vec![json_file(&s, command, cfg, &d)?])
        }
        Command::Eigen => {
            let dir = cfg.direction()?;
            let grid = cfg.raw.grid.unwrap_or(DEFAULT_GRID);
            let (f, mode, differences) = eigen_candidate(&cfg.params, &dir, grid, cfg.raw.iterations.unwrap_or(60))?;
            let residual = eigen_residual(&cfg.params, &dir, &f)?;
            let out = json!({
                "mode": mode,
                "beta": dir.beta(),
                "symmetry": dir.symmetry(),
                "grid_intervals": f.intervals(),
                "residual": residual,
                "integral": f.integral(),
                "digest": f.digest(),
                "iterate_differences": differences,
            });
            Ok(vec![file(format!("{s}.csv"), f.to_csv().into_bytes()), json_file(&s, command, cfg, &out)?])
        }
        Command::Condition => {
            let dir = cfg.direction()?;
            let grid = cfg.raw.grid.unwrap_or(1024);
            let cert = match cfg.raw.condition.unwrap_or(ConditionChoice::B) {
                ConditionChoice::A => check_condition_A(
                    &cfg.params,
                    &dir,
                    cfg.raw.r_max.unwrap_or(6),
                    cfg.raw.delta.unwrap_or(0.05),
                    grid,
                )?,
                ConditionChoice::B => {
                    let g = match &cfg.raw.candidate_csv {
                        Some(p) => {
                            let path = base.join(p);
                            let text = std::fs::read_to_string(&path)
                                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                            GridFunction::from_csv(&text)?
                        }
                        None => eigen_candidate(&cfg.params, &dir, grid, cfg.raw.iterations.unwrap_or(60))?.0,
                    };
                    check_condition_B(&cfg.params, &dir, &g, DEFAULT_EPS_FLOOR, DEFAULT_POSITIVITY_FLOOR)?
                }
            };
            Ok(vec![json_file(&s, command, cfg, &cert)?])
        }
        Command::Threshold => {
            let dir = cfg.exact_direction("threshold")?;
            let pattern = Pattern::from_params(&cfg.params)?;
            let n = cfg.n(12);
            let r = threshold_report(&pattern, &dir, cfg.raw.x_samples.unwrap_or(50), n, cfg.params.seed())?;
            let mut csv = String::from("x_num,x_den");
            for k in 0..=n {
                csv.push_str(&format!(",N_{k}"));
            }
            csv.push('\n');
            for ((num, den), row) in r.epsilon.offsets.iter().zip(&r.epsilon.counts) {
                csv.push_str(&format!("{num},{den}"));
                for c in row {
                    csv.push_str(&format!(",{c}"));
                }
                csv.push('\n');
            }
            Ok(vec![file(format!("{s}_counts.csv"), csv.into_bytes()), json_file(&s, command, cfg, &r)?])
        }
        Command::Scan => {
            let dirs: Vec<Direction> = match &cfg.raw.directions {
                Some(list) => list.iter().map(|d| d.to_direction()).collect::<Result<_>>()?,
                None => farey_directions(cfg.raw.max_den.unwrap_or(32))?,
            };
            let mut opts = ScanOptions::default();
            if let Some(r) = cfg.raw.r_max {
                opts.r_max = r;
            }
            if let Some(d) = cfg.raw.delta {
                opts.delta = d;
            }
            if let Some(g) = cfg.raw.grid {
                opts.grid_intervals = g;
            }
            let scan = exceptional_scan(&cfg.params, &dirs, cfg.n(5), cfg.raw.replicates.unwrap_or(20), &opts)?;
            let mut csv = String::from("beta,symmetry,verdict,survived,median_largest_interval\n");
            for e in &scan.entries {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    g12(e.beta),
                    enum_name(&e.symmetry)?,
                    enum_name(&e.verdict)?,
                    e.intervals.survived,
                    e.intervals.median.map(g12).unwrap_or_default()
                ));
            }
            Ok(vec![file(format!("{s}.csv"), csv.into_bytes()), json_file(&s, command, cfg, &scan)?])
        }
        Command::Stats => {
            let kinds = cfg.raw.stats.clone().unwrap_or_else(|| vec![StatKind::Dimension]);
            let mut out = serde_json::Map::new();
            for k in kinds {
                let (key, value) = stat(k, cfg)?;
                out.insert(key.into(), value);
            }
            Ok(vec![json_file(&s, command, cfg, &Value::Object(out))?])
        }
        Command::Extinction => {
            let monte_carlo = cfg
                .raw
                .replicates
                .map(|r| extinction_frequency(&cfg.params, cfg.n(25), r))
                .transpose()?;
            let out = json!({
                "q": extinction_probability(&cfg.params),
                "mean_offspring": cfg.params.mean_offspring(),
                "supercritical": cfg.params.supercritical(),
                "monte_carlo": monte_carlo,
            });
            Ok(vec![json_file(&s, command, cfg, &out)?])
        }
    }
}

fn stat(kind: StatKind, cfg: &ValidatedConfig) -> Result<(&'static str, Value)> {
    let p = &cfg.params;
    Ok(match kind {
        StatKind::Dimension => (
            "dimension",
            to_value(&dimension_suite(p, cfg.raw.n_lo.unwrap_or(3), cfg.n(7), cfg.raw.replicates.unwrap_or(200))?)?,
        ),
        StatKind::Moments => {
            if !p.is_homogeneous() || p.d() != 2 {
                return Err(Error::InvalidParams("moment test needs homogeneous planar parameters".into()));
            }
            let r = intersection_moment_test(
                p.prob(0),
                cfg.raw.p_prime.unwrap_or(1.0),
                p.m(),
                cfg.n(5),
                cfg.raw.replicates.unwrap_or(2000),
                p.seed(),
            )?;
            ("moments", to_value(&r)?)
        }
        StatKind::Conservation => {
            let dir = cfg.direction()?;
            let r = dimension_conservation_probe(
                p,
                &dir,
                cfg.n(7),
                cfg.raw.x_samples.unwrap_or(100),
                cfg.raw.replicates.unwrap_or(50),
            )?;
            ("conservation", to_value(&r)?)
        }
        StatKind::Visibility => {
            let r = visibility_probe(
                p,
                cfg.raw.side.unwrap_or(RaySide::Bottom),
                cfg.raw.n_lo.unwrap_or(4),
                cfg.n(8),
                cfg.raw.replicates.unwrap_or(50),
            )?;
            ("visibility", to_value(&r)?)
        }
    })
}

/// Closed-form density for the Cantor-like carpet, otherwise the normalised
/// iterate of the projected square density.
fn eigen_candidate(
    params: &PercolationParams,
    dir: &Direction,
    grid: usize,
    iterations: u32,
) -> Result<(GridFunction, &'static str, Vec<f64>)> {
    if is_cantor_frame(params, dir) && dir.beta() > 0.0 && dir.beta() < 1.0 {
        return Ok((closed_form_density_cantor_carpet(dir, grid)?, "closed-form", Vec::new()));
    }
    let it = normalized_iterate(params, dir, &trapezoid(dir, grid)?, iterations)?;
    Ok((it.f, "iterate", it.differences))
}

fn sample(cfg: &ValidatedConfig, default_n: u32) -> Result<(LevelSet, u64, u32)> {
    let n = cfg.n(default_n);
    if cfg.raw.conditioned.unwrap_or_else(|| cfg.params.supercritical()) {
        let c = sample_conditioned(&cfg.params, n, cfg.raw.max_attempts.unwrap_or(DEFAULT_MAX_ATTEMPTS))?;
        Ok((c.level_set, c.seed_used, c.rejected))
    } else {
        Ok((sample_level_set(&cfg.params, n)?, cfg.params.seed(), 0))
    }
}

fn offset_json(x: Offset) -> Value {
    match x {
        Offset::Exact(r) => json!({ "num": r.numer(), "den": r.denom() }),
        Offset::Float(v) => json!(v),
    }
}

fn dir_json(d: &Direction) -> Value {
    match d.exact_beta() {
        Some(r) => json!({ "num": r.numer(), "den": r.denom() }),
        None => json!(d.beta()),
    }
}

fn enum_name<T: Serialize>(v: &T) -> Result<String> {
    match serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))? {
        Value::String(s) => Ok(s),
        other => Ok(other.to_string()),
    }
}

fn json_file<T: Serialize>(stem: &str, command: Command, cfg: &ValidatedConfig, v: &T) -> Result<OutputFile> {
    Ok(file(format!("{stem}.json"), report(command, cfg, v)?))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}
