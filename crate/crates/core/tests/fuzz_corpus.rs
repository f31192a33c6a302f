//! Replays the fuzz corpus seeds through the parsers with the same
//! assertions as the fuzz targets.

use std::path::PathBuf;

use fractal_percolation::cli::pgm::{parse_pgm, to_pgm};
use fractal_percolation::cli::{parse_config, parse_direction};
use fractal_percolation::transfer::GridFunction;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("config_json") {
        if let Ok(cfg) = parse_config(&text) {
            let back = parse_config(&serde_json::to_string(&cfg.raw).unwrap()).unwrap();
            assert_eq!(back.params, cfg.params, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}

#[test]
fn grid_csv_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("grid_csv") {
        if let Ok(g) = GridFunction::from_csv(&text) {
            assert!(g.values().iter().all(|v| v.is_finite()), "{name}");
            assert_eq!(GridFunction::from_csv(&g.to_csv()).unwrap().intervals(), g.intervals());
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}

#[test]
fn pgm_seeds() {
    for (name, text) in seeds("pgm_raster") {
        let grid = parse_pgm(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_pgm(&to_pgm(&grid)).unwrap(), grid);
    }
}

#[test]
fn direction_seeds() {
    for (name, text) in seeds("direction_spec") {
        if let Ok(d) = parse_direction(&text) {
            assert!((0.0..=1.0).contains(&d.beta()), "{name}");
        }
    }
}
