use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::numfmt::g12;

/// Default number of grid intervals.
pub const DEFAULT_GRID: usize = 4096;

/// Function sampled at `N + 1` equally spaced nodes of `[lo, hi]`, extended
/// by piecewise-linear interpolation inside and by zero outside. Values may
/// be signed; the operator checks nonnegativity where it matters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("invalid grid domain [{lo}, {hi}]")));
        }
        if values.len() < 2 {
            return Err(Error::Domain("grid needs at least two nodes".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite grid value {v}")));
        }
        Ok(GridFunction { lo, hi, values })
    }

    pub fn from_fn(lo: f64, hi: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let step = (hi - lo) / intervals as f64;
        let values = (0..=intervals)
            .map(|k| {
                let x = if k == intervals { hi } else { lo + k as f64 * step };
                f(x)
            })
            .collect();
        Self::new(lo, hi, values)
    }

    /// Function on the projection interval `[-beta, 1]` of `dir`.
    pub fn on_direction(dir: &Direction, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if dir.beta() == 0.0 {
            Self::from_fn(0.0, 1.0, intervals, f)
        } else {
            Self::from_fn(-dir.beta(), 1.0, intervals, f)
        }
    }

    pub fn zeros_like(&self) -> Self {
        GridFunction {
            values: vec![0.0; self.values.len()],
            ..self.clone()
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.intervals() as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.intervals() {
            self.hi
        } else {
            self.lo + k as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|k| self.node(k))
    }

    /// Linear interpolation; zero outside `[lo, hi]`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if !(t >= self.lo && t <= self.hi) {
            return 0.0;
        }
        let n = self.intervals();
        let pos = (t - self.lo) / (self.hi - self.lo) * n as f64;
        let k = (pos.floor() as usize).min(n - 1);
        let w = pos - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    /// Exact integral of the interpolant.
    pub fn integral(&self) -> f64 {
        let inner: f64 = self.values[1..self.intervals()].iter().sum();
        self.step() * (inner + 0.5 * (self.values[0] + self.values[self.intervals()]))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.values.len() == other.values.len()
    }

    fn require_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Mismatch("grid functions live on different grids".into()))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        self.map(|v| a * v)
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.require_same_grid(other)?;
        Ok(GridFunction {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            ..self.clone()
        })
    }

    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.require_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// First 16 hex digits of the SHA-256 of the grid and values.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.lo.to_bits().to_le_bytes());
        h.update(self.hi.to_bits().to_le_bytes());
        for v in &self.values {
            h.update(v.to_bits().to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Two-column CSV `x,value`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (k, v) in self.values.iter().enumerate() {
            out.push_str(&g12(self.node(k)));
            out.push(',');
            out.push_str(&g12(*v));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV layout written by [`GridFunction::to_csv`]. Nodes must
    /// be equally spaced up to the printed precision.
    pub fn from_csv(text: &str) -> Result<GridFunction> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        if header.trim() != "x,value" {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, line) in lines.enumerate() {
            let (x, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected two fields", i + 2)))?;
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse(format!("line {}: bad number {s:?}", i + 2)))
            };
            xs.push(parse(x)?);
            vs.push(parse(v)?);
        }
        if xs.len() < 2 {
            return Err(Error::Parse("CSV needs at least two rows".into()));
        }
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        if !(lo < hi) {
            return Err(Error::Parse("CSV nodes must increase".into()));
        }
        let step = (hi - lo) / (xs.len() - 1) as f64;
        let tol = 1e-9 * (hi - lo).max(1.0);
        for (k, &x) in xs.iter().enumerate() {
            if (x - (lo + k as f64 * step)).abs() > tol {
                return Err(Error::Parse(format!("node {k} at {x} is not on a uniform grid")));
            }
        }
        GridFunction::new(lo, hi, vs).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Projected Lebesgue density of the unit square: rises linearly on
/// `[-beta, 0]`, equals 1 on `[0, 1 - beta]` and falls on `[1 - beta, 1]`.
pub fn trapezoid(dir: &Direction, intervals: usize) -> Result<GridFunction> {
    let b = dir.beta();
    GridFunction::on_direction(dir, intervals, |t| trapezoid_value(b, t))
}

pub fn trapezoid_value(beta: f64, t: f64) -> f64 {
    if beta == 0.0 {
        return if (0.0..=1.0).contains(&t) { 1.0 } else { 0.0 };
    }
    if t < -beta || t > 1.0 {
        0.0
    } else if t < 0.0 {
        (t + beta) / beta
    } else if t <= 1.0 - beta {
        1.0
    } else {
        (1.0 - t) / beta
    }
    .clamp(0.0, 1.0)
}

/// Tent on `[-beta, 1]` peaking at the midpoint, normalised to integral 1.
pub fn tent(dir: &Direction, intervals: usize) -> Result<GridFunction> {
    let lo = if dir.beta() == 0.0 { 0.0 } else { -dir.beta() };
    let len = 1.0 - lo;
    let mid = lo + len / 2.0;
    let h = 2.0 / len;
    GridFunction::on_direction(dir, intervals, |t| (h * (1.0 - (t - mid).abs() / (len / 2.0))).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_integral() {
        let g = GridFunction::new(0.0, 2.0, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.eval(0.5), 0.5);
        assert_eq!(g.eval(1.0), 1.0);
        assert_eq!(g.eval(2.0), 0.0);
        assert_eq!(g.eval(-0.1), 0.0);
        assert_eq!(g.eval(2.1), 0.0);
        assert_eq!(g.integral(), 1.0);
    }

    #[test]
    fn trapezoid_has_unit_integral() {
        for b in [0.0, 0.25, 0.5, 1.0] {
            let d = Direction::float(b).unwrap();
            let g = trapezoid(&d, 4096).unwrap();
            assert!((g.integral() - 1.0).abs() < 1e-6, "beta {b}");
            let t = tent(&d, 4096).unwrap();
            assert!((t.integral() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let d = Direction::exact(1, 2).unwrap();
        let g = tent(&d, 64).unwrap();
        let back = GridFunction::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back.intervals(), 64);
        assert!(g.sup_distance(&back).unwrap() < 1e-11);
        assert_eq!(back.to_csv(), g.to_csv());
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(GridFunction::from_csv("").is_err());
        assert!(GridFunction::from_csv("x,value\n0,1\n").is_err());
        assert!(GridFunction::from_csv("x,value\n0,1\n1,nan\n").is_err());
        assert!(GridFunction::from_csv("x,value\n0,1\n0.3,1\n1,2\n").is_err());
        assert!(GridFunction::from_csv("a,b\n0,1\n1,2\n").is_err());
    }
}
