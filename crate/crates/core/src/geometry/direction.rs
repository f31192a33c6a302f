use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PercolationParams;

/// Symmetry of the unit square used to bring a projection direction into
/// the range `alpha in [pi/4, pi/2]`, i.e. `beta = cot(alpha) in [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    Identity,
    /// `(x, y) -> (1 - x, y)`; for `alpha in (pi/2, 3pi/4]`.
    ReflectX,
    /// `(x, y) -> (y, x)`; for `alpha in [0, pi/4)`.
    Swap,
    /// `(x, y) -> (y, 1 - x)`; for `alpha in (3pi/4, pi)`.
    ReflectSwap,
}

impl Symmetry {
    /// Image of an integer corner on a grid of the given side.
    #[inline]
    pub fn apply_corner(self, a: u64, b: u64, side: u64) -> (u64, u64) {
        match self {
            Symmetry::Identity => (a, b),
            Symmetry::ReflectX => (side - 1 - a, b),
            Symmetry::Swap => (b, a),
            Symmetry::ReflectSwap => (b, side - 1 - a),
        }
    }

    /// Probability table as seen in the transformed frame.
    pub fn transform_params(self, params: &PercolationParams) -> Result<PercolationParams> {
        params.require_planar()?;
        let m = params.m() as u64;
        let mut probs = vec![0.0; params.probs().len()];
        for letter in 0..params.alphabet_size() {
            let (i, j) = params.letter_xy(letter);
            let (i2, j2) = self.apply_corner(i as u64, j as u64, m);
            probs[(i2 + m * j2) as usize] = params.prob(letter);
        }
        params.with_probs(probs)
    }
}

/// `beta = cot(alpha)` after normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Slope {
    Exact(Rational64),
    Float(f64),
}

/// A planar projection direction. Points project by
/// `Pi(x, y) = x' - beta * y'` where `(x', y')` is the point after the
/// recorded symmetry, so the unit square projects onto `[-beta, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    slope: Slope,
    symmetry: Symmetry,
}

impl Direction {
    /// Exact direction with `beta = num/den` already in `[0, 1]`.
    pub fn exact(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let beta = Rational64::new(num, den);
        if beta.is_negative() || beta > Rational64::from_integer(1) {
            return Err(Error::Domain(format!("beta = {beta} outside [0, 1]")));
        }
        Ok(Direction {
            slope: Slope::Exact(beta),
            symmetry: Symmetry::Identity,
        })
    }

    pub fn float(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!("beta = {beta} outside [0, 1]")));
        }
        Ok(Direction {
            slope: Slope::Float(beta),
            symmetry: Symmetry::Identity,
        })
    }

    /// Direction whose lines have `cot(alpha) = num/den`; `den = 0` is the
    /// horizontal direction `alpha = 0`.
    pub fn from_cot(num: i64, den: i64) -> Result<Self> {
        let (num, den) = if den < 0 {
            (num.checked_neg(), den.checked_neg())
        } else {
            (Some(num), Some(den))
        };
        let (num, den) = num
            .zip(den)
            .ok_or_else(|| Error::Domain("cot components overflow".into()))?;
        if den == 0 {
            if num == 0 {
                return Err(Error::Domain("cot 0/0 is undefined".into()));
            }
            return Ok(Direction {
                slope: Slope::Exact(Rational64::zero()),
                symmetry: Symmetry::Swap,
            });
        }
        let abs_num = num.unsigned_abs();
        let (symmetry, bn, bd) = if abs_num <= den as u64 {
            let s = if num >= 0 {
                Symmetry::Identity
            } else {
                Symmetry::ReflectX
            };
            (s, abs_num as i64, den)
        } else {
            let s = if num > 0 {
                Symmetry::Swap
            } else {
                Symmetry::ReflectSwap
            };
            let abs = i64::try_from(abs_num)
                .map_err(|_| Error::Domain("cot numerator overflows".into()))?;
            (s, den, abs)
        };
        Ok(Direction {
            slope: Slope::Exact(Rational64::new(bn, bd)),
            symmetry,
        })
    }

    /// Direction of lines making angle `alpha` with the x-axis.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Domain("alpha must be finite".into()));
        }
        let a = alpha.rem_euclid(PI);
        let (symmetry, beta) = if (FRAC_PI_4..=FRAC_PI_2).contains(&a) {
            (Symmetry::Identity, a.cos() / a.sin())
        } else if a > FRAC_PI_2 && a <= 3.0 * FRAC_PI_4 {
            (Symmetry::ReflectX, -a.cos() / a.sin())
        } else if a < FRAC_PI_4 {
            (Symmetry::Swap, a.tan())
        } else {
            (Symmetry::ReflectSwap, -a.tan())
        };
        Ok(Direction {
            slope: Slope::Float(beta.clamp(0.0, 1.0)),
            symmetry,
        })
    }

    pub fn with_symmetry(self, symmetry: Symmetry) -> Self {
        Direction { symmetry, ..self }
    }

    pub fn slope(&self) -> Slope {
        self.slope
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn beta(&self) -> f64 {
        match self.slope {
            Slope::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Slope::Float(b) => b,
        }
    }

    pub fn exact_beta(&self) -> Option<Rational64> {
        match self.slope {
            Slope::Exact(r) => Some(r),
            Slope::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.slope, Slope::Exact(_))
    }

    pub(crate) fn require_exact(&self) -> Result<Rational64> {
        self.exact_beta().ok_or_else(|| {
            Error::Precondition("exact counting requires a rational cot direction".into())
        })
    }

    /// Angle of the projection lines with the x-axis, in `[0, pi)`.
    pub fn alpha(&self) -> f64 {
        let b = self.beta();
        match self.symmetry {
            Symmetry::Identity => (1.0f64).atan2(b),
            Symmetry::ReflectX => PI - (1.0f64).atan2(b),
            Symmetry::Swap => b.atan(),
            Symmetry::ReflectSwap => PI - b.atan(),
        }
    }

    /// Lower end `-beta` of the projection interval.
    pub fn lower(&self) -> f64 {
        -self.beta()
    }
}

/// Offset of a slicing line on the projection interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Offset {
    Exact(Rational64),
    Float(f64),
}

impl Offset {
    pub fn to_f64(self) -> f64 {
        match self {
            Offset::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Offset::Float(x) => x,
        }
    }
}

/// The line `l_alpha(x)`: all points projecting to `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceQuery {
    pub direction: Direction,
    pub x: Offset,
}

impl SliceQuery {
    pub fn new(direction: Direction, x: Offset) -> Result<Self> {
        let inside = match (direction.slope, x) {
            (Slope::Exact(b), Offset::Exact(r)) => r >= -b && r <= Rational64::from_integer(1),
            _ => {
                let v = x.to_f64();
                v >= -direction.beta() && v <= 1.0
            }
        };
        if !inside {
            return Err(Error::Domain(format!(
                "slice offset {} outside [-beta, 1] = [{}, 1]",
                x.to_f64(),
                -direction.beta()
            )));
        }
        Ok(SliceQuery { direction, x })
    }

    pub fn exact(direction: Direction, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Self::new(direction, Offset::Exact(Rational64::new(num, den)))
    }

    pub fn float(direction: Direction, x: f64) -> Result<Self> {
        Self::new(direction, Offset::Float(x))
    }

    pub fn is_exact(&self) -> bool {
        self.direction.is_exact() && matches!(self.x, Offset::Exact(_))
    }
}
