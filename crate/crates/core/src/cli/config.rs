use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Direction, Offset, RaySide, SliceQuery};
use crate::params::{validate_params, PercolationParams, RawParams};

/// Probability table: one number for a homogeneous table, a flat list in
/// letter order, or a planar matrix of rows listed bottom row first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbsSpec {
    Scalar(f64),
    Flat(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

fn default_d() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default = "default_d")]
    pub d: u32,
    pub m: u32,
    pub probs: ProbsSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fraction {
    pub num: i64,
    pub den: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionSpec {
    /// `cot(alpha) = num/den`; `den = 0` is the horizontal direction.
    Cot(Fraction),
    AlphaRad(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OffsetSpec {
    Exact(Fraction),
    Float(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    Dimension,
    Moments,
    Conservation,
    Visibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionChoice {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// File name stem shared by every output of the run.
    #[serde(default)]
    pub prefix: Option<String>,
}

/// A run configuration as read from JSON. Every field except `params` is
/// optional and has a per-subcommand default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_lo: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<DirectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<DirectionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<OffsetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_den: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<Vec<StatKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<RaySide>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioned: Option<bool>,
    /// Rejection cap for conditioned sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputSpec>,
}

impl ParamsSpec {
    pub fn to_raw(&self) -> Result<RawParams> {
        let probs = match &self.probs {
            ProbsSpec::Scalar(p) => {
                let size = (self.m as u64)
                    .checked_pow(self.d)
                    .filter(|&s| s <= 1 << 24)
                    .ok_or_else(|| Error::InvalidParams(format!("alphabet {}^{} too large", self.m, self.d)))?;
                vec![*p; size as usize]
            }
            ProbsSpec::Flat(v) => v.clone(),
            ProbsSpec::Matrix(rows) => {
                if self.d != 2 {
                    return Err(Error::InvalidParams("a probability matrix needs d = 2".into()));
                }
                if rows.len() != self.m as usize || rows.iter().any(|r| r.len() != self.m as usize) {
                    return Err(Error::InvalidParams(format!("probability matrix must be {0}x{0}", self.m)));
                }
                rows.concat()
            }
        };
        Ok(RawParams {
            d: self.d,
            m: self.m,
            probs,
            seed: self.seed,
        })
    }

    pub fn validate(&self) -> Result<PercolationParams> {
        validate_params(&self.to_raw()?)
    }
}

impl DirectionSpec {
    pub fn to_direction(&self) -> Result<Direction> {
        match *self {
            DirectionSpec::Cot(f) => Direction::from_cot(f.num, f.den),
            DirectionSpec::AlphaRad(a) => Direction::from_alpha(a),
        }
    }
}

impl OffsetSpec {
    pub fn to_offset(&self) -> Result<Offset> {
        match *self {
            OffsetSpec::Exact(f) => {
                if f.den == 0 {
                    return Err(Error::Domain("offset denominator is zero".into()));
                }
                let (n, d) = if f.den < 0 {
                    (f.num.checked_neg(), f.den.checked_neg())
                } else {
                    (Some(f.num), Some(f.den))
                };
                let (n, d) = n.zip(d).ok_or_else(|| Error::Domain("offset overflows".into()))?;
                Ok(Offset::Exact(num_rational::Rational64::new(n, d)))
            }
            OffsetSpec::Float(x) if x.is_finite() => Ok(Offset::Float(x)),
            OffsetSpec::Float(x) => Err(Error::Domain(format!("offset {x} is not finite"))),
        }
    }
}

/// A configuration whose parameters and direction passed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    pub raw: RunConfig,
    pub params: PercolationParams,
    pub direction: Option<Direction>,
}

impl ValidatedConfig {
    pub fn direction(&self) -> Result<Direction> {
        self.direction
            .ok_or_else(|| Error::InvalidParams("this subcommand needs a \"direction\"".into()))
    }

    pub fn exact_direction(&self, command: &str) -> Result<Direction> {
        let d = self.direction()?;
        if !d.is_exact() {
            return Err(Error::InvalidParams(format!(
                "`{command}` counts cells exactly and needs a rational direction {{\"cot\": {{\"num\", \"den\"}}}}, not alpha_rad"
            )));
        }
        Ok(d)
    }

    pub fn query(&self, command: &str) -> Result<SliceQuery> {
        let d = self.exact_direction(command)?;
        let x = self
            .raw
            .x
            .ok_or_else(|| Error::InvalidParams("this subcommand needs an offset \"x\"".into()))?
            .to_offset()?;
        if !matches!(x, Offset::Exact(_)) {
            return Err(Error::InvalidParams(format!(
                "`{command}` counts cells exactly and needs a rational offset {{\"num\", \"den\"}}"
            )));
        }
        SliceQuery::new(d, x)
    }

    pub fn n(&self, default: u32) -> u32 {
        self.raw.n.unwrap_or(default)
    }
}

impl RunConfig {
    pub fn validate(self) -> Result<ValidatedConfig> {
        let params = self.params.validate()?;
        let direction = self.direction.map(|d| d.to_direction()).transpose()?;
        if let Some(ds) = &self.directions {
            for d in ds {
                d.to_direction()?;
            }
        }
        if let Some(x) = &self.x {
            x.to_offset()?;
        }
        if self.max_attempts == Some(0) {
            return Err(Error::InvalidParams("max_attempts must be at least 1".into()));
        }
        if let Some(prefix) = self.outputs.as_ref().and_then(|o| o.prefix.as_deref()) {
            if prefix.is_empty() || prefix.contains(['/', '\\']) || prefix.starts_with('.') {
                return Err(Error::InvalidParams(format!("output prefix {prefix:?} is not a plain file stem")));
            }
        }
        Ok(ValidatedConfig {
            raw: self,
            params,
            direction,
        })
    }
}

/// Parses and validates a JSON configuration.
pub fn parse_config(text: &str) -> Result<ValidatedConfig> {
    let raw: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.validate()
}

/// Parses a JSON direction such as `{"cot": {"num": 1, "den": 2}}`.
pub fn parse_direction(text: &str) -> Result<Direction> {
    let spec: DirectionSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.to_direction()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Symmetry;

    #[test]
    fn three_probability_layouts_agree() {
        let a = parse_config(r#"{"params": {"m": 2, "probs": 0.5}}"#).unwrap();
        let b = parse_config(r#"{"params": {"m": 2, "probs": [0.5, 0.5, 0.5, 0.5]}}"#).unwrap();
        let c = parse_config(r#"{"params": {"m": 2, "probs": [[0.5, 0.5], [0.5, 0.5]]}}"#).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(b.params, c.params);
    }

    #[test]
    fn matrix_is_bottom_row_first() {
        let c = parse_config(r#"{"params": {"m": 2, "probs": [[1, 1], [0, 0.5]], "seed": 3}}"#).unwrap();
        assert_eq!(c.params.probs(), &[1.0, 1.0, 0.0, 0.5]);
        assert_eq!(c.params.seed(), 3);
    }

    #[test]
    fn directions() {
        let d = parse_direction(r#"{"cot": {"num": 1, "den": 2}}"#).unwrap();
        assert_eq!(d.beta(), 0.5);
        let d = parse_direction(r#"{"cot": {"num": 3, "den": 1}}"#).unwrap();
        assert_eq!(d.symmetry(), Symmetry::Swap);
        let d = parse_direction(r#"{"alpha_rad": 1.0}"#).unwrap();
        assert!(!d.is_exact());
        assert!(parse_direction(r#"{"cot": {"num": 0, "den": 0}}"#).is_err());
        assert!(parse_direction(r#"{"beta": 1}"#).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(parse_config("{"), Err(Error::Parse(_))));
        assert!(parse_config(r#"{"params": {"m": 3, "probs": [0.5]}}"#).is_err());
        assert!(parse_config(r#"{"params": {"m": 3, "probs": 1.5}}"#).is_err());
        assert!(parse_config(r#"{"params": {"m": 3, "probs": 0.5}, "bogus": 1}"#).is_err());
        assert!(parse_config(r#"{"params": {"m": 3, "probs": 0.5}, "outputs": {"prefix": "../x"}}"#).is_err());
        let c = parse_config(r#"{"params": {"m": 3, "probs": 0.5}, "direction": {"alpha_rad": 1.0}, "x": {"num": 1, "den": 3}}"#)
            .unwrap();
        assert!(c.query("slice").is_err());
    }

    #[test]
    fn config_round_trips() {
        let text = r#"{"params": {"m": 3, "probs": [[1,1,1],[0,0,0],[1,1,1]], "seed": 9},
            "n": 4, "direction": {"cot": {"num": 1, "den": 2}}, "x": 0.25, "stats": ["dimension"]}"#;
        let c = parse_config(text).unwrap();
        let back = parse_config(&serde_json::to_string(&c.raw).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
