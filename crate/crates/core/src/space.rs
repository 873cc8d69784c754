//! Box-bounded parameter spaces with linear or logarithmic coordinates.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToUnit,
    FromUnit,
}

/// A named, bounded, continuous parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub low: f64,
    pub high: f64,
    pub scale: Scale,
}

impl ParamSpec {
    pub fn linear(name: impl Into<String>, low: f64, high: f64) -> Self {
        Self {
            name: name.into(),
            low,
            high,
            scale: Scale::Linear,
        }
    }

    pub fn log(name: impl Into<String>, low: f64, high: f64) -> Self {
        Self {
            name: name.into(),
            low,
            high,
            scale: Scale::Log,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.low <= value && value <= self.high
    }

    // Bounds in the coordinate where the unit map is affine.
    fn scaled_bounds(&self) -> (f64, f64) {
        match self.scale {
            Scale::Linear => (self.low, self.high),
            Scale::Log => (self.low.log10(), self.high.log10()),
        }
    }

    fn to_scaled(&self, value: f64) -> f64 {
        match self.scale {
            Scale::Linear => value,
            Scale::Log => value.log10(),
        }
    }

    fn unscale(&self, value: f64) -> f64 {
        match self.scale {
            Scale::Linear => value,
            Scale::Log => 10f64.powf(value),
        }
    }

    /// Maps a value in `[low, high]` to `[0, 1]`.
    pub fn to_unit(&self, value: f64) -> Result<f64> {
        if !self.contains(value) {
            return Err(Error::InvalidInput(format!(
                "{} = {value} is outside [{}, {}]",
                self.name, self.low, self.high
            )));
        }
        if value == self.low {
            return Ok(0.0);
        }
        if value == self.high {
            return Ok(1.0);
        }
        let (lo, hi) = self.scaled_bounds();
        Ok(((self.to_scaled(value) - lo) / (hi - lo)).clamp(0.0, 1.0))
    }

    /// Maps a unit coordinate back to `[low, high]`.
    pub fn from_unit(&self, unit: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&unit) {
            return Err(Error::InvalidInput(format!(
                "unit coordinate {unit} for {} is outside [0, 1]",
                self.name
            )));
        }
        if unit == 0.0 {
            return Ok(self.low);
        }
        if unit == 1.0 {
            return Ok(self.high);
        }
        let (lo, hi) = self.scaled_bounds();
        Ok(self
            .unscale(lo + unit * (hi - lo))
            .clamp(self.low, self.high))
    }

    pub fn transform(&self, value: f64, direction: Direction) -> Result<f64> {
        match direction {
            Direction::ToUnit => self.to_unit(value),
            Direction::FromUnit => self.from_unit(value),
        }
    }

    /// Shrinks the range to `factor` of its span, centred on `best` in the
    /// scaled coordinate, then intersects with the original range.
    pub fn tightened(&self, best: f64, factor: f64) -> Result<ParamSpec> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "tighten factor must be in (0, 1], got {factor}"
            )));
        }
        if !self.contains(best) {
            return Err(Error::InvalidInput(format!(
                "best {} = {best} is outside [{}, {}]",
                self.name, self.low, self.high
            )));
        }
        let (lo, hi) = self.scaled_bounds();
        let half = factor * (hi - lo) / 2.0;
        let centre = self.to_scaled(best);
        let low = if centre - half <= lo {
            self.low
        } else {
            self.unscale(centre - half)
        };
        let high = if centre + half >= hi {
            self.high
        } else {
            self.unscale(centre + half)
        };
        Ok(ParamSpec {
            name: self.name.clone(),
            low: low.clamp(self.low, best),
            high: high.clamp(best, self.high),
            scale: self.scale,
        })
    }
}

/// A single invariant violation found by [`validate_space`].
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceViolation {
    Empty,
    DuplicateName(String),
    EmptyRange { name: String, low: f64, high: f64 },
    NonFiniteBound { name: String },
    NonPositiveLogBound { name: String, low: f64 },
}

impl fmt::Display for SpaceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceViolation::Empty => write!(f, "search space has no parameters"),
            SpaceViolation::DuplicateName(name) => {
                write!(f, "parameter `{name}` is defined more than once")
            }
            SpaceViolation::EmptyRange { name, low, high } => {
                write!(
                    f,
                    "parameter `{name}`: low ({low}) must be less than high ({high})"
                )
            }
            SpaceViolation::NonFiniteBound { name } => {
                write!(f, "parameter `{name}` has a non-finite bound")
            }
            SpaceViolation::NonPositiveLogBound { name, low } => {
                write!(
                    f,
                    "parameter `{name}`: log scale requires low > 0, got {low}"
                )
            }
        }
    }
}

/// Returns every invariant violation in `params`, or `Ok` if there are none.
pub fn validate_params(params: &[ParamSpec]) -> std::result::Result<(), Vec<SpaceViolation>> {
    let mut violations = Vec::new();
    if params.is_empty() {
        violations.push(SpaceViolation::Empty);
    }
    let mut seen = HashSet::new();
    for p in params {
        if !seen.insert(p.name.as_str()) {
            violations.push(SpaceViolation::DuplicateName(p.name.clone()));
        }
        if !(p.low.is_finite() && p.high.is_finite()) {
            violations.push(SpaceViolation::NonFiniteBound {
                name: p.name.clone(),
            });
            continue;
        }
        if p.low >= p.high {
            violations.push(SpaceViolation::EmptyRange {
                name: p.name.clone(),
                low: p.low,
                high: p.high,
            });
        }
        if p.scale == Scale::Log && p.low <= 0.0 {
            violations.push(SpaceViolation::NonPositiveLogBound {
                name: p.name.clone(),
                low: p.low,
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// An ordered, validated list of parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>) -> std::result::Result<Self, Vec<SpaceViolation>> {
        validate_params(&params)?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.params.len()
            && self.params.iter().zip(point).all(|(p, &x)| p.contains(x))
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len == self.params.len() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "parameter vector has {len} entries, space has {}",
                self.params.len()
            )))
        }
    }

    pub fn to_unit(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(point.len())?;
        self.params
            .iter()
            .zip(point)
            .map(|(p, &x)| p.to_unit(x))
            .collect()
    }

    pub fn from_unit(&self, unit: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(unit.len())?;
        self.params
            .iter()
            .zip(unit)
            .map(|(p, &u)| p.from_unit(u))
            .collect()
    }

    /// Tightens every range around `best`; see [`ParamSpec::tightened`].
    pub fn tighten(&self, best: &[f64], factor: f64) -> Result<SearchSpace> {
        self.check_dim(best.len())?;
        let params = self
            .params
            .iter()
            .zip(best)
            .map(|(p, &b)| p.tightened(b, factor))
            .collect::<Result<Vec<_>>>()?;
        Ok(SearchSpace { params })
    }
}

pub fn unit_transform(spec: &ParamSpec, value: f64, direction: Direction) -> Result<f64> {
    spec.transform(value, direction)
}

pub fn tighten_space(space: &SearchSpace, best: &[f64], factor: f64) -> Result<SearchSpace> {
    space.tighten(best, factor)
}

pub fn validate_space(space: &SearchSpace) -> std::result::Result<(), Vec<SpaceViolation>> {
    validate_params(&space.params)
}
