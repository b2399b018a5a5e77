//! Registered condition predicates.
//!
//! A condition is plain data: a `kind` plus named parameters, serializable
//! with its catalog. [`ConditionSpec::compile`] checks the
//! parameters against the kind's schema once; evaluation then only reads
//! features from the state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{Error, Result};

/// Condition kinds known to [`ConditionSpec::compile`].
pub const CONDITION_KINDS: &[&str] = &[
    "always",
    "feature_ge",
    "feature_lt",
    "interval2d",
    "closest_to_ball",
    "keeper_open",
    "keeper_far",
    "min_angle",
    "min_dist",
];

pub const POSITION_FEATURE: &str = "position";
pub const VELOCITY_FEATURE: &str = "velocity";

/// Feature names of the takeaway feature domain. Takers and keepers are 1-based.
pub mod takeaway_features {
    pub const HOLDER: &str = "holder";

    pub fn ball_dist(taker: usize) -> String {
        format!("t{taker}_ball_dist")
    }

    pub fn keeper_dist(taker: usize, keeper: usize) -> String {
        format!("t{taker}_k{keeper}_dist")
    }

    pub fn keeper_angle(taker: usize, keeper: usize) -> String {
        format!("t{taker}_k{keeper}_angle")
    }

    pub fn openness(keeper: usize) -> String {
        format!("k{keeper}_openness")
    }

    pub fn min_taker_dist(keeper: usize) -> String {
        format!("k{keeper}_min_taker_dist")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Number(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

impl ConditionSpec {
    pub fn new<K, I>(kind: &str, params: I) -> Self
    where
        K: Into<String>,
        I: IntoIterator<Item = (K, ParamValue)>,
    {
        ConditionSpec {
            kind: kind.to_string(),
            params: params.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn compile(&self) -> Result<Condition> {
        let p = Params {
            kind: &self.kind,
            params: &self.params,
        };
        let condition = match self.kind.as_str() {
            "always" => {
                p.allow(&[])?;
                Condition::Always
            }
            "feature_ge" | "feature_lt" => {
                p.allow(&["feature", "threshold"])?;
                let feature = p.text("feature")?;
                let threshold = p.number("threshold")?;
                if self.kind == "feature_ge" {
                    Condition::FeatureAtLeast { feature, threshold }
                } else {
                    Condition::FeatureBelow { feature, threshold }
                }
            }
            "interval2d" => {
                p.allow(&[
                    "pos_lo",
                    "pos_hi",
                    "vel_lo",
                    "vel_hi",
                    "pos_hi_closed",
                    "vel_hi_closed",
                ])?;
                Condition::Interval2d {
                    position: p.interval("pos_lo", "pos_hi", "pos_hi_closed")?,
                    velocity: p.interval("vel_lo", "vel_hi", "vel_hi_closed")?,
                }
            }
            "closest_to_ball" => {
                p.allow(&["taker", "takers"])?;
                let (taker, takers) = p.taker()?;
                Condition::ClosestToBall {
                    taker,
                    features: (1..=takers).map(takeaway_features::ball_dist).collect(),
                }
            }
            "keeper_open" | "keeper_far" => {
                p.allow(&["keeper", "threshold"])?;
                let keeper = p.index("keeper")?;
                let threshold = p.number("threshold")?;
                if self.kind == "keeper_open" {
                    Condition::FeatureAtLeast {
                        feature: takeaway_features::openness(keeper),
                        threshold,
                    }
                } else {
                    Condition::FeatureAtLeast {
                        feature: takeaway_features::min_taker_dist(keeper),
                        threshold,
                    }
                }
            }
            "min_angle" => {
                p.allow(&["taker", "keeper", "takers"])?;
                let (taker, takers) = p.taker()?;
                let keeper = p.index("keeper")?;
                Condition::MinAngle {
                    taker,
                    keeper,
                    features: (1..=takers)
                        .map(|t| takeaway_features::keeper_angle(t, keeper))
                        .collect(),
                }
            }
            "min_dist" => {
                p.allow(&["taker", "keeper", "takers"])?;
                let (taker, takers) = p.taker()?;
                let keeper = p.index("keeper")?;
                Condition::MinDist {
                    taker,
                    features: (1..=takers)
                        .map(|t| takeaway_features::keeper_dist(t, keeper))
                        .collect(),
                }
            }
            other => return Err(Error::UnknownConditionKind(other.to_string())),
        };
        Ok(condition)
    }
}

/// Evaluates `spec` against `state`.
pub fn evaluate_condition(spec: &ConditionSpec, state: &StateVector) -> Result<bool> {
    spec.compile()?.evaluate(state)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed_above: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && (x < self.hi || (self.closed_above && x <= self.hi))
    }
}

/// A validated condition, ready to evaluate.
#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    Always,
    FeatureAtLeast {
        feature: String,
        threshold: f64,
    },
    FeatureBelow {
        feature: String,
        threshold: f64,
    },
    Interval2d {
        position: Interval,
        velocity: Interval,
    },
    /// Taker (0-based position in `features`) has the smallest distance to
    /// the ball holder; ties go to the lowest index.
    ClosestToBall {
        taker: usize,
        features: Vec<String>,
    },
    /// Smallest angle to `keeper` at the ball holder among all takers. Never
    /// holds for the ball holder itself.
    MinAngle {
        taker: usize,
        keeper: usize,
        features: Vec<String>,
    },
    /// Closest taker to a keeper.
    MinDist {
        taker: usize,
        features: Vec<String>,
    },
}

impl Condition {
    pub fn evaluate(&self, state: &StateVector) -> Result<bool> {
        Ok(match self {
            Condition::Always => true,
            Condition::FeatureAtLeast { feature, threshold } => state.get(feature)? >= *threshold,
            Condition::FeatureBelow { feature, threshold } => state.get(feature)? < *threshold,
            Condition::Interval2d { position, velocity } => {
                position.contains(state.get(POSITION_FEATURE)?)
                    && velocity.contains(state.get(VELOCITY_FEATURE)?)
            }
            Condition::ClosestToBall { taker, features } => argmin(state, features)? == *taker,
            Condition::MinAngle {
                taker,
                keeper,
                features,
            } => {
                let holder = state.get(takeaway_features::HOLDER)?;
                holder != *keeper as f64 && argmin(state, features)? == *taker
            }
            Condition::MinDist { taker, features } => argmin(state, features)? == *taker,
        })
    }
}

fn argmin(state: &StateVector, features: &[String]) -> Result<usize> {
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (i, name) in features.iter().enumerate() {
        let v = state.get(name)?;
        if v < best_value {
            best = i;
            best_value = v;
        }
    }
    Ok(best)
}

struct Params<'a> {
    kind: &'a str,
    params: &'a BTreeMap<String, ParamValue>,
}

impl Params<'_> {
    fn invalid(&self, reason: String) -> Error {
        Error::InvalidCondition {
            kind: self.kind.to_string(),
            reason,
        }
    }

    fn allow(&self, names: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !names.contains(&k.as_str())) {
            Some(extra) => Err(self.invalid(format!("unexpected parameter `{extra}`"))),
            None => Ok(()),
        }
    }

    fn number_opt(&self, name: &str) -> Result<Option<f64>> {
        match self.params.get(name) {
            None => Ok(None),
            Some(ParamValue::Number(v)) if v.is_finite() => Ok(Some(*v)),
            Some(_) => Err(self.invalid(format!("`{name}` must be a finite number"))),
        }
    }

    fn number(&self, name: &str) -> Result<f64> {
        self.number_opt(name)?
            .ok_or_else(|| self.invalid(format!("missing parameter `{name}`")))
    }

    fn text(&self, name: &str) -> Result<String> {
        match self.params.get(name) {
            Some(ParamValue::Text(s)) if !s.is_empty() => Ok(s.clone()),
            Some(_) => Err(self.invalid(format!("`{name}` must be a non-empty string"))),
            None => Err(self.invalid(format!("missing parameter `{name}`"))),
        }
    }

    fn flag(&self, name: &str) -> Result<bool> {
        match self.number_opt(name)? {
            None => Ok(false),
            Some(0.0) => Ok(false),
            Some(1.0) => Ok(true),
            Some(_) => Err(self.invalid(format!("`{name}` must be 0 or 1"))),
        }
    }

    /// A 1-based index parameter.
    fn index(&self, name: &str) -> Result<usize> {
        let v = self.number(name)?;
        if v < 1.0 || v.fract() != 0.0 || v > 1024.0 {
            return Err(self.invalid(format!("`{name}` must be an integer in 1..=1024")));
        }
        Ok(v as usize)
    }

    /// Returns the 0-based taker index and the taker count.
    fn taker(&self) -> Result<(usize, usize)> {
        let taker = self.index("taker")?;
        let takers = self.index("takers")?;
        if taker > takers {
            return Err(self.invalid(format!("taker {taker} exceeds takers {takers}")));
        }
        Ok((taker - 1, takers))
    }

    fn interval(&self, lo: &str, hi: &str, closed: &str) -> Result<Interval> {
        let interval = Interval {
            lo: self.number(lo)?,
            hi: self.number(hi)?,
            closed_above: self.flag(closed)?,
        };
        if interval.lo > interval.hi {
            return Err(self.invalid(format!("`{lo}` exceeds `{hi}`")));
        }
        Ok(interval)
    }
}
