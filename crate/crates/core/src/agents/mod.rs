//! Action arguments, value-based argumentation agents and teams.

mod catalog;
pub mod condition;
mod model;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use catalog::{build_attacks, ActionArgument, ArgumentCatalog, CatalogFile};
pub use condition::{evaluate_condition, Condition, ConditionSpec, ParamValue};
pub use model::{
    build_defeat_graph, AAAgentModel, AgentModelFile, Decision, TeamModel, ValueAssignment,
};

/// Position of an agent within its team, starting at 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentIndex(pub usize);

impl AgentIndex {
    pub fn get(self) -> usize {
        self.0
    }

    pub fn check(self, team_size: usize) -> Result<Self> {
        if self.0 < team_size {
            Ok(self)
        } else {
            Err(Error::AgentOutOfRange {
                index: self.0,
                team_size,
            })
        }
    }
}

impl fmt::Display for AgentIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Named real-valued features describing an environment state.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector {
    features: BTreeMap<String, f64>,
}

impl StateVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<K, I>(pairs: I) -> Result<Self>
    where
        K: Into<String>,
        I: IntoIterator<Item = (K, f64)>,
    {
        let mut state = StateVector::new();
        for (k, v) in pairs {
            state.insert(k, v)?;
        }
        Ok(state)
    }

    /// Sets a feature. Non-finite values are rejected.
    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> Result<()> {
        let name = name.into();
        if !value.is_finite() {
            return Err(Error::NonFiniteFeature { name, value });
        }
        self.features.insert(name, value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.features
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingFeature(name.to_string()))
    }

    pub fn features(&self) -> &BTreeMap<String, f64> {
        &self.features
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Anything that maps a state to one action per team member.
pub trait JointPolicy: Sync {
    fn team_size(&self) -> usize;

    /// Returns one action label per agent, indexed by [`AgentIndex`].
    fn joint_action(&self, state: &StateVector) -> Result<Vec<String>>;
}
