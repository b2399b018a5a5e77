use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::condition::{Condition, ConditionSpec};
use super::{AgentIndex, StateVector};
use crate::argumentation::ArgumentId;
use crate::error::{Error, Result};

/// "If `condition` holds then agent `target` should do `action`."
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionArgument {
    pub id: ArgumentId,
    pub target: AgentIndex,
    pub action: String,
    pub condition: ConditionSpec,
}

impl ActionArgument {
    /// The fixed attack rule: same action to different agents, or different
    /// actions to the same agent.
    pub fn attacks(&self, other: &ActionArgument) -> bool {
        self.id != other.id && ((self.action == other.action) != (self.target == other.target))
    }
}

/// All attacks among `applicable`, as `(attacker, attacked)` pairs. The
/// relation is symmetric.
pub fn build_attacks(applicable: &[&ActionArgument]) -> BTreeSet<(ArgumentId, ArgumentId)> {
    let mut attacks = BTreeSet::new();
    for a in applicable {
        for b in applicable {
            if a.attacks(b) {
                attacks.insert((a.id.clone(), b.id.clone()));
            }
        }
    }
    attacks
}

/// On-disk catalog document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogFile {
    pub team_size: usize,
    pub actions: Vec<String>,
    pub arguments: Vec<ActionArgument>,
}

/// An ordered, validated list of action arguments over one action alphabet.
///
/// List order is canonical: applicable arguments come back in this order and
/// it serves as the tie-break order wherever one is needed.
#[derive(Clone, Debug)]
pub struct ArgumentCatalog {
    team_size: usize,
    actions: BTreeSet<String>,
    arguments: Vec<ActionArgument>,
    conditions: Vec<Condition>,
    positions: HashMap<ArgumentId, usize>,
}

impl PartialEq for ArgumentCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.team_size == other.team_size
            && self.actions == other.actions
            && self.arguments == other.arguments
    }
}

impl ArgumentCatalog {
    pub fn new<I, S>(team_size: usize, actions: I, arguments: Vec<ActionArgument>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if team_size == 0 {
            return Err(Error::InvalidCatalog("team_size must be at least 1".into()));
        }
        let actions: BTreeSet<String> = actions.into_iter().map(Into::into).collect();
        if actions.is_empty() || actions.contains("") {
            return Err(Error::InvalidCatalog(
                "action alphabet must be non-empty and contain no empty labels".into(),
            ));
        }
        let mut positions = HashMap::with_capacity(arguments.len());
        let mut conditions = Vec::with_capacity(arguments.len());
        for (i, arg) in arguments.iter().enumerate() {
            if positions.insert(arg.id.clone(), i).is_some() {
                return Err(Error::DuplicateArgument(arg.id.to_string()));
            }
            arg.target.check(team_size)?;
            if !actions.contains(&arg.action) {
                return Err(Error::UnknownAction(arg.action.clone()));
            }
            conditions.push(arg.condition.compile()?);
        }
        Ok(ArgumentCatalog {
            team_size,
            actions,
            arguments,
            conditions,
            positions,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CatalogFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("catalog serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn to_file(&self) -> CatalogFile {
        CatalogFile {
            team_size: self.team_size,
            actions: self.actions.iter().cloned().collect(),
            arguments: self.arguments.clone(),
        }
    }

    pub fn team_size(&self) -> usize {
        self.team_size
    }

    pub fn actions(&self) -> &BTreeSet<String> {
        &self.actions
    }

    pub fn arguments(&self) -> &[ActionArgument] {
        &self.arguments
    }

    pub fn len(&self) -> usize {
        self.arguments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arguments.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &ArgumentId> {
        self.arguments.iter().map(|a| &a.id)
    }

    pub fn position(&self, id: &ArgumentId) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn get(&self, id: &ArgumentId) -> Option<&ActionArgument> {
        self.position(id).map(|i| &self.arguments[i])
    }

    /// Arguments that recommend an action to `agent`, in catalog order.
    pub fn primary_arguments(&self, agent: AgentIndex) -> impl Iterator<Item = &ActionArgument> {
        self.arguments.iter().filter(move |a| a.target == agent)
    }

    /// Catalog positions of every argument whose condition holds in `state`.
    pub fn applicable_indices(&self, state: &StateVector) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, condition) in self.conditions.iter().enumerate() {
            if condition.evaluate(state)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Every argument applicable in `state`, in catalog order.
    pub fn applicable_arguments(&self, state: &StateVector) -> Result<Vec<&ActionArgument>> {
        Ok(self
            .applicable_indices(state)?
            .into_iter()
            .map(|i| &self.arguments[i])
            .collect())
    }
}

impl TryFrom<CatalogFile> for ArgumentCatalog {
    type Error = Error;

    fn try_from(file: CatalogFile) -> Result<Self> {
        ArgumentCatalog::new(file.team_size, file.actions, file.arguments)
    }
}
