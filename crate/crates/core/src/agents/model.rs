use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ActionArgument, AgentIndex, ArgumentCatalog, JointPolicy, StateVector};
use crate::argumentation::{ArgumentId, ArgumentationFramework, ExtensionSet};
use crate::error::{Error, Result};

/// Integer value per argument; higher values win conflicts. Values are
/// pairwise distinct, so every conflict resolves one way.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<ArgumentId, i64>",
    into = "BTreeMap<ArgumentId, i64>"
)]
pub struct ValueAssignment {
    values: BTreeMap<ArgumentId, i64>,
}

impl ValueAssignment {
    pub fn new(values: BTreeMap<ArgumentId, i64>) -> Result<Self> {
        let mut seen: HashMap<i64, &ArgumentId> = HashMap::with_capacity(values.len());
        for (id, &v) in &values {
            if let Some(first) = seen.insert(v, id) {
                return Err(Error::DuplicateValue {
                    value: v,
                    first: first.to_string(),
                    second: id.to_string(),
                });
            }
        }
        Ok(ValueAssignment { values })
    }

    pub fn get(&self, id: &ArgumentId) -> Option<i64> {
        self.values.get(id).copied()
    }

    pub fn value_of(&self, id: &ArgumentId) -> Result<i64> {
        self.get(id)
            .ok_or_else(|| Error::MissingValue(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ArgumentId, i64)> {
        self.values.iter().map(|(id, &v)| (id, v))
    }

    /// Requires exactly one value per catalog argument.
    pub fn check_total(&self, catalog: &ArgumentCatalog) -> Result<()> {
        for id in catalog.ids() {
            self.value_of(id)?;
        }
        if let Some(extra) = self.values.keys().find(|id| catalog.get(id).is_none()) {
            return Err(Error::UnknownArgument(extra.to_string()));
        }
        Ok(())
    }

    /// Applies `f` to every value. `f` must be strictly increasing for the
    /// result to encode the same preferences.
    pub fn map_values(&self, f: impl Fn(i64) -> i64) -> Result<Self> {
        Self::new(
            self.values
                .iter()
                .map(|(id, &v)| (id.clone(), f(v)))
                .collect(),
        )
    }
}

impl TryFrom<BTreeMap<ArgumentId, i64>> for ValueAssignment {
    type Error = Error;

    fn try_from(values: BTreeMap<ArgumentId, i64>) -> Result<Self> {
        ValueAssignment::new(values)
    }
}

impl From<ValueAssignment> for BTreeMap<ArgumentId, i64> {
    fn from(v: ValueAssignment) -> Self {
        v.values
    }
}

/// The framework of successful attacks among `applicable`: an attack
/// survives iff the attacker's value is strictly greater.
pub fn build_defeat_graph(
    applicable: &[&ActionArgument],
    values: &ValueAssignment,
) -> Result<ArgumentationFramework> {
    let valued = applicable
        .iter()
        .map(|a| Ok((*a, values.value_of(&a.id)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut defeats = Vec::new();
    for &(a, va) in &valued {
        for &(b, vb) in &valued {
            if va > vb && a.attacks(b) {
                defeats.push((a.id.clone(), b.id.clone()));
            }
        }
    }
    ArgumentationFramework::new(valued.iter().map(|(a, _)| a.id.clone()), defeats)
}

/// Trace of one action derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    /// Applicable arguments in catalog order.
    pub applicable: Vec<ArgumentId>,
    pub defeat_graph: ArgumentationFramework,
    pub grounded: ExtensionSet,
    /// Accepted arguments targeting the deciding agent.
    pub primaries: Vec<ArgumentId>,
    pub action: String,
    /// True when no primary argument was accepted and the default was used.
    pub used_default: bool,
}

fn evaluate_frame(
    catalog: &ArgumentCatalog,
    values: &ValueAssignment,
    state: &StateVector,
) -> Result<(Vec<ArgumentId>, ArgumentationFramework, ExtensionSet)> {
    let applicable = catalog.applicable_arguments(state)?;
    let graph = build_defeat_graph(&applicable, values)?;
    let grounded = graph.grounded_extension();
    Ok((
        applicable.iter().map(|a| a.id.clone()).collect(),
        graph,
        grounded,
    ))
}

/// Reads the action of `agent` off the accepted set.
fn primary_action(
    catalog: &ArgumentCatalog,
    grounded: &ExtensionSet,
    agent: AgentIndex,
) -> Result<(Vec<ArgumentId>, Option<String>)> {
    let mut primaries = Vec::new();
    let mut action: Option<&ActionArgument> = None;
    for id in grounded.iter() {
        let Some(arg) = catalog.get(id) else {
            return Err(Error::UnknownArgument(id.to_string()));
        };
        if arg.target != agent {
            continue;
        }
        match action {
            Some(first) if first.action != arg.action => {
                return Err(Error::InconsistentPrimaries {
                    agent: agent.0,
                    first: first.id.to_string(),
                    second: arg.id.to_string(),
                })
            }
            Some(_) => {}
            None => action = Some(arg),
        }
        primaries.push(id.clone());
    }
    Ok((primaries, action.map(|a| a.action.clone())))
}

/// A value-based argumentation agent deciding for one team member.
#[derive(Clone, Debug, PartialEq)]
pub struct AAAgentModel {
    catalog: Arc<ArgumentCatalog>,
    values: ValueAssignment,
    self_index: AgentIndex,
    default_action: String,
}

impl AAAgentModel {
    pub fn new(
        catalog: Arc<ArgumentCatalog>,
        values: ValueAssignment,
        self_index: AgentIndex,
        default_action: impl Into<String>,
    ) -> Result<Self> {
        let default_action = default_action.into();
        values.check_total(&catalog)?;
        self_index.check(catalog.team_size())?;
        if !catalog.actions().contains(&default_action) {
            return Err(Error::UnknownAction(default_action));
        }
        Ok(AAAgentModel {
            catalog,
            values,
            self_index,
            default_action,
        })
    }

    pub fn catalog(&self) -> &Arc<ArgumentCatalog> {
        &self.catalog
    }

    pub fn values(&self) -> &ValueAssignment {
        &self.values
    }

    pub fn self_index(&self) -> AgentIndex {
        self.self_index
    }

    pub fn default_action(&self) -> &str {
        &self.default_action
    }

    /// Applicable arguments, defeat graph, grounded extension, primary
    /// arguments, action.
    pub fn decide(&self, state: &StateVector) -> Result<Decision> {
        let (applicable, defeat_graph, grounded) =
            evaluate_frame(&self.catalog, &self.values, state)?;
        let (primaries, action) = primary_action(&self.catalog, &grounded, self.self_index)?;
        let used_default = action.is_none();
        Ok(Decision {
            applicable,
            defeat_graph,
            grounded,
            primaries,
            action: action.unwrap_or_else(|| self.default_action.clone()),
            used_default,
        })
    }

    pub fn select_action(&self, state: &StateVector) -> Result<String> {
        Ok(self.decide(state)?.action)
    }

    /// This agent's primary arguments with their values, highest first.
    pub fn ranked_primaries(&self) -> Vec<(ArgumentId, i64)> {
        let mut out: Vec<(ArgumentId, i64)> = self
            .catalog
            .primary_arguments(self.self_index)
            .filter_map(|a| self.values.get(&a.id).map(|v| (a.id.clone(), v)))
            .collect();
        out.sort_by_key(|a| std::cmp::Reverse(a.1));
        out
    }

    pub fn to_file(&self, catalog_ref: impl Into<String>) -> AgentModelFile {
        AgentModelFile {
            catalog: catalog_ref.into(),
            self_index: self.self_index,
            default_action: self.default_action.clone(),
            values: self.values.clone(),
        }
    }

    /// Writes the model document; `catalog_ref` is stored verbatim and is
    /// resolved relative to the model file when loading.
    pub fn save(&self, path: &Path, catalog_ref: &str) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file(catalog_ref))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (file, catalog_path) = AgentModelFile::read(path)?;
        let catalog = Arc::new(ArgumentCatalog::load(&catalog_path)?);
        file.into_model(catalog)
    }
}

/// On-disk agent model: a catalog reference plus the agent's parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentModelFile {
    pub catalog: String,
    #[serde(rename = "self")]
    pub self_index: AgentIndex,
    pub default_action: String,
    pub values: ValueAssignment,
}

impl AgentModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads the document and resolves its catalog path.
    pub fn read(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file = Self::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let catalog_path = base.join(&file.catalog);
        Ok((file, catalog_path))
    }

    pub fn into_model(self, catalog: Arc<ArgumentCatalog>) -> Result<AAAgentModel> {
        AAAgentModel::new(catalog, self.values, self.self_index, self.default_action)
    }
}

/// A team of agents: one model per member, or a single centralized selector.
#[derive(Clone, Debug, PartialEq)]
pub enum TeamModel {
    Decentralized(Vec<AAAgentModel>),
    Centralized {
        catalog: Arc<ArgumentCatalog>,
        values: ValueAssignment,
        default_actions: Vec<String>,
    },
}

impl TeamModel {
    pub fn decentralized(members: Vec<AAAgentModel>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidModel("team has no members".into()));
        };
        let team_size = first.catalog.team_size();
        if members.len() != team_size {
            return Err(Error::InvalidModel(format!(
                "{} members for a catalog of team size {team_size}",
                members.len()
            )));
        }
        for (i, m) in members.iter().enumerate() {
            if m.self_index != AgentIndex(i) {
                return Err(Error::InvalidModel(format!(
                    "member {i} decides for agent {}",
                    m.self_index
                )));
            }
            if m.catalog.actions() != first.catalog.actions() || m.catalog.team_size() != team_size
            {
                return Err(Error::InvalidModel(format!(
                    "member {i} uses an incompatible catalog"
                )));
            }
        }
        Ok(TeamModel::Decentralized(members))
    }

    pub fn single(agent: AAAgentModel) -> Result<Self> {
        Self::decentralized(vec![agent])
    }

    pub fn centralized(
        catalog: Arc<ArgumentCatalog>,
        values: ValueAssignment,
        default_actions: Vec<String>,
    ) -> Result<Self> {
        values.check_total(&catalog)?;
        if default_actions.len() != catalog.team_size() {
            return Err(Error::InvalidModel(format!(
                "{} default actions for a team of {}",
                default_actions.len(),
                catalog.team_size()
            )));
        }
        if let Some(bad) = default_actions
            .iter()
            .find(|a| !catalog.actions().contains(*a))
        {
            return Err(Error::UnknownAction(bad.clone()));
        }
        Ok(TeamModel::Centralized {
            catalog,
            values,
            default_actions,
        })
    }

    /// Loads one model file per member, sharing catalogs that resolve to the
    /// same path.
    pub fn load_decentralized(paths: &[PathBuf]) -> Result<Self> {
        let mut catalogs: HashMap<PathBuf, Arc<ArgumentCatalog>> = HashMap::new();
        let mut members = Vec::with_capacity(paths.len());
        for path in paths {
            let (file, catalog_path) = AgentModelFile::read(path)?;
            let catalog = match catalogs.get(&catalog_path) {
                Some(c) => c.clone(),
                None => {
                    let c = Arc::new(ArgumentCatalog::load(&catalog_path)?);
                    catalogs.insert(catalog_path, c.clone());
                    c
                }
            };
            members.push(file.into_model(catalog)?);
        }
        members.sort_by_key(|m| m.self_index);
        Self::decentralized(members)
    }

    pub fn members(&self) -> Option<&[AAAgentModel]> {
        match self {
            TeamModel::Decentralized(m) => Some(m),
            TeamModel::Centralized { .. } => None,
        }
    }

    pub fn catalog(&self) -> &Arc<ArgumentCatalog> {
        match self {
            TeamModel::Decentralized(m) => &m[0].catalog,
            TeamModel::Centralized { catalog, .. } => catalog,
        }
    }

    pub fn select_joint_action(&self, state: &StateVector) -> Result<Vec<String>> {
        match self {
            TeamModel::Decentralized(members) => {
                members.iter().map(|m| m.select_action(state)).collect()
            }
            TeamModel::Centralized {
                catalog,
                values,
                default_actions,
            } => {
                let (_, _, grounded) = evaluate_frame(catalog, values, state)?;
                default_actions
                    .iter()
                    .enumerate()
                    .map(|(i, default)| {
                        let (_, action) = primary_action(catalog, &grounded, AgentIndex(i))?;
                        Ok(action.unwrap_or_else(|| default.clone()))
                    })
                    .collect()
            }
        }
    }
}

impl JointPolicy for TeamModel {
    fn team_size(&self) -> usize {
        self.catalog().team_size()
    }

    fn joint_action(&self, state: &StateVector) -> Result<Vec<String>> {
        self.select_joint_action(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::ConditionSpec;

    fn id(s: &str) -> ArgumentId {
        ArgumentId::new(s).unwrap()
    }

    fn arg(name: &str, target: usize, action: &str, cond: ConditionSpec) -> ActionArgument {
        ActionArgument {
            id: id(name),
            target: AgentIndex(target),
            action: action.into(),
            condition: cond,
        }
    }

    fn always() -> ConditionSpec {
        ConditionSpec::new::<&str, _>("always", [])
    }

    fn when(feature: &str) -> ConditionSpec {
        ConditionSpec::new(
            "feature_ge",
            [("feature", feature.into()), ("threshold", 1.0.into())],
        )
    }

    fn values(pairs: &[(&str, i64)]) -> ValueAssignment {
        ValueAssignment::new(pairs.iter().map(|&(k, v)| (id(k), v)).collect()).unwrap()
    }

    fn attacks(af: &ArgumentationFramework) -> Vec<(String, String)> {
        af.attacks()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn duplicate_values_rejected() {
        let err = ValueAssignment::new([(id("A"), 1), (id("B"), 1)].into()).unwrap_err();
        assert!(matches!(err, Error::DuplicateValue { value: 1, .. }));
        assert!(serde_json::from_str::<ValueAssignment>(r#"{"A":2,"B":2}"#).is_err());
    }

    #[test]
    fn defeat_graph_examples() {
        let a = arg("A", 0, "x", always());
        let b = arg("B", 0, "y", always());
        let g = build_defeat_graph(&[&a, &b], &values(&[("A", 5), ("B", 3)])).unwrap();
        assert_eq!(attacks(&g), vec![("A".into(), "B".into())]);

        let c = arg("C", 1, "y", always());
        let g = build_defeat_graph(&[&a, &c], &values(&[("A", 5), ("C", 3)])).unwrap();
        assert_eq!(g.attack_count(), 0);

        let x3 = arg("X3", 0, "a", always());
        let x2 = arg("X2", 0, "b", always());
        let x1 = arg("X1", 0, "c", always());
        let g = build_defeat_graph(
            &[&x1, &x2, &x3],
            &values(&[("X3", 3), ("X2", 2), ("X1", 1)]),
        )
        .unwrap();
        let mut expected = vec![
            ("X3".to_string(), "X2".to_string()),
            ("X3".into(), "X1".into()),
            ("X2".into(), "X1".into()),
        ];
        expected.sort();
        assert_eq!(attacks(&g), expected);

        let err = build_defeat_graph(&[&a, &b], &values(&[("A", 5)])).unwrap_err();
        assert!(matches!(err, Error::MissingValue(ref s) if s == "B"));
    }

    #[test]
    fn agent_falls_back_to_default() {
        let cat = Arc::new(
            ArgumentCatalog::new(1, ["go", "stay"], vec![arg("A", 0, "go", when("f"))]).unwrap(),
        );
        let agent = AAAgentModel::new(cat, values(&[("A", 1)]), AgentIndex(0), "stay").unwrap();
        let off = StateVector::from_pairs([("f", 0.0)]).unwrap();
        let d = agent.decide(&off).unwrap();
        assert!(d.used_default);
        assert_eq!(d.action, "stay");
        let on = StateVector::from_pairs([("f", 1.0)]).unwrap();
        assert_eq!(agent.select_action(&on).unwrap(), "go");
    }

    #[test]
    fn agent_validation() {
        let cat =
            Arc::new(ArgumentCatalog::new(1, ["go"], vec![arg("A", 0, "go", always())]).unwrap());
        assert!(AAAgentModel::new(cat.clone(), values(&[]), AgentIndex(0), "go").is_err());
        assert!(AAAgentModel::new(cat.clone(), values(&[("A", 1)]), AgentIndex(1), "go").is_err());
        assert!(AAAgentModel::new(cat.clone(), values(&[("A", 1)]), AgentIndex(0), "no").is_err());
        assert!(
            AAAgentModel::new(cat, values(&[("A", 1), ("B", 2)]), AgentIndex(0), "go").is_err()
        );
    }

    #[test]
    fn lower_primary_reinstated_by_top_argument() {
        // tackle(10) beats mark(9), which would otherwise beat tackle(8).
        let cat = Arc::new(
            ArgumentCatalog::new(
                1,
                ["tackle", "mark"],
                vec![
                    arg("T10", 0, "tackle", always()),
                    arg("M9", 0, "mark", always()),
                    arg("T8", 0, "tackle", always()),
                ],
            )
            .unwrap(),
        );
        let agent = AAAgentModel::new(
            cat,
            values(&[("T10", 10), ("M9", 9), ("T8", 8)]),
            AgentIndex(0),
            "mark",
        )
        .unwrap();
        let d = agent.decide(&StateVector::new()).unwrap();
        assert_eq!(d.primaries, vec![id("T10"), id("T8")]);
        assert_eq!(d.action, "tackle");
    }

    #[test]
    fn cross_agent_defeat_can_silence_an_agent() {
        // Agent 1's only argument loses to agent 0's same-action argument.
        let cat = Arc::new(
            ArgumentCatalog::new(
                2,
                ["mark", "tackle"],
                vec![
                    arg("A0", 0, "mark", always()),
                    arg("A1", 1, "mark", always()),
                ],
            )
            .unwrap(),
        );
        let vals = values(&[("A0", 2), ("A1", 1)]);
        let a1 = AAAgentModel::new(cat.clone(), vals.clone(), AgentIndex(1), "tackle").unwrap();
        assert_eq!(a1.select_action(&StateVector::new()).unwrap(), "tackle");
        let team = TeamModel::centralized(cat, vals, vec!["tackle".into(); 2]).unwrap();
        assert_eq!(
            team.select_joint_action(&StateVector::new()).unwrap(),
            vec!["mark".to_string(), "tackle".into()]
        );
    }

    #[test]
    fn team_validation() {
        let cat =
            Arc::new(ArgumentCatalog::new(2, ["a"], vec![arg("A", 0, "a", always())]).unwrap());
        let m0 = AAAgentModel::new(cat.clone(), values(&[("A", 1)]), AgentIndex(0), "a").unwrap();
        let m1 = AAAgentModel::new(cat.clone(), values(&[("A", 1)]), AgentIndex(1), "a").unwrap();
        assert!(TeamModel::decentralized(vec![m0.clone()]).is_err());
        assert!(TeamModel::decentralized(vec![m1.clone(), m0.clone()]).is_err());
        assert!(TeamModel::decentralized(vec![m0, m1]).is_ok());
        assert!(TeamModel::centralized(cat, values(&[("A", 1)]), vec!["a".into()]).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cat =
            ArgumentCatalog::new(1, ["go", "stay"], vec![arg("A", 0, "go", when("f"))]).unwrap();
        cat.save(&dir.path().join("catalog.json")).unwrap();
        let agent =
            AAAgentModel::new(Arc::new(cat), values(&[("A", 7)]), AgentIndex(0), "stay").unwrap();
        let path = dir.path().join("agent.json");
        agent.save(&path, "catalog.json").unwrap();
        assert_eq!(AAAgentModel::load(&path).unwrap(), agent);
        let team = TeamModel::load_decentralized(&[path]).unwrap();
        assert_eq!(team.members().unwrap()[0], agent);
    }
}
