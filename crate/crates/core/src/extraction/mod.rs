//! Value-ordering extraction from trajectories.
//!
//! `build_apg` counts pairwise preferences, `convert_to_acyclic` prunes light
//! edges and breaks any cycle left over, and `topological_sort_with_default`
//! linearizes the result, falling back to a user-supplied default ordering
//! wherever the data says nothing.

mod acyclic;
mod apg;
mod toposort;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentIndex, ArgumentCatalog, ValueAssignment};
use crate::argumentation::ArgumentId;
use crate::error::{Error, Result};
use crate::trajectories::TrajectorySet;

pub use acyclic::{convert_to_acyclic, find_cycle, is_acyclic, prune, AcyclicGraph, RemovedEdge};
pub use apg::{
    build_apg, build_apg_parallel, build_apg_scoped, ArgumentPreferenceGraph, ExtractionScope,
};
pub use toposort::topological_sort_with_default;

/// Arguments ranked most-preferred first. No duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ArgumentId>", into = "Vec<ArgumentId>")]
pub struct Ordering {
    ranked: Vec<ArgumentId>,
}

impl Ordering {
    pub fn new(ranked: Vec<ArgumentId>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(ranked.len());
        if let Some(dup) = ranked.iter().find(|id| !seen.insert(*id)) {
            return Err(Error::DuplicateArgument(dup.to_string()));
        }
        Ok(Ordering { ranked })
    }

    /// Catalog order.
    pub fn catalog_order(catalog: &ArgumentCatalog) -> Self {
        Ordering {
            ranked: catalog.ids().cloned().collect(),
        }
    }

    /// `agent`'s primary arguments first, then everything else; catalog
    /// order within each group.
    pub fn primary_first(catalog: &ArgumentCatalog, agent: AgentIndex) -> Self {
        let (own, rest): (Vec<_>, Vec<_>) =
            catalog.arguments().iter().partition(|a| a.target == agent);
        Ordering {
            ranked: own.into_iter().chain(rest).map(|a| a.id.clone()).collect(),
        }
    }

    pub fn ranked(&self) -> &[ArgumentId] {
        &self.ranked
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Ordering {
            ranked: self.ranked.iter().rev().cloned().collect(),
        }
    }

    pub fn check_permutation_of(&self, catalog: &ArgumentCatalog) -> Result<()> {
        if let Some(unknown) = self.ranked.iter().find(|id| catalog.get(id).is_none()) {
            return Err(Error::UnknownArgument(unknown.to_string()));
        }
        if self.ranked.len() != catalog.len() {
            let listed: HashSet<_> = self.ranked.iter().collect();
            let missing = catalog.ids().find(|id| !listed.contains(id));
            return Err(Error::MissingNode(
                missing.map(ToString::to_string).unwrap_or_default(),
            ));
        }
        Ok(())
    }
}

impl TryFrom<Vec<ArgumentId>> for Ordering {
    type Error = Error;

    fn try_from(ranked: Vec<ArgumentId>) -> Result<Self> {
        Ordering::new(ranked)
    }
}

impl From<Ordering> for Vec<ArgumentId> {
    fn from(o: Ordering) -> Self {
        o.ranked
    }
}

/// `values[ranked[k]] = N - k`: the first argument gets `N`, the last `1`.
pub fn ordering_to_values(ordering: &Ordering) -> Result<ValueAssignment> {
    let n = ordering.len() as i64;
    let values: BTreeMap<ArgumentId, i64> = ordering
        .ranked
        .iter()
        .enumerate()
        .map(|(k, id)| (id.clone(), n - k as i64))
        .collect();
    if values.len() != ordering.len() {
        return Err(Error::InvalidOrdering(
            "duplicate argument in ordering".into(),
        ));
    }
    ValueAssignment::new(values)
}

fn default_threshold() -> u64 {
    1
}

/// Extraction parameters, as stored in the extraction config file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionConfig {
    #[serde(default = "default_threshold")]
    pub pruning_threshold: u64,
    /// When absent, [`Ordering::primary_first`] for per-agent extraction and
    /// catalog order for joint extraction.
    #[serde(default)]
    pub default_ordering: Option<Ordering>,
    /// Action for agents left without an accepted primary argument. Not
    /// used by the extraction itself, only when building models from it.
    #[serde(default)]
    pub default_action: Option<String>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            pruning_threshold: default_threshold(),
            default_ordering: None,
            default_action: None,
        }
    }
}

impl ExtractionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn default_for(&self, catalog: &ArgumentCatalog, scope: ExtractionScope) -> Result<Ordering> {
        let ordering = match (&self.default_ordering, scope) {
            (Some(o), _) => o.clone(),
            (None, ExtractionScope::PerAgent(agent)) => Ordering::primary_first(catalog, agent),
            (None, ExtractionScope::Joint) => Ordering::catalog_order(catalog),
        };
        ordering.check_permutation_of(catalog)?;
        Ok(ordering)
    }
}

/// Everything one extraction run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Extraction {
    pub ordering: Ordering,
    pub values: ValueAssignment,
    pub removed: Vec<RemovedEdge>,
    pub apg_edges: usize,
    pub apg_max_weight: u64,
}

impl Extraction {
    pub fn to_file(&self) -> OrderingFile {
        OrderingFile {
            ranked: self.ordering.clone(),
            values: self.values.clone(),
            cycle_edges_removed: self
                .removed
                .iter()
                .map(|e| (e.from.clone(), e.to.clone(), e.weight))
                .collect(),
        }
    }
}

/// On-disk extraction result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingFile {
    pub ranked: Ordering,
    pub values: ValueAssignment,
    pub cycle_edges_removed: Vec<(ArgumentId, ArgumentId, u64)>,
}

/// Preference graph, acyclic conversion and default-guided topological sort
/// for one agent.
pub fn extract_ordering(
    trajectories: &TrajectorySet,
    catalog: &ArgumentCatalog,
    target: AgentIndex,
    config: &ExtractionConfig,
) -> Result<Extraction> {
    extract_scoped(
        trajectories,
        catalog,
        ExtractionScope::PerAgent(target),
        config,
        1,
    )
}

/// [`extract_ordering`] for any scope, accumulating the preference graph on
/// `workers` threads. The result does not depend on `workers`.
pub fn extract_scoped(
    trajectories: &TrajectorySet,
    catalog: &ArgumentCatalog,
    scope: ExtractionScope,
    config: &ExtractionConfig,
    workers: usize,
) -> Result<Extraction> {
    let default = config.default_for(catalog, scope)?;
    let apg = build_apg_parallel(trajectories, catalog, scope, workers)?;
    let AcyclicGraph { dag, removed } = convert_to_acyclic(&apg, config.pruning_threshold);
    let ordering = topological_sort_with_default(&dag, &default)?;
    let values = ordering_to_values(&ordering)?;
    Ok(Extraction {
        ordering,
        values,
        removed,
        apg_edges: apg.edge_count(),
        apg_max_weight: apg.max_weight(),
    })
}

/// Combines per-agent orderings into one full-catalog ordering per agent.
///
/// Agent `i` ranks its own primary arguments first, in the order its own
/// extraction found, followed by every other agent's primary arguments in
/// agent-index order, each group ordered by that agent's extraction.
pub fn merge_team_orderings(
    per_agent: &[Ordering],
    catalog: &ArgumentCatalog,
) -> Result<Vec<Ordering>> {
    if per_agent.len() != catalog.team_size() {
        return Err(Error::InvalidOrdering(format!(
            "{} orderings for a team of {}",
            per_agent.len(),
            catalog.team_size()
        )));
    }
    for o in per_agent {
        o.check_permutation_of(catalog)?;
    }
    let group = |agent: usize| {
        per_agent[agent].ranked.iter().filter(move |id| {
            catalog
                .get(id)
                .is_some_and(|a| a.target == AgentIndex(agent))
        })
    };
    (0..per_agent.len())
        .map(|i| {
            let ranked = std::iter::once(i)
                .chain((0..per_agent.len()).filter(|&j| j != i))
                .flat_map(group)
                .cloned()
                .collect();
            Ordering::new(ranked)
        })
        .collect()
}
