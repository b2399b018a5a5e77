use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentIndex, ArgumentCatalog};
use crate::argumentation::ArgumentId;
use crate::error::{Error, Result};
use crate::trajectories::{Episode, TrajectorySet};

/// Weighted preference digraph over catalog arguments.
///
/// An edge `A -> B` with weight `w` records `w` steps on which both were
/// applicable, `A` agreed with the logged action and `B` did not. Absent
/// edges have weight 0; self-edges never occur.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentPreferenceGraph {
    nodes: BTreeSet<ArgumentId>,
    weights: BTreeMap<(ArgumentId, ArgumentId), u64>,
}

impl ArgumentPreferenceGraph {
    pub fn new(nodes: impl IntoIterator<Item = ArgumentId>) -> Self {
        ArgumentPreferenceGraph {
            nodes: nodes.into_iter().collect(),
            weights: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> &BTreeSet<ArgumentId> {
        &self.nodes
    }

    pub fn weights(&self) -> &BTreeMap<(ArgumentId, ArgumentId), u64> {
        &self.weights
    }

    pub fn weight(&self, from: &ArgumentId, to: &ArgumentId) -> u64 {
        self.weights
            .get(&(from.clone(), to.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.values().copied().max().unwrap_or(0)
    }

    pub fn add_weight(&mut self, from: &ArgumentId, to: &ArgumentId, by: u64) -> Result<()> {
        for id in [from, to] {
            if !self.nodes.contains(id) {
                return Err(Error::UnknownArgument(id.to_string()));
            }
        }
        if from == to {
            return Err(Error::InvalidOrdering(format!("self-edge on `{from}`")));
        }
        if by > 0 {
            *self.weights.entry((from.clone(), to.clone())).or_insert(0) += by;
        }
        Ok(())
    }

    pub fn increment_edge(&mut self, from: &ArgumentId, to: &ArgumentId) -> Result<()> {
        self.add_weight(from, to, 1)
    }

    pub(crate) fn remove_edge(&mut self, from: &ArgumentId, to: &ArgumentId) -> Option<u64> {
        self.weights.remove(&(from.clone(), to.clone()))
    }

    pub(crate) fn retain_edges(&mut self, keep: impl Fn(u64) -> bool) {
        self.weights.retain(|_, w| keep(*w));
    }

    /// Pointwise sum of edge weights. Node sets must agree.
    pub fn merge(&mut self, other: &ArgumentPreferenceGraph) -> Result<()> {
        if self.nodes != other.nodes {
            return Err(Error::InvalidOrdering(
                "cannot merge preference graphs over different nodes".into(),
            ));
        }
        for ((from, to), &w) in &other.weights {
            *self.weights.entry((from.clone(), to.clone())).or_insert(0) += w;
        }
        Ok(())
    }
}

/// Which steps and arguments feed the preference graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtractionScope {
    /// Only arguments targeting this agent, compared against its action.
    PerAgent(AgentIndex),
    /// All arguments; an argument agrees iff it recommends the action its
    /// target actually took.
    Joint,
}

#[derive(Default)]
struct Counts(HashMap<(usize, usize), u64>);

impl Counts {
    fn episode(
        &mut self,
        episode: &Episode,
        catalog: &ArgumentCatalog,
        scope: ExtractionScope,
    ) -> Result<()> {
        let args = catalog.arguments();
        let mut relevant = Vec::new();
        let mut irrelevant = Vec::new();
        for (index, step) in episode.steps.iter().enumerate() {
            relevant.clear();
            irrelevant.clear();
            let gap = |agent: AgentIndex| Error::DataGap {
                episode: episode.id,
                step: index,
                agent: agent.0,
            };
            let own_action = match scope {
                ExtractionScope::PerAgent(target) => {
                    Some(step.actions.get(&target).ok_or_else(|| gap(target))?)
                }
                ExtractionScope::Joint => None,
            };
            for i in catalog.applicable_indices(&step.state)? {
                let arg = &args[i];
                let taken = match (scope, own_action) {
                    (ExtractionScope::PerAgent(target), Some(action)) => {
                        if arg.target != target {
                            continue;
                        }
                        action
                    }
                    _ => step
                        .actions
                        .get(&arg.target)
                        .ok_or_else(|| gap(arg.target))?,
                };
                if arg.action == *taken {
                    relevant.push(i);
                } else {
                    irrelevant.push(i);
                }
            }
            for &r in &relevant {
                for &i in &irrelevant {
                    *self.0.entry((r, i)).or_insert(0) += 1;
                }
            }
        }
        Ok(())
    }

    fn add(&mut self, other: Counts) {
        for (k, w) in other.0 {
            *self.0.entry(k).or_insert(0) += w;
        }
    }

    fn into_graph(self, catalog: &ArgumentCatalog) -> ArgumentPreferenceGraph {
        let args = catalog.arguments();
        let mut apg = ArgumentPreferenceGraph::new(catalog.ids().cloned());
        apg.weights = self
            .0
            .into_iter()
            .map(|((from, to), w)| ((args[from].id.clone(), args[to].id.clone()), w))
            .collect();
        apg
    }
}

fn check_scope(
    trajectories: &TrajectorySet,
    catalog: &ArgumentCatalog,
    scope: ExtractionScope,
) -> Result<()> {
    if let ExtractionScope::PerAgent(target) = scope {
        target.check(catalog.team_size())?;
        if !trajectories.is_empty() {
            target.check(trajectories.team_size())?;
        }
    }
    Ok(())
}

/// Builds the preference graph of `target` over every logged step.
pub fn build_apg(
    trajectories: &TrajectorySet,
    catalog: &ArgumentCatalog,
    target: AgentIndex,
) -> Result<ArgumentPreferenceGraph> {
    build_apg_scoped(trajectories, catalog, ExtractionScope::PerAgent(target))
}

pub fn build_apg_scoped(
    trajectories: &TrajectorySet,
    catalog: &ArgumentCatalog,
    scope: ExtractionScope,
) -> Result<ArgumentPreferenceGraph> {
    check_scope(trajectories, catalog, scope)?;
    let mut counts = Counts::default();
    for episode in trajectories.episodes() {
        counts.episode(episode, catalog, scope)?;
    }
    Ok(counts.into_graph(catalog))
}

/// Same result as [`build_apg_scoped`], accumulated over `workers` threads
/// on contiguous episode batches.
pub fn build_apg_parallel(
    trajectories: &TrajectorySet,
    catalog: &ArgumentCatalog,
    scope: ExtractionScope,
    workers: usize,
) -> Result<ArgumentPreferenceGraph> {
    check_scope(trajectories, catalog, scope)?;
    let episodes = trajectories.episodes();
    let workers = workers.clamp(1, episodes.len().max(1));
    if workers == 1 {
        return build_apg_scoped(trajectories, catalog, scope);
    }
    let chunk = episodes.len().div_ceil(workers);
    let partials: Vec<Result<Counts>> = std::thread::scope(|s| {
        let handles: Vec<_> = episodes
            .chunks(chunk)
            .map(|batch| {
                s.spawn(move || {
                    let mut counts = Counts::default();
                    for episode in batch {
                        counts.episode(episode, catalog, scope)?;
                    }
                    Ok(counts)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("preference graph worker panicked"))
            .collect()
    });
    let mut total = Counts::default();
    for partial in partials {
        total.add(partial?);
    }
    Ok(total.into_graph(catalog))
}
