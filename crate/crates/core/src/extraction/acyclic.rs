use serde::{Deserialize, Serialize};

use super::ArgumentPreferenceGraph;
use crate::argumentation::ArgumentId;

/// Drops every edge lighter than `threshold`. Nodes are kept.
pub fn prune(apg: &ArgumentPreferenceGraph, threshold: u64) -> ArgumentPreferenceGraph {
    let mut out = apg.clone();
    out.retain_edges(|w| w >= threshold);
    out
}

/// An edge deleted to break a cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedEdge {
    pub from: ArgumentId,
    pub to: ArgumentId,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcyclicGraph {
    pub dag: ArgumentPreferenceGraph,
    /// Cycle-breaking removals in the order they were made. Edges dropped by
    /// pruning are not listed.
    pub removed: Vec<RemovedEdge>,
}

/// Prunes, then removes one minimum-weight edge from a cycle until none is
/// left.
///
/// The cycle examined is the first one depth-first search meets when
/// visiting nodes and successors in lexicographic order. Among its
/// lightest edges, the lexicographically largest `(from, to)` goes.
pub fn convert_to_acyclic(apg: &ArgumentPreferenceGraph, threshold: u64) -> AcyclicGraph {
    let mut dag = prune(apg, threshold);
    let mut removed = Vec::new();
    while let Some(cycle) = find_cycle(&dag) {
        let (from, to, weight) = cycle
            .iter()
            .map(|(f, t)| (f, t, dag.weight(f, t)))
            .min_by(|a, b| a.2.cmp(&b.2).then_with(|| (b.0, b.1).cmp(&(a.0, a.1))))
            .map(|(f, t, w)| (f.clone(), t.clone(), w))
            .expect("a cycle has at least one edge");
        dag.remove_edge(&from, &to);
        log::debug!("removed cycle edge {from} -> {to} (weight {weight})");
        removed.push(RemovedEdge { from, to, weight });
    }
    AcyclicGraph { dag, removed }
}

pub fn is_acyclic(apg: &ArgumentPreferenceGraph) -> bool {
    find_cycle(apg).is_none()
}

/// Edges of the first cycle found, in traversal order.
pub fn find_cycle(apg: &ArgumentPreferenceGraph) -> Option<Vec<(ArgumentId, ArgumentId)>> {
    let nodes: Vec<&ArgumentId> = apg.nodes().iter().collect();
    let index = |id: &ArgumentId| nodes.binary_search(&id).expect("edge endpoints are nodes");
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    // weights iterate in (from, to) order, so successor lists come out sorted
    for (from, to) in apg.weights().keys() {
        succ[index(from)].push(index(to));
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnStack,
        Done,
    }
    let mut mark = vec![Mark::New; nodes.len()];
    for root in 0..nodes.len() {
        if mark[root] != Mark::New {
            continue;
        }
        // (node, next successor position)
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::OnStack;
        while let Some(top) = stack.last_mut() {
            let (node, pos) = *top;
            if let Some(&next) = succ[node].get(pos) {
                top.1 += 1;
                match mark[next] {
                    Mark::New => {
                        mark[next] = Mark::OnStack;
                        stack.push((next, 0));
                    }
                    Mark::OnStack => {
                        let start = stack
                            .iter()
                            .position(|&(n, _)| n == next)
                            .expect("on-stack node is in the stack");
                        let path: Vec<usize> = stack[start..].iter().map(|&(n, _)| n).collect();
                        let edges = path
                            .iter()
                            .zip(path.iter().skip(1).chain(std::iter::once(&next)))
                            .map(|(&a, &b)| (nodes[a].clone(), nodes[b].clone()))
                            .collect();
                        return Some(edges);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}
