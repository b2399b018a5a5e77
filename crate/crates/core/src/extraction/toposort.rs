use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{ArgumentPreferenceGraph, Ordering};
use crate::error::{Error, Result};

/// Kahn's algorithm where the next node is always the ready node ranked
/// highest in `default_ordering`.
///
/// `default_ordering` must list exactly the graph's nodes.
pub fn topological_sort_with_default(
    dag: &ArgumentPreferenceGraph,
    default_ordering: &Ordering,
) -> Result<Ordering> {
    let ranked = default_ordering.ranked();
    let rank: HashMap<_, usize> = ranked.iter().enumerate().map(|(i, id)| (id, i)).collect();
    if let Some(missing) = dag.nodes().iter().find(|n| !rank.contains_key(n)) {
        return Err(Error::MissingNode(missing.to_string()));
    }
    if let Some(extra) = ranked.iter().find(|id| !dag.nodes().contains(*id)) {
        return Err(Error::InvalidOrdering(format!(
            "default ordering lists `{extra}`, which is not a graph node"
        )));
    }

    let n = ranked.len();
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_degree = vec![0usize; n];
    for (from, to) in dag.weights().keys() {
        let (f, t) = (rank[from], rank[to]);
        successors[f].push(t);
        in_degree[t] += 1;
    }

    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| in_degree[i] == 0).map(Reverse).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(Reverse(next)) = ready.pop() {
        out.push(ranked[next].clone());
        for &s in &successors[next] {
            in_degree[s] -= 1;
            if in_degree[s] == 0 {
                ready.push(Reverse(s));
            }
        }
    }
    if out.len() < n {
        return Err(Error::CycleDetected {
            remaining: n - out.len(),
        });
    }
    Ordering::new(out)
}
