use std::collections::BTreeMap;

use serde::Serialize;

use crate::agents::{AgentIndex, JointPolicy};
use crate::error::{Error, Result};
use crate::trajectories::{TimeStep, TrajectorySet};

/// Agreement between a policy and logged behaviour, per agent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityReport {
    pub per_agent: BTreeMap<AgentIndex, f64>,
    pub step_counts: BTreeMap<AgentIndex, usize>,
}

impl FidelityReport {
    /// Agreement over all agents and steps, each logged action counted once.
    pub fn overall(&self) -> f64 {
        let total: usize = self.step_counts.values().sum();
        let agreed: f64 = self
            .per_agent
            .iter()
            .map(|(a, f)| f * self.step_counts[a] as f64)
            .sum();
        agreed / total as f64
    }

    pub fn render(&self) -> String {
        let mut out = String::from("agent  steps  fidelity\n");
        for (agent, f) in &self.per_agent {
            out.push_str(&format!(
                "{:<5}  {:>5}  {:.4}\n",
                agent.get() + 1,
                self.step_counts[agent],
                f
            ));
        }
        out.push_str(&format!("all           {:.4}\n", self.overall()));
        out
    }
}

fn tally(
    policy: &dyn JointPolicy,
    steps: &[&TimeStep],
    team_size: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut agree = vec![0; team_size];
    let mut seen = vec![0; team_size];
    for step in steps {
        let chosen = policy.joint_action(&step.state)?;
        if chosen.len() != team_size {
            return Err(Error::TeamSizeMismatch {
                expected: team_size,
                found: chosen.len(),
            });
        }
        for (agent, logged) in &step.actions {
            seen[agent.get()] += 1;
            if chosen[agent.get()] == *logged {
                agree[agent.get()] += 1;
            }
        }
    }
    Ok((agree, seen))
}

/// Fraction of logged steps where `policy` picks the logged action, per
/// agent. Agents with no logged actions are left out.
pub fn fidelity(policy: &dyn JointPolicy, trajectories: &TrajectorySet) -> Result<FidelityReport> {
    fidelity_parallel(policy, trajectories, 1)
}

/// [`fidelity`] over `workers` threads. Counts are integers reduced in a
/// fixed order, so the report does not depend on `workers`.
pub fn fidelity_parallel(
    policy: &dyn JointPolicy,
    trajectories: &TrajectorySet,
    workers: usize,
) -> Result<FidelityReport> {
    let team_size = trajectories.team_size();
    if policy.team_size() != team_size {
        return Err(Error::TeamSizeMismatch {
            expected: team_size,
            found: policy.team_size(),
        });
    }
    let steps: Vec<&TimeStep> = trajectories
        .episodes()
        .iter()
        .flat_map(|e| &e.steps)
        .collect();
    if steps.is_empty() {
        return Err(Error::NoData);
    }
    let workers = workers.clamp(1, steps.len());
    let parts: Vec<Result<(Vec<usize>, Vec<usize>)>> = if workers == 1 {
        vec![tally(policy, &steps, team_size)]
    } else {
        let chunk = steps.len().div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = steps
                .chunks(chunk)
                .map(|part| scope.spawn(move || tally(policy, part, team_size)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("fidelity worker panicked"))
                .collect()
        })
    };
    let mut agree = vec![0; team_size];
    let mut seen = vec![0; team_size];
    for part in parts {
        let (a, s) = part?;
        for i in 0..team_size {
            agree[i] += a[i];
            seen[i] += s[i];
        }
    }
    let mut report = FidelityReport {
        per_agent: BTreeMap::new(),
        step_counts: BTreeMap::new(),
    };
    for i in (0..team_size).filter(|&i| seen[i] > 0) {
        report
            .per_agent
            .insert(AgentIndex(i), agree[i] as f64 / seen[i] as f64);
        report.step_counts.insert(AgentIndex(i), seen[i]);
    }
    Ok(report)
}
