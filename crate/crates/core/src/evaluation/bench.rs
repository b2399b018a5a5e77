use serde::Serialize;

use crate::agents::JointPolicy;
use crate::environments::{run_range, Environment, EpisodeStats, RunOptions};
use crate::error::Result;

/// Episodes run and discarded before measuring.
pub const WARMUP_EPISODES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub stats: EpisodeStats,
    pub decisions: usize,
    /// Seconds per decision.
    pub mean_decision_latency: f64,
    pub std_decision_latency: f64,
}

/// Runs `episodes` measured episodes on one thread after a warm-up.
///
/// Warm-up episodes use indices past the measured ones, so step counts and
/// outcomes match [`run_episodes`](crate::environments::run_episodes) with
/// the same seed.
pub fn benchmark_deployment(
    policy: &dyn JointPolicy,
    env: &Environment,
    episodes: usize,
    seed: u64,
) -> Result<BenchmarkReport> {
    let options = RunOptions::new(episodes, seed);
    run_range(
        policy,
        env,
        &RunOptions::new(WARMUP_EPISODES, seed),
        episodes as u64,
    )?;
    let out = run_range(policy, env, &options, 0)?;
    let decisions: usize = out.records.iter().map(|r| r.decisions).sum();
    let total: f64 = out.records.iter().map(|r| r.decision_time).sum();
    let total_sq: f64 = out.records.iter().map(|r| r.decision_time_sq).sum();
    let n = decisions.max(1) as f64;
    let mean = total / n;
    let var = (total_sq / n - mean * mean).max(0.0);
    Ok(BenchmarkReport {
        stats: out.stats,
        decisions,
        mean_decision_latency: mean,
        std_decision_latency: var.sqrt(),
    })
}
