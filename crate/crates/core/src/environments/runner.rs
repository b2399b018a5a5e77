use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mountain_car::{
    is_terminal, mc_reset, mc_step, GridSpec, MountainCarParams, MountainCarState,
};
use super::takeaway::{
    generate_takeaway_catalog, sample_takeaway_state, Point, TakeawayFeatureState, TakeawayParams,
    KEEPERS, TAKERS,
};
use crate::agents::{AgentIndex, ArgumentCatalog, JointPolicy, StateVector};
use crate::error::{Error, Result};
use crate::trajectories::{Episode, TimeStep, TrajectorySet};

/// Environment settings as read from a run config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub seed: Option<u64>,
    pub mc: MountainCarParams,
    /// Argument grid for Mountain Car catalogs.
    pub grid: GridSpec,
    pub takeaway: TakeawayParams,
}

impl EnvConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: EnvConfig = serde_json::from_str(text)?;
        config.mc.validate()?;
        config.grid.validate()?;
        config.takeaway.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Clone, Debug)]
pub enum Environment {
    MountainCar(MountainCarParams),
    TakeawaySynth {
        params: TakeawayParams,
        catalog: Arc<ArgumentCatalog>,
    },
}

pub const ENVIRONMENT_NAMES: [&str; 2] = ["mountain_car", "takeaway_synth"];

impl Environment {
    pub fn mountain_car(params: MountainCarParams) -> Result<Self> {
        params.validate()?;
        Ok(Environment::MountainCar(params))
    }

    pub fn takeaway(params: TakeawayParams) -> Result<Self> {
        let catalog = Arc::new(generate_takeaway_catalog(&params)?);
        Ok(Environment::TakeawaySynth { params, catalog })
    }

    pub fn from_name(name: &str, config: &EnvConfig) -> Result<Self> {
        match name {
            "mountain_car" => Self::mountain_car(config.mc.clone()),
            "takeaway_synth" => Self::takeaway(config.takeaway.clone()),
            other => Err(Error::Config(format!(
                "unknown environment `{other}` (expected one of {ENVIRONMENT_NAMES:?})"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Environment::MountainCar(_) => ENVIRONMENT_NAMES[0],
            Environment::TakeawaySynth { .. } => ENVIRONMENT_NAMES[1],
        }
    }

    pub fn team_size(&self) -> usize {
        match self {
            Environment::MountainCar(_) => 1,
            Environment::TakeawaySynth { .. } => TAKERS,
        }
    }

    pub fn feature_names(&self) -> Vec<String> {
        let probe = match self {
            Environment::MountainCar(_) => MountainCarState {
                position: 0.0,
                velocity: 0.0,
            }
            .to_state_vector(),
            Environment::TakeawaySynth { .. } => TakeawayFeatureState {
                takers: [Point::new(0.0, 0.0); TAKERS],
                keepers: [Point::new(0.0, 0.0); KEEPERS],
                holder: 0,
            }
            .to_state_vector(),
        };
        probe.names().map(str::to_string).collect()
    }
}

/// Outcome of one episode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub steps: usize,
    pub success: bool,
    /// Seconds spent in the whole episode.
    pub wall_time: f64,
    pub decisions: usize,
    /// Seconds spent inside the policy, summed over decisions.
    pub decision_time: f64,
    /// Sum of squared per-decision seconds.
    pub decision_time_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub episodes: usize,
    pub mean_steps: f64,
    pub std_steps: f64,
    pub mean_wall_time: f64,
    pub std_wall_time: f64,
    pub success_rate: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.len() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EpisodeStats {
    pub fn from_records(records: &[EpisodeRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::NoData);
        }
        let (mean_steps, std_steps) = mean_std(records.iter().map(|r| r.steps as f64));
        let (mean_wall_time, std_wall_time) = mean_std(records.iter().map(|r| r.wall_time));
        let successes = records.iter().filter(|r| r.success).count();
        Ok(EpisodeStats {
            episodes: records.len(),
            mean_steps,
            std_steps,
            mean_wall_time,
            std_wall_time,
            success_rate: successes as f64 / records.len() as f64,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub episodes: usize,
    pub seed: u64,
    /// Keep a [`TrajectorySet`] of everything the policy saw and did.
    pub log: bool,
    pub workers: usize,
}

impl RunOptions {
    pub fn new(episodes: usize, seed: u64) -> Self {
        RunOptions {
            episodes,
            seed,
            log: false,
            workers: 1,
        }
    }

    pub fn logged(self) -> Self {
        RunOptions { log: true, ..self }
    }

    pub fn workers(self, workers: usize) -> Self {
        RunOptions { workers, ..self }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub stats: EpisodeStats,
    pub records: Vec<EpisodeRecord>,
    pub trajectories: Option<TrajectorySet>,
}

/// Random stream of episode `index` under `seed`.
pub fn episode_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Recorder {
    log: bool,
    steps: Vec<TimeStep>,
    decisions: usize,
    decision_time: f64,
    decision_time_sq: f64,
}

impl Recorder {
    fn act(&mut self, policy: &dyn JointPolicy, state: StateVector) -> Result<Vec<String>> {
        let start = Instant::now();
        let actions = policy.joint_action(&state)?;
        if actions.len() != policy.team_size() {
            return Err(Error::TeamSizeMismatch {
                expected: policy.team_size(),
                found: actions.len(),
            });
        }
        let took = start.elapsed().as_secs_f64();
        self.decisions += 1;
        self.decision_time += took;
        self.decision_time_sq += took * took;
        if self.log {
            self.steps.push(TimeStep {
                actions: actions
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (AgentIndex(i), a.clone()))
                    .collect::<BTreeMap<_, _>>(),
                state,
            });
        }
        Ok(actions)
    }
}

fn run_one(
    policy: &dyn JointPolicy,
    env: &Environment,
    seed: u64,
    index: u64,
    log: bool,
) -> Result<(EpisodeRecord, Option<Episode>)> {
    let started = Instant::now();
    let mut rng = episode_rng(seed, index);
    let mut rec = Recorder {
        log,
        steps: Vec::new(),
        decisions: 0,
        decision_time: 0.0,
        decision_time_sq: 0.0,
    };
    let (steps, success) = match env {
        Environment::MountainCar(params) => {
            let mut state = mc_reset(&mut rng);
            let mut steps = 0;
            let mut success = false;
            while steps < params.max_steps {
                let actions = rec.act(policy, state.to_state_vector())?;
                state = mc_step(state, &actions[0], params)?;
                steps += 1;
                if is_terminal(state, params) {
                    success = true;
                    break;
                }
            }
            (steps, success)
        }
        Environment::TakeawaySynth { params, catalog } => {
            for _ in 0..params.episode_length {
                let state = sample_takeaway_state(&mut rng, catalog, params)?;
                rec.act(policy, state.to_state_vector())?;
            }
            (params.episode_length, true)
        }
    };
    let record = EpisodeRecord {
        steps,
        success,
        wall_time: started.elapsed().as_secs_f64(),
        decisions: rec.decisions,
        decision_time: rec.decision_time,
        decision_time_sq: rec.decision_time_sq,
    };
    let episode = log.then_some(Episode {
        id: index,
        steps: rec.steps,
    });
    Ok((record, episode))
}

/// Runs `options.episodes` episodes of `policy` in `env`.
///
/// Episode `k` draws from its own stream of the root seed, so results and
/// logged trajectories are identical for every worker count. Wall-clock
/// figures naturally vary.
pub fn run_episodes(
    policy: &dyn JointPolicy,
    env: &Environment,
    options: &RunOptions,
) -> Result<RunOutput> {
    run_range(policy, env, options, 0)
}

/// [`run_episodes`] with episode indices starting at `first`.
pub fn run_range(
    policy: &dyn JointPolicy,
    env: &Environment,
    options: &RunOptions,
    first: u64,
) -> Result<RunOutput> {
    if options.episodes == 0 {
        return Err(Error::Config("episodes must be at least 1".into()));
    }
    if policy.team_size() != env.team_size() {
        return Err(Error::TeamSizeMismatch {
            expected: env.team_size(),
            found: policy.team_size(),
        });
    }
    let indices: Vec<u64> = (first..first + options.episodes as u64).collect();
    let workers = options.workers.clamp(1, indices.len());
    let chunk = indices.len().div_ceil(workers);
    let results: Vec<(EpisodeRecord, Option<Episode>)> = if workers == 1 {
        indices
            .iter()
            .map(|&k| run_one(policy, env, options.seed, k, options.log))
            .collect::<Result<_>>()?
    } else {
        let parts: Vec<Result<Vec<_>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = indices
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|&k| run_one(policy, env, options.seed, k, options.log))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("episode worker panicked"))
                .collect()
        });
        let mut all = Vec::with_capacity(indices.len());
        for part in parts {
            all.extend(part?);
        }
        all
    };

    let mut records = Vec::with_capacity(results.len());
    let mut trajectories = if options.log {
        Some(TrajectorySet::empty(env.feature_names(), env.team_size())?)
    } else {
        None
    };
    for (record, episode) in results {
        records.push(record);
        if let (Some(set), Some(ep)) = (trajectories.as_mut(), episode) {
            set.push_episode(ep)?;
        }
    }
    Ok(RunOutput {
        stats: EpisodeStats::from_records(&records)?,
        records,
        trajectories,
    })
}
