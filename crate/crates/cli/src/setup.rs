//! Environment and policy construction shared by the commands.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use vaf_extract::agents::{ArgumentCatalog, JointPolicy, TeamModel};
use vaf_extract::environments::mountain_car::MC_ACTIONS;
use vaf_extract::environments::{
    episode_rng, generate_mc_catalog, ground_truth_team, random_value_agent, EnvConfig,
    Environment, GroundTruthStyle, ScriptedMountainCar, ENVIRONMENT_NAMES,
};

use crate::error::{CliError, CliResult};
use crate::policy::{load_team, PolicySpec};
use crate::run_dir::RunDir;

pub struct EnvSetup {
    pub env: Environment,
    pub catalog: Arc<ArgumentCatalog>,
    pub seed: u64,
}

/// Stream reserved for drawing ground-truth value assignments.
const GROUND_TRUTH_STREAM: u64 = u64::MAX;

pub fn environment(
    name: &str,
    config_path: Option<&Path>,
    seed: Option<u64>,
    run: &mut RunDir,
) -> CliResult<EnvSetup> {
    if !ENVIRONMENT_NAMES.contains(&name) {
        return Err(CliError::usage(format!(
            "unknown environment `{name}` (expected one of {})",
            ENVIRONMENT_NAMES.join(", ")
        )));
    }
    let config = match config_path {
        Some(path) => {
            run.input(path)?;
            EnvConfig::load(path)?
        }
        None => EnvConfig::default(),
    };
    let seed = seed.or(config.seed).ok_or_else(|| {
        CliError::usage("a seed is required: pass --seed or set `seed` in the config")
    })?;
    let env = Environment::from_name(name, &config)?;
    let catalog = match &env {
        Environment::MountainCar(_) => Arc::new(generate_mc_catalog(&config.grid)?),
        Environment::TakeawaySynth { catalog, .. } => catalog.clone(),
    };
    run.param("env", name);
    run.param("seed", seed);
    Ok(EnvSetup { env, catalog, seed })
}

pub enum LoadedPolicy {
    Scripted,
    Team(TeamModel),
}

impl LoadedPolicy {
    pub fn as_policy(&self) -> &dyn JointPolicy {
        match self {
            LoadedPolicy::Scripted => &ScriptedMountainCar,
            LoadedPolicy::Team(t) => t,
        }
    }

    pub fn alphabet(&self) -> BTreeSet<String> {
        match self {
            LoadedPolicy::Scripted => MC_ACTIONS.iter().map(|s| s.to_string()).collect(),
            LoadedPolicy::Team(t) => t.catalog().actions().clone(),
        }
    }
}

/// Ground-truth team for `setup`, drawn from the seed's reserved stream.
pub fn ground_truth(setup: &EnvSetup, style: GroundTruthStyle) -> CliResult<TeamModel> {
    let mut rng = episode_rng(setup.seed, GROUND_TRUTH_STREAM);
    Ok(match &setup.env {
        Environment::MountainCar(_) => {
            TeamModel::single(random_value_agent(setup.catalog.clone(), &mut rng)?)?
        }
        Environment::TakeawaySynth { .. } => {
            ground_truth_team(setup.catalog.clone(), style, &mut rng)?
        }
    })
}

/// A policy that exists without an environment: the scripted controller or
/// model files.
pub fn standalone_policy(spec: &PolicySpec, run: &mut RunDir) -> CliResult<LoadedPolicy> {
    match spec {
        PolicySpec::Scripted => Ok(LoadedPolicy::Scripted),
        PolicySpec::Model(path) => Ok(LoadedPolicy::Team(load_team(path, run)?)),
        PolicySpec::GroundTruth => Err(CliError::usage(
            "ground_truth only exists inside `gen`; pass model:<gen output>/ground_truth",
        )),
    }
}

pub fn check_scripted_env(spec: &LoadedPolicy, env: &Environment) -> CliResult<()> {
    if matches!(spec, LoadedPolicy::Scripted) && !matches!(env, Environment::MountainCar(_)) {
        return Err(CliError::usage(
            "the scripted policy only drives mountain_car",
        ));
    }
    Ok(())
}
