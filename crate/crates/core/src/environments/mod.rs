//! Simulators and state generators that produce trajectories to learn from.

pub mod mountain_car;
mod runner;
pub mod takeaway;

pub use mountain_car::{
    generate_mc_catalog, is_terminal, mc_reset, mc_step, random_value_agent, scripted_mc_policy,
    GridSpec, MountainCarAction, MountainCarParams, MountainCarState, ScriptedMountainCar,
};
pub use runner::{
    episode_rng, mean_std, run_episodes, run_range, EnvConfig, Environment, EpisodeRecord,
    EpisodeStats, RunOptions, RunOutput, ENVIRONMENT_NAMES,
};
pub use takeaway::{
    generate_takeaway_catalog, generate_takeaway_states, ground_truth_ordering, ground_truth_team,
    sample_takeaway_state, GroundTruthStyle, Point, TakeawayFeatureState, TakeawayParams,
};
