//! Mountain Car: a deterministic simulator, the grid argument catalog and a
//! scripted momentum policy.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::condition::{POSITION_FEATURE, VELOCITY_FEATURE};
use crate::agents::{
    AAAgentModel, ActionArgument, AgentIndex, ArgumentCatalog, ConditionSpec, JointPolicy,
    StateVector, ValueAssignment,
};
use crate::argumentation::ArgumentId;
use crate::error::{Error, Result};

pub const POSITION_RANGE: (f64, f64) = (-1.2, 0.6);
pub const VELOCITY_RANGE: (f64, f64) = (-0.07, 0.07);
pub const START_RANGE: (f64, f64) = (-0.6, -0.4);

/// Action labels in push direction order.
pub const MC_ACTIONS: [&str; 3] = ["push_left", "no_push", "push_right"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MountainCarAction {
    PushLeft,
    NoPush,
    PushRight,
}

impl MountainCarAction {
    pub const ALL: [MountainCarAction; 3] = [
        MountainCarAction::PushLeft,
        MountainCarAction::NoPush,
        MountainCarAction::PushRight,
    ];

    pub fn label(self) -> &'static str {
        MC_ACTIONS[self as usize]
    }

    fn direction(self) -> f64 {
        self as usize as f64 - 1.0
    }
}

impl FromStr for MountainCarAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.label() == s)
            .ok_or_else(|| Error::UnknownAction(s.to_string()))
    }
}

impl fmt::Display for MountainCarAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MountainCarState {
    pub position: f64,
    pub velocity: f64,
}

impl MountainCarState {
    pub fn to_state_vector(self) -> StateVector {
        StateVector::from_pairs([
            (POSITION_FEATURE, self.position),
            (VELOCITY_FEATURE, self.velocity),
        ])
        .expect("simulator states are finite")
    }

    pub fn from_state_vector(state: &StateVector) -> Result<Self> {
        Ok(MountainCarState {
            position: state.get(POSITION_FEATURE)?,
            velocity: state.get(VELOCITY_FEATURE)?,
        })
    }

    pub fn in_bounds(self) -> bool {
        (POSITION_RANGE.0..=POSITION_RANGE.1).contains(&self.position)
            && (VELOCITY_RANGE.0..=VELOCITY_RANGE.1).contains(&self.velocity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MountainCarParams {
    pub force: f64,
    pub gravity_scale: f64,
    pub goal_position: f64,
    pub max_steps: usize,
}

impl Default for MountainCarParams {
    fn default() -> Self {
        MountainCarParams {
            force: 0.001,
            gravity_scale: 0.0025,
            goal_position: 0.5,
            max_steps: 999,
        }
    }
}

impl MountainCarParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.force)
            || !positive(self.gravity_scale)
            || !positive(self.goal_position)
            || self.goal_position > POSITION_RANGE.1
            || self.max_steps == 0
        {
            return Err(Error::Config(format!(
                "invalid mountain car parameters {self:?}"
            )));
        }
        Ok(())
    }
}

/// One simulator update.
pub fn mc_step_action(
    state: MountainCarState,
    action: MountainCarAction,
    params: &MountainCarParams,
) -> MountainCarState {
    let velocity = (state.velocity + action.direction() * params.force
        - params.gravity_scale * (3.0 * state.position).cos())
    .clamp(VELOCITY_RANGE.0, VELOCITY_RANGE.1);
    let position = (state.position + velocity).clamp(POSITION_RANGE.0, POSITION_RANGE.1);
    let velocity = if position == POSITION_RANGE.0 && velocity < 0.0 {
        0.0
    } else {
        velocity
    };
    MountainCarState { position, velocity }
}

pub fn mc_step(
    state: MountainCarState,
    action: &str,
    params: &MountainCarParams,
) -> Result<MountainCarState> {
    Ok(mc_step_action(state, action.parse()?, params))
}

pub fn is_terminal(state: MountainCarState, params: &MountainCarParams) -> bool {
    state.position >= params.goal_position
}

/// Start state: position uniform in the start range, at rest.
pub fn mc_reset<R: Rng + ?Sized>(rng: &mut R) -> MountainCarState {
    MountainCarState {
        position: rng.gen_range(START_RANGE.0..START_RANGE.1),
        velocity: 0.0,
    }
}

/// Push in the direction of motion; push left from rest.
pub fn scripted_mc_policy(state: MountainCarState) -> MountainCarAction {
    if state.velocity > 0.0 {
        MountainCarAction::PushRight
    } else {
        MountainCarAction::PushLeft
    }
}

/// [`scripted_mc_policy`] as a single-agent [`JointPolicy`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ScriptedMountainCar;

impl JointPolicy for ScriptedMountainCar {
    fn team_size(&self) -> usize {
        1
    }

    fn joint_action(&self, state: &StateVector) -> Result<Vec<String>> {
        let s = MountainCarState::from_state_vector(state)?;
        Ok(vec![scripted_mc_policy(s).label().to_string()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub position_bins: usize,
    pub velocity_bins: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            position_bins: 20,
            velocity_bins: 20,
        }
    }
}

/// Boundary `k` of `bins` equal sub-ranges of `range`. The outer boundaries
/// are the exact range ends.
fn boundary(range: (f64, f64), bins: usize, k: usize) -> f64 {
    if k == bins {
        range.1
    } else {
        range.0 + (range.1 - range.0) / bins as f64 * k as f64
    }
}

fn bin_of(range: (f64, f64), bins: usize, x: f64) -> Option<usize> {
    if !(range.0..=range.1).contains(&x) {
        return None;
    }
    (0..bins)
        .find(|&k| x < boundary(range, bins, k + 1))
        .or(Some(bins - 1))
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.position_bins == 0 || self.velocity_bins == 0 {
            return Err(Error::Config("grid bins must be at least 1".into()));
        }
        Ok(())
    }

    pub fn position_bin(&self, i: usize) -> (f64, f64) {
        (
            boundary(POSITION_RANGE, self.position_bins, i),
            boundary(POSITION_RANGE, self.position_bins, i + 1),
        )
    }

    pub fn velocity_bin(&self, j: usize) -> (f64, f64) {
        (
            boundary(VELOCITY_RANGE, self.velocity_bins, j),
            boundary(VELOCITY_RANGE, self.velocity_bins, j + 1),
        )
    }

    /// The `(position_bin, velocity_bin)` cell containing `state`, if in range.
    pub fn cell_of(&self, state: MountainCarState) -> Option<(usize, usize)> {
        Some((
            bin_of(POSITION_RANGE, self.position_bins, state.position)?,
            bin_of(VELOCITY_RANGE, self.velocity_bins, state.velocity)?,
        ))
    }

    pub fn argument_id(i: usize, j: usize, action: MountainCarAction) -> ArgumentId {
        ArgumentId::new(format!("p{i:02}_v{j:02}_{}", action.label())).expect("non-empty id")
    }
}

/// One argument per (position bin, velocity bin, action), all for agent 0.
///
/// Bins are half-open `[lo, hi)` except the last in each dimension, which is
/// closed so the grid partitions the whole state space.
pub fn generate_mc_catalog(grid: &GridSpec) -> Result<ArgumentCatalog> {
    grid.validate()?;
    let mut arguments =
        Vec::with_capacity(grid.position_bins * grid.velocity_bins * MC_ACTIONS.len());
    for i in 0..grid.position_bins {
        let (pos_lo, pos_hi) = grid.position_bin(i);
        for j in 0..grid.velocity_bins {
            let (vel_lo, vel_hi) = grid.velocity_bin(j);
            let mut params = vec![
                ("pos_lo", pos_lo.into()),
                ("pos_hi", pos_hi.into()),
                ("vel_lo", vel_lo.into()),
                ("vel_hi", vel_hi.into()),
            ];
            if i + 1 == grid.position_bins {
                params.push(("pos_hi_closed", 1.0.into()));
            }
            if j + 1 == grid.velocity_bins {
                params.push(("vel_hi_closed", 1.0.into()));
            }
            let condition = ConditionSpec::new("interval2d", params);
            for action in MountainCarAction::ALL {
                arguments.push(ActionArgument {
                    id: GridSpec::argument_id(i, j, action),
                    target: AgentIndex(0),
                    action: action.label().to_string(),
                    condition: condition.clone(),
                });
            }
        }
    }
    ArgumentCatalog::new(1, MC_ACTIONS, arguments)
}

/// An agent over `catalog` whose values are a uniformly random permutation
/// of `1..=N`. Falls back to `no_push`.
pub fn random_value_agent<R: Rng + ?Sized>(
    catalog: Arc<ArgumentCatalog>,
    rng: &mut R,
) -> Result<AAAgentModel> {
    let mut values: Vec<i64> = (1..=catalog.len() as i64).collect();
    values.shuffle(rng);
    let assignment = ValueAssignment::new(catalog.ids().cloned().zip(values).collect())?;
    AAAgentModel::new(
        catalog,
        assignment,
        AgentIndex(0),
        MountainCarAction::NoPush.label(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn st(position: f64, velocity: f64) -> MountainCarState {
        MountainCarState { position, velocity }
    }

    #[test]
    fn step_from_rest_matches_hand_evaluation() {
        let p = MountainCarParams::default();
        let next = mc_step(st(-0.5, 0.0), "no_push", &p).unwrap();
        // v' = -0.0025 cos(-1.5), x' = -0.5 + v'
        let v = -0.0025 * (-1.5f64).cos();
        assert!((v - (-0.000176843)).abs() < 1e-9);
        assert!((next.velocity - v).abs() < 1e-15);
        assert!((next.position - (-0.5 + v)).abs() < 1e-15);
    }

    #[test]
    fn step_at_speed_limit() {
        let p = MountainCarParams::default();
        // At the origin gravity pulls back by 0.0025, so the push cannot hold 0.07.
        let next = mc_step(st(0.0, 0.07), "push_right", &p).unwrap();
        assert!((next.velocity - (0.07 + 0.001 - 0.0025)).abs() < 1e-15);
        // Past pi/6 gravity helps, and the update clamps to the bound.
        let next = mc_step(st(0.55, 0.07), "push_right", &p).unwrap();
        assert_eq!(next.velocity, 0.07);
    }

    #[test]
    fn left_wall_stops_the_car() {
        let p = MountainCarParams::default();
        let next = mc_step(st(-1.2, -0.05), "push_left", &p).unwrap();
        assert_eq!(next, st(-1.2, 0.0));
    }

    #[test]
    fn unknown_action_rejected() {
        let p = MountainCarParams::default();
        assert!(matches!(
            mc_step(st(0.0, 0.0), "hover", &p),
            Err(Error::UnknownAction(_))
        ));
    }

    #[test]
    fn reset_is_seeded_and_in_range() {
        let a = mc_reset(&mut ChaCha8Rng::seed_from_u64(11));
        let b = mc_reset(&mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let s = mc_reset(&mut rng);
            assert!((-0.6..=-0.4).contains(&s.position));
            assert_eq!(s.velocity, 0.0);
        }
        let differing = (0..100u64)
            .filter(|&k| {
                mc_reset(&mut ChaCha8Rng::seed_from_u64(2 * k))
                    != mc_reset(&mut ChaCha8Rng::seed_from_u64(2 * k + 1))
            })
            .count();
        assert_eq!(differing, 100);
    }

    #[test]
    fn scripted_policy_rules() {
        assert_eq!(
            scripted_mc_policy(st(0.0, 0.01)),
            MountainCarAction::PushRight
        );
        assert_eq!(
            scripted_mc_policy(st(0.0, -0.01)),
            MountainCarAction::PushLeft
        );
        assert_eq!(
            scripted_mc_policy(st(0.0, 0.0)),
            MountainCarAction::PushLeft
        );
    }

    #[test]
    fn default_catalog_has_1200_arguments() {
        let cat = generate_mc_catalog(&GridSpec::default()).unwrap();
        assert_eq!(cat.len(), 1200);
        let (lo, hi) = GridSpec::default().position_bin(0);
        assert_eq!(lo, -1.2);
        assert!((hi - (-1.11)).abs() < 1e-12);
        let (vlo, vhi) = GridSpec::default().velocity_bin(0);
        assert_eq!(vlo, -0.07);
        assert!((vhi - (-0.063)).abs() < 1e-12);
        assert_eq!(GridSpec::default().position_bin(19).1, 0.6);
    }

    #[test]
    fn degenerate_grid_covers_everything() {
        let grid = GridSpec {
            position_bins: 1,
            velocity_bins: 1,
        };
        let cat = generate_mc_catalog(&grid).unwrap();
        assert_eq!(cat.len(), 3);
        for s in [st(-1.2, -0.07), st(0.6, 0.07), st(0.0, 0.0)] {
            assert_eq!(
                cat.applicable_arguments(&s.to_state_vector())
                    .unwrap()
                    .len(),
                3
            );
        }
        assert!(generate_mc_catalog(&GridSpec {
            position_bins: 0,
            velocity_bins: 1
        })
        .is_err());
    }

    #[test]
    fn boundary_states_fall_in_top_bins() {
        let grid = GridSpec::default();
        let cat = generate_mc_catalog(&grid).unwrap();
        let top = st(0.6, 0.07);
        let applicable = cat.applicable_arguments(&top.to_state_vector()).unwrap();
        assert_eq!(applicable.len(), 3);
        assert!(applicable
            .iter()
            .all(|a| a.id.as_str().starts_with("p19_v19_")));
        assert_eq!(grid.cell_of(top), Some((19, 19)));
        let (edge, _) = grid.position_bin(1);
        assert_eq!(grid.cell_of(st(edge, 0.0)).unwrap().0, 1);
    }

    #[test]
    fn step_preserves_bounds() {
        let p = MountainCarParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let s = st(
                rng.gen_range(POSITION_RANGE.0..=POSITION_RANGE.1),
                rng.gen_range(VELOCITY_RANGE.0..=VELOCITY_RANGE.1),
            );
            for a in MountainCarAction::ALL {
                assert!(mc_step_action(s, a, &p).in_bounds());
            }
        }
    }
}
