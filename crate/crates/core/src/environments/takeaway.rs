//! Synthetic takeaway: three takers defending against four keepers, sampled
//! as independent feature states.
//!
//! Takers are agents `0..3`. One keeper holds the ball; a taker either
//! tackles the holder or marks one of the keepers.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::condition::takeaway_features as feat;
use crate::agents::{
    AAAgentModel, ActionArgument, AgentIndex, ArgumentCatalog, ConditionSpec, ParamValue,
    StateVector, TeamModel,
};
use crate::argumentation::ArgumentId;
use crate::error::{Error, Result};
use crate::extraction::{ordering_to_values, Ordering};

pub const TAKERS: usize = 3;
pub const KEEPERS: usize = 4;
pub const TACKLE: &str = "tackle";

/// `mark_k1 ..= mark_k4`; keepers are 1-based.
pub fn mark_action(keeper: usize) -> String {
    format!("mark_k{keeper}")
}

pub fn takeaway_actions() -> Vec<String> {
    std::iter::once(TACKLE.to_string())
        .chain((1..=KEEPERS).map(mark_action))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TakeawayParams {
    /// Side of the square field players are placed on.
    pub field_size: f64,
    /// Minimum openness for a keeper to count as open.
    pub open_threshold: f64,
    /// Minimum distance to the nearest taker for a keeper to count as far.
    pub far_threshold: f64,
    /// States per episode.
    pub episode_length: usize,
    /// Draws allowed before giving up on a state in which every taker has an
    /// applicable argument.
    pub max_resample: usize,
}

impl Default for TakeawayParams {
    fn default() -> Self {
        TakeawayParams {
            field_size: 40.0,
            open_threshold: 0.7,
            far_threshold: 15.0,
            episode_length: 20,
            max_resample: 1000,
        }
    }
}

impl TakeawayParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.field_size.is_finite() && self.field_size > 0.0)
            || !self.open_threshold.is_finite()
            || !self.far_threshold.is_finite()
            || self.episode_length == 0
            || self.max_resample == 0
        {
            return Err(Error::Config(format!(
                "invalid takeaway parameters {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Player positions; every feature is derived from these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TakeawayFeatureState {
    pub takers: [Point; TAKERS],
    pub keepers: [Point; KEEPERS],
    /// 0-based index of the keeper holding the ball.
    pub holder: usize,
}

impl TakeawayFeatureState {
    pub fn ball_dist(&self, taker: usize) -> f64 {
        self.takers[taker].dist(self.keepers[self.holder])
    }

    pub fn keeper_dist(&self, taker: usize, keeper: usize) -> f64 {
        self.takers[taker].dist(self.keepers[keeper])
    }

    /// Angle in degrees at the holder between the keeper and the taker. The
    /// holder's own angle is 180.
    pub fn keeper_angle(&self, taker: usize, keeper: usize) -> f64 {
        if keeper == self.holder {
            return 180.0;
        }
        let h = self.keepers[self.holder];
        let (ux, uy) = (self.keepers[keeper].x - h.x, self.keepers[keeper].y - h.y);
        let (wx, wy) = (self.takers[taker].x - h.x, self.takers[taker].y - h.y);
        (ux * wy - uy * wx)
            .abs()
            .atan2(ux * wx + uy * wy)
            .to_degrees()
    }

    /// Smallest taker angle scaled to `[0, 1]`; 90 degrees or more is fully
    /// open. The holder is never open.
    pub fn openness(&self, keeper: usize) -> f64 {
        if keeper == self.holder {
            return 0.0;
        }
        let min = (0..TAKERS)
            .map(|t| self.keeper_angle(t, keeper))
            .fold(f64::INFINITY, f64::min);
        (min / 90.0).clamp(0.0, 1.0)
    }

    pub fn min_taker_dist(&self, keeper: usize) -> f64 {
        (0..TAKERS)
            .map(|t| self.keeper_dist(t, keeper))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_state_vector(&self) -> StateVector {
        let mut s = StateVector::new();
        let mut put = |name: String, v: f64| s.insert(name, v).expect("finite feature");
        put(feat::HOLDER.to_string(), (self.holder + 1) as f64);
        for t in 0..TAKERS {
            put(feat::ball_dist(t + 1), self.ball_dist(t));
            for k in 0..KEEPERS {
                put(feat::keeper_dist(t + 1, k + 1), self.keeper_dist(t, k));
                put(feat::keeper_angle(t + 1, k + 1), self.keeper_angle(t, k));
            }
        }
        for k in 0..KEEPERS {
            put(feat::openness(k + 1), self.openness(k));
            put(feat::min_taker_dist(k + 1), self.min_taker_dist(k));
        }
        s
    }
}

fn argument(id: String, taker: usize, action: String, condition: ConditionSpec) -> ActionArgument {
    ActionArgument {
        id: ArgumentId::new(id).expect("non-empty id"),
        target: AgentIndex(taker - 1),
        action,
        condition,
    }
}

/// The 51-argument catalog: per taker, one tackle argument and four
/// mark arguments per keeper.
pub fn generate_takeaway_catalog(params: &TakeawayParams) -> Result<ArgumentCatalog> {
    params.validate()?;
    let n = |v: usize| ParamValue::from(v as f64);
    let takers = n(TAKERS);
    let mut arguments = Vec::with_capacity(TAKERS * (1 + 4 * KEEPERS));
    for t in 1..=TAKERS {
        arguments.push(argument(
            format!("TackleBall_{t}"),
            t,
            TACKLE.into(),
            ConditionSpec::new(
                "closest_to_ball",
                [("taker", n(t)), ("takers", takers.clone())],
            ),
        ));
        for k in 1..=KEEPERS {
            let keeper = || ("keeper", n(k));
            let mark = mark_action(k);
            arguments.push(argument(
                format!("OpenKeeper_{t}_{k}"),
                t,
                mark.clone(),
                ConditionSpec::new(
                    "keeper_open",
                    [keeper(), ("threshold", params.open_threshold.into())],
                ),
            ));
            arguments.push(argument(
                format!("FarKeeper_{t}_{k}"),
                t,
                mark.clone(),
                ConditionSpec::new(
                    "keeper_far",
                    [keeper(), ("threshold", params.far_threshold.into())],
                ),
            ));
            for kind in ["min_angle", "min_dist"] {
                let name = if kind == "min_angle" {
                    "MinAngle"
                } else {
                    "MinDist"
                };
                arguments.push(argument(
                    format!("{name}_{t}_{k}"),
                    t,
                    mark.clone(),
                    ConditionSpec::new(
                        kind,
                        [("taker", n(t)), keeper(), ("takers", takers.clone())],
                    ),
                ));
            }
        }
    }
    ArgumentCatalog::new(TAKERS, takeaway_actions(), arguments)
}

fn sample_raw<R: Rng + ?Sized>(rng: &mut R, field: f64) -> TakeawayFeatureState {
    let mut point = || Point::new(rng.gen_range(0.0..field), rng.gen_range(0.0..field));
    let takers = [point(), point(), point()];
    let keepers = [point(), point(), point(), point()];
    TakeawayFeatureState {
        takers,
        keepers,
        holder: rng.gen_range(0..KEEPERS),
    }
}

/// Draws positions uniformly until every taker has at least one applicable
/// argument in `catalog`.
pub fn sample_takeaway_state<R: Rng + ?Sized>(
    rng: &mut R,
    catalog: &ArgumentCatalog,
    params: &TakeawayParams,
) -> Result<TakeawayFeatureState> {
    for _ in 0..params.max_resample {
        let state = sample_raw(rng, params.field_size);
        let applicable = catalog.applicable_arguments(&state.to_state_vector())?;
        if (0..TAKERS).all(|t| applicable.iter().any(|a| a.target == AgentIndex(t))) {
            return Ok(state);
        }
    }
    Err(Error::Config(format!(
        "no usable takeaway state in {} draws",
        params.max_resample
    )))
}

/// `count` independent states together with the catalog they were checked
/// against.
pub fn generate_takeaway_states<R: Rng + ?Sized>(
    count: usize,
    rng: &mut R,
    params: &TakeawayParams,
) -> Result<(Vec<TakeawayFeatureState>, ArgumentCatalog)> {
    let catalog = generate_takeaway_catalog(params)?;
    let states = (0..count)
        .map(|_| sample_takeaway_state(rng, &catalog, params))
        .collect::<Result<_>>()?;
    Ok((states, catalog))
}

/// How a ground-truth taker ranks its mark arguments below its tackle
/// argument.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruthStyle {
    /// Keepers in a random priority order; each keeper's four arguments sit
    /// together in random order.
    #[default]
    KeeperBlocks,
    /// All sixteen mark arguments in one random order.
    Interleaved,
}

/// Per-taker ranking for a ground-truth team: the taker's tackle argument,
/// then its mark arguments as `style` dictates, then the other takers'
/// arguments in catalog order.
pub fn ground_truth_ordering<R: Rng + ?Sized>(
    catalog: &ArgumentCatalog,
    taker: AgentIndex,
    style: GroundTruthStyle,
    rng: &mut R,
) -> Result<Ordering> {
    let (own, rest): (Vec<_>, Vec<_>) = catalog.arguments().iter().partition(|a| a.target == taker);
    let (tackle, mut marks): (Vec<_>, Vec<_>) = own.into_iter().partition(|a| a.action == TACKLE);
    marks.shuffle(rng);
    if style == GroundTruthStyle::KeeperBlocks {
        let mut keepers: Vec<String> = (1..=KEEPERS).map(mark_action).collect();
        keepers.shuffle(rng);
        marks.sort_by_key(|a| keepers.iter().position(|k| *k == a.action));
    }
    Ordering::new(
        tackle
            .into_iter()
            .chain(marks)
            .chain(rest)
            .map(|a| a.id.clone())
            .collect(),
    )
}

/// A decentralized team whose members follow [`ground_truth_ordering`] and
/// default to tackling.
pub fn ground_truth_team<R: Rng + ?Sized>(
    catalog: Arc<ArgumentCatalog>,
    style: GroundTruthStyle,
    rng: &mut R,
) -> Result<TeamModel> {
    let members = (0..catalog.team_size())
        .map(|t| {
            let ordering = ground_truth_ordering(&catalog, AgentIndex(t), style, rng)?;
            AAAgentModel::new(
                catalog.clone(),
                ordering_to_values(&ordering)?,
                AgentIndex(t),
                TACKLE,
            )
        })
        .collect::<Result<_>>()?;
    TeamModel::decentralized(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn catalog() -> ArgumentCatalog {
        generate_takeaway_catalog(&TakeawayParams::default()).unwrap()
    }

    #[test]
    fn catalog_shape() {
        let cat = catalog();
        assert_eq!(cat.len(), 51);
        assert_eq!(cat.team_size(), 3);
        for t in 0..TAKERS {
            assert_eq!(cat.primary_arguments(AgentIndex(t)).count(), 17);
        }
        assert_eq!(cat.actions().len(), 5);
        let id = ArgumentId::new("MinAngle_2_3").unwrap();
        let arg = cat.get(&id).unwrap();
        assert_eq!(
            (arg.target, arg.action.as_str()),
            (AgentIndex(1), "mark_k3")
        );
    }

    #[test]
    fn geometry_by_hand() {
        // Holder at the origin, keeper 2 along +x, taker 1 along +y.
        let s = TakeawayFeatureState {
            takers: [
                Point::new(0.0, 3.0),
                Point::new(4.0, 1.0),
                Point::new(-5.0, 0.0),
            ],
            keepers: [
                Point::new(0.0, 0.0),
                Point::new(10.0, 0.0),
                Point::new(0.0, -10.0),
                Point::new(7.0, 7.0),
            ],
            holder: 0,
        };
        assert!((s.keeper_angle(0, 1) - 90.0).abs() < 1e-12);
        assert!((s.keeper_angle(2, 1) - 180.0).abs() < 1e-12);
        assert!((s.keeper_angle(1, 1) - (0.25f64).atan().to_degrees()).abs() < 1e-12);
        assert_eq!(s.keeper_angle(1, 0), 180.0);
        assert_eq!(s.ball_dist(0), 3.0);
        assert!((s.keeper_dist(1, 1) - 37f64.sqrt()).abs() < 1e-12);
        assert!((s.openness(1) - 14.036243467926479 / 90.0).abs() < 1e-9);
        assert_eq!(s.openness(0), 0.0);
        // Keeper 3 (straight down): taker 3 at 90, taker 1 at 180, taker 2 at 104.04.
        assert!((s.openness(2) - 1.0).abs() < 1e-12);
        assert!((s.min_taker_dist(1) - 37f64.sqrt()).abs() < 1e-12);

        let sv = s.to_state_vector();
        assert_eq!(sv.get("holder").unwrap(), 1.0);
        assert_eq!(sv.len(), 1 + 3 * (1 + 2 * 4) + 2 * 4);
    }

    #[test]
    fn sampled_states_give_every_taker_an_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (states, cat) =
            generate_takeaway_states(300, &mut rng, &TakeawayParams::default()).unwrap();
        assert_eq!(states.len(), 300);
        for s in &states {
            let app = cat.applicable_arguments(&s.to_state_vector()).unwrap();
            for t in 0..TAKERS {
                assert!(app.iter().any(|a| a.target == AgentIndex(t)));
            }
            // exactly one taker is closest to the ball
            assert_eq!(app.iter().filter(|a| a.action == TACKLE).count(), 1);
        }
    }

    #[test]
    fn ground_truth_team_ranks_tackle_first() {
        let cat = Arc::new(catalog());
        for style in [
            GroundTruthStyle::KeeperBlocks,
            GroundTruthStyle::Interleaved,
        ] {
            let team =
                ground_truth_team(cat.clone(), style, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
            for (t, m) in team.members().unwrap().iter().enumerate() {
                let top = &m.ranked_primaries()[0].0;
                assert_eq!(top.as_str(), format!("TackleBall_{}", t + 1));
            }
        }
    }

    #[test]
    fn keeper_blocks_are_contiguous() {
        let cat = catalog();
        let ordering = ground_truth_ordering(
            &cat,
            AgentIndex(1),
            GroundTruthStyle::KeeperBlocks,
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        let actions: Vec<&str> = ordering.ranked()[1..17]
            .iter()
            .map(|id| cat.get(id).unwrap().action.as_str())
            .collect();
        for block in actions.chunks(4) {
            assert!(block.iter().all(|a| *a == block[0]));
        }
        let distinct: BTreeSet<&str> = actions.iter().copied().collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = TakeawayParams {
            field_size: 0.0,
            ..TakeawayParams::default()
        };
        assert!(generate_takeaway_catalog(&p).is_err());
    }
}
