use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vaf_extract::agents::{
    build_attacks, build_defeat_graph, AAAgentModel, ActionArgument, AgentIndex, ArgumentCatalog,
    ConditionSpec, ParamValue, StateVector, TeamModel, ValueAssignment,
};
use vaf_extract::argumentation::ArgumentId;
use vaf_extract::environments::{
    generate_takeaway_catalog, sample_takeaway_state, Point, TakeawayFeatureState, TakeawayParams,
};
use vaf_extract::extraction::{ordering_to_values, Ordering};

fn aid(s: &str) -> ArgumentId {
    ArgumentId::new(s).unwrap()
}

fn takeaway_catalog() -> Arc<ArgumentCatalog> {
    Arc::new(generate_takeaway_catalog(&TakeawayParams::default()).unwrap())
}

/// `top` first, then the remaining arguments in catalog order.
fn ordering_with_top(catalog: &ArgumentCatalog, top: &[&str]) -> Ordering {
    let top: Vec<ArgumentId> = top.iter().map(|s| aid(s)).collect();
    let rest = catalog.ids().filter(|id| !top.contains(id)).cloned();
    Ordering::new(top.iter().cloned().chain(rest).collect()).unwrap()
}

fn member(catalog: &Arc<ArgumentCatalog>, agent: usize, top: &[&str]) -> AAAgentModel {
    let values = ordering_to_values(&ordering_with_top(catalog, top)).unwrap();
    AAAgentModel::new(catalog.clone(), values, AgentIndex(agent), "tackle").unwrap()
}

// Holder K1 at (20,20). T1 stands next to the ball; T2 sits between K2 and
// K4, T3 next to K3. No keeper is open or far, and angles to the holder
// never count.
fn three_taker_state() -> TakeawayFeatureState {
    TakeawayFeatureState {
        takers: [
            Point::new(20.0, 18.0),
            Point::new(30.0, 30.0),
            Point::new(9.0, 31.0),
        ],
        keepers: [
            Point::new(20.0, 20.0),
            Point::new(20.0, 32.0),
            Point::new(6.0, 20.0),
            Point::new(34.0, 20.0),
        ],
        holder: 0,
    }
}

#[test]
fn three_taker_joint_action_matches_hand_evaluation() {
    let catalog = takeaway_catalog();
    let state = three_taker_state().to_state_vector();
    let applicable: Vec<&str> = catalog
        .applicable_arguments(&state)
        .unwrap()
        .iter()
        .map(|a| a.id.as_str())
        .collect();
    assert_eq!(
        applicable,
        [
            "TackleBall_1",
            "MinDist_1_1",
            "MinAngle_2_2",
            "MinDist_2_2",
            "MinAngle_2_4",
            "MinDist_2_4",
            "MinAngle_3_3",
            "MinDist_3_3",
        ]
    );

    // T1: TackleBall_1 is top and defeats MinDist_1_1.
    // T2: MinAngle_2_2 > MinDist_2_4 > MinDist_2_2 > MinAngle_2_4. MinAngle_2_2
    // is unbeaten and defeats both k4 arguments, which reinstates MinDist_2_2.
    // T3: its only applicable arguments agree on mark_k3.
    let team = TeamModel::decentralized(vec![
        member(&catalog, 0, &["TackleBall_1"]),
        member(
            &catalog,
            1,
            &["MinAngle_2_2", "MinDist_2_4", "MinDist_2_2", "MinAngle_2_4"],
        ),
        member(&catalog, 2, &["MinDist_3_3"]),
    ])
    .unwrap();
    assert_eq!(
        team.select_joint_action(&state).unwrap(),
        ["tackle", "mark_k2", "mark_k3"]
    );

    let d = team.members().unwrap()[1].decide(&state).unwrap();
    let accepted: Vec<&str> = d.primaries.iter().map(|a| a.as_str()).collect();
    assert_eq!(accepted, ["MinAngle_2_2", "MinDist_2_2"]);

    // The T1 agent ranking its mark arguments above tackling marks K1.
    let t1 = member(&catalog, 0, &["MinDist_1_1"]);
    assert_eq!(t1.select_action(&state).unwrap(), "mark_k1");
}

#[test]
fn single_member_team_matches_select_action() {
    let catalog = takeaway_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = TakeawayParams::default();
    let agent = member(&catalog, 0, &["MinDist_1_2", "TackleBall_1"]);
    for _ in 0..200 {
        let state = sample_takeaway_state(&mut rng, &catalog, &params)
            .unwrap()
            .to_state_vector();
        let action = agent.select_action(&state).unwrap();
        let team = TeamModel::decentralized(vec![
            agent.clone(),
            member(&catalog, 1, &[]),
            member(&catalog, 2, &[]),
        ])
        .unwrap();
        assert_eq!(team.select_joint_action(&state).unwrap()[0], action);
    }
}

/// Agent `i` only uses actions `a{i}_*`, so no attack crosses agents.
fn separated_catalog(rng: &mut ChaCha8Rng, agents: usize, features: usize) -> ArgumentCatalog {
    let actions_per_agent = 3;
    let mut actions = Vec::new();
    let mut arguments = Vec::new();
    for agent in 0..agents {
        for a in 0..actions_per_agent {
            actions.push(format!("a{agent}_{a}"));
        }
        for k in 0..rng.gen_range(2..8) {
            let kind = if rng.gen_bool(0.5) {
                "feature_ge"
            } else {
                "feature_lt"
            };
            let condition = ConditionSpec::new(
                kind,
                [
                    (
                        "feature",
                        ParamValue::from(format!("f{}", rng.gen_range(0..features)).as_str()),
                    ),
                    ("threshold", ParamValue::from(rng.gen_range(0.0..1.0))),
                ],
            );
            arguments.push(ActionArgument {
                id: aid(&format!("r{agent}_{k}")),
                target: AgentIndex(agent),
                action: format!("a{agent}_{}", rng.gen_range(0..actions_per_agent)),
                condition,
            });
        }
    }
    ArgumentCatalog::new(agents, actions, arguments).unwrap()
}

fn random_values(rng: &mut ChaCha8Rng, catalog: &ArgumentCatalog) -> ValueAssignment {
    let mut values: Vec<i64> = (1..=catalog.len() as i64).map(|v| v * 7).collect();
    for i in (1..values.len()).rev() {
        values.swap(i, rng.gen_range(0..=i));
    }
    ValueAssignment::new(catalog.ids().cloned().zip(values).collect()).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, features: usize) -> StateVector {
    StateVector::from_pairs((0..features).map(|f| (format!("f{f}"), rng.gen_range(0.0..1.0))))
        .unwrap()
}

#[test]
fn centralized_equals_decentralized_without_cross_agent_attacks() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut states = 0;
    for _ in 0..50 {
        let agents = rng.gen_range(1..4);
        let catalog = Arc::new(separated_catalog(&mut rng, agents, 4));
        let values = random_values(&mut rng, &catalog);
        let defaults: Vec<String> = (0..agents).map(|a| format!("a{a}_0")).collect();
        let members = (0..agents)
            .map(|a| {
                AAAgentModel::new(
                    catalog.clone(),
                    values.clone(),
                    AgentIndex(a),
                    defaults[a].clone(),
                )
                .unwrap()
            })
            .collect();
        let decentralized = TeamModel::decentralized(members).unwrap();
        let centralized = TeamModel::centralized(catalog.clone(), values, defaults).unwrap();
        for _ in 0..20 {
            let state = random_state(&mut rng, 4);
            let applicable = catalog.applicable_arguments(&state).unwrap();
            for (a, b) in build_attacks(&applicable) {
                assert_eq!(
                    catalog.get(&a).unwrap().target,
                    catalog.get(&b).unwrap().target
                );
            }
            assert_eq!(
                centralized.select_joint_action(&state).unwrap(),
                decentralized.select_joint_action(&state).unwrap()
            );
            states += 1;
        }
    }
    assert_eq!(states, 1000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relabeling_values_keeps_actions(seed in any::<u64>(), gaps in proptest::collection::vec(1i64..1000, 51), offset in -10_000i64..10_000) {
        let catalog = takeaway_catalog();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = random_values(&mut rng, &catalog);
        // strictly increasing map: value rank r goes to offset + gaps[0] + .. + gaps[r]
        let mut sorted: Vec<i64> = values.iter().map(|(_, v)| v).collect();
        sorted.sort();
        let mut table = BTreeMap::new();
        let mut acc = offset;
        for (v, g) in sorted.iter().zip(&gaps) {
            acc += g;
            table.insert(*v, acc);
        }
        let relabeled = values.map_values(|v| table[&v]).unwrap();
        let params = TakeawayParams::default();
        for agent in 0..3 {
            let a = AAAgentModel::new(catalog.clone(), values.clone(), AgentIndex(agent), "tackle").unwrap();
            let b = AAAgentModel::new(catalog.clone(), relabeled.clone(), AgentIndex(agent), "tackle").unwrap();
            for _ in 0..10 {
                let state = sample_takeaway_state(&mut rng, &catalog, &params).unwrap().to_state_vector();
                prop_assert_eq!(a.select_action(&state).unwrap(), b.select_action(&state).unwrap());
            }
        }
    }

    #[test]
    fn attacks_symmetric_and_defeats_antisymmetric(seed in any::<u64>()) {
        let catalog = takeaway_catalog();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = random_values(&mut rng, &catalog);
        let state = sample_takeaway_state(&mut rng, &catalog, &TakeawayParams::default())
            .unwrap()
            .to_state_vector();
        let applicable = catalog.applicable_arguments(&state).unwrap();
        let attacks = build_attacks(&applicable);
        for (a, b) in &attacks {
            prop_assert!(attacks.contains(&(b.clone(), a.clone())));
        }
        let defeats = build_defeat_graph(&applicable, &values).unwrap();
        let defeats: Vec<_> = defeats.attacks().map(|(a, b)| (a.clone(), b.clone())).collect();
        for (a, b) in &defeats {
            prop_assert!(!defeats.contains(&(b.clone(), a.clone())));
        }
        if let Some(top) = applicable.iter().max_by_key(|a| values.get(&a.id)) {
            prop_assert!(defeats.iter().all(|(_, b)| *b != top.id));
        }
    }
}
