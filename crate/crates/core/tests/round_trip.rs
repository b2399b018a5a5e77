use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vaf_extract::agents::{AAAgentModel, AgentIndex, TeamModel};
use vaf_extract::argumentation::ArgumentId;
use vaf_extract::environments::{
    generate_mc_catalog, random_value_agent, run_episodes, Environment, GridSpec,
    MountainCarAction, MountainCarParams, MountainCarState, RunOptions,
};
use vaf_extract::evaluation::fidelity;
use vaf_extract::extraction::{
    extract_ordering, extract_scoped, ExtractionConfig, ExtractionScope, Ordering,
};

#[test]
fn extracted_agent_reproduces_generator_on_visited_states() {
    let catalog = Arc::new(generate_mc_catalog(&GridSpec::default()).unwrap());
    let env = Environment::mountain_car(MountainCarParams::default()).unwrap();
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = random_value_agent(catalog.clone(), &mut rng).unwrap();
        let mut ranked: Vec<(ArgumentId, i64)> =
            truth.values().iter().map(|(a, v)| (a.clone(), v)).collect();
        ranked.sort_by_key(|a| std::cmp::Reverse(a.1));
        let adversarial =
            Ordering::new(ranked.into_iter().rev().map(|(a, _)| a).collect()).unwrap();
        let team = TeamModel::single(truth.clone()).unwrap();
        let set = run_episodes(&team, &env, &RunOptions::new(20, seed).logged().workers(3))
            .unwrap()
            .trajectories
            .unwrap();

        let config = ExtractionConfig {
            pruning_threshold: 1,
            default_ordering: Some(adversarial),
            ..ExtractionConfig::default()
        };
        let e = extract_ordering(&set, &catalog, AgentIndex(0), &config).unwrap();
        assert!(e.removed.is_empty());
        let parallel = extract_scoped(
            &set,
            &catalog,
            ExtractionScope::PerAgent(AgentIndex(0)),
            &config,
            4,
        )
        .unwrap();
        assert_eq!(parallel, e);

        let model = AAAgentModel::new(
            catalog.clone(),
            e.values,
            AgentIndex(0),
            truth.default_action(),
        )
        .unwrap();
        let extracted = TeamModel::single(model.clone()).unwrap();
        assert_eq!(fidelity(&extracted, &set).unwrap().overall(), 1.0);

        // brute force: the cell argument with the highest value decides
        for (state, logged) in set.pairs(AgentIndex(0)).unwrap() {
            let s = MountainCarState::from_state_vector(state).unwrap();
            let (i, j) = GridSpec::default().cell_of(s).unwrap();
            let best = MountainCarAction::ALL
                .iter()
                .max_by_key(|&&a| model.values().get(&GridSpec::argument_id(i, j, a)))
                .unwrap();
            assert_eq!(best.label(), logged);
        }
    }
}
