use std::collections::BTreeMap;

use proptest::prelude::*;
use vaf_extract::agents::{AgentIndex, StateVector};
use vaf_extract::trajectories::{
    load_trajectories, parse_trajectories, render_trajectories, write_trajectories, Episode,
    Format, TimeStep, TrajectorySet,
};

fn arb_set() -> impl Strategy<Value = TrajectorySet> {
    (
        proptest::collection::btree_set("f_[a-z]{1,5}", 1..5),
        1usize..4,
        proptest::collection::vec("[a-z_]{1,6}", 1..4),
    )
        .prop_flat_map(|(features, team, labels)| {
            let features: Vec<String> = features.into_iter().collect();
            let n = features.len();
            let step = (
                proptest::collection::vec(-1e6f64..1e6, n),
                proptest::collection::vec(0..labels.len(), team),
            );
            let episode = proptest::collection::vec(step, 1..6);
            (
                Just(features),
                Just(team),
                Just(labels),
                proptest::collection::btree_set(0u64..1000, 0..5),
                proptest::collection::vec(episode, 5),
            )
        })
        .prop_map(|(features, team, labels, ids, episodes)| {
            let episodes = ids
                .into_iter()
                .zip(episodes)
                .map(|(id, steps)| Episode {
                    id,
                    steps: steps
                        .into_iter()
                        .map(|(values, actions)| TimeStep {
                            state: StateVector::from_pairs(features.iter().cloned().zip(values))
                                .unwrap(),
                            actions: actions
                                .into_iter()
                                .enumerate()
                                .map(|(a, l)| (AgentIndex(a), labels[l].clone()))
                                .collect::<BTreeMap<_, _>>(),
                        })
                        .collect(),
                })
                .collect();
            TrajectorySet::new(features, team, episodes).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn jsonl_round_trip(set in arb_set()) {
        let text = render_trajectories(&set, Format::Jsonl).unwrap();
        let report = parse_trajectories(&text, Format::Jsonl, None).unwrap();
        prop_assert!(report.rejected.is_empty());
        prop_assert_eq!(report.set, set);
    }

    #[test]
    fn csv_round_trip(set in arb_set()) {
        prop_assume!(!set.is_empty());
        let text = render_trajectories(&set, Format::Csv).unwrap();
        let report = parse_trajectories(&text, Format::Csv, None).unwrap();
        prop_assert!(report.rejected.is_empty());
        prop_assert_eq!(report.set, set);
    }
}

#[test]
fn file_round_trip_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let step = |p: f64, a: &str| TimeStep {
        state: StateVector::from_pairs([("position", p), ("velocity", p / 10.0)]).unwrap(),
        actions: [(AgentIndex(0), a.to_string())].into(),
    };
    let set = TrajectorySet::new(
        ["position", "velocity"],
        1,
        vec![
            Episode {
                id: 3,
                steps: vec![step(-0.5, "push_left"), step(-0.51, "push_right")],
            },
            Episode {
                id: 1,
                steps: vec![step(0.1, "no_push")],
            },
        ],
    )
    .unwrap();
    for (name, format) in [("t.jsonl", Format::Jsonl), ("t.csv", Format::Csv)] {
        let path = dir.path().join(name);
        write_trajectories(&set, &path, format).unwrap();
        assert_eq!(Format::from_path(&path), format);
        assert_eq!(load_trajectories(&path, format, None).unwrap(), set);
    }
}
