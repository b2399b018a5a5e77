use std::collections::BTreeMap;
use std::sync::Arc;

use vaf_extract::agents::{AAAgentModel, AgentIndex, ArgumentCatalog};
use vaf_extract::extraction::{
    extract_scoped, merge_team_orderings, ordering_to_values, Extraction, ExtractionConfig,
    ExtractionScope,
};
use vaf_extract::trajectories::{load_trajectories, Format, TrajectorySet};
use vaf_extract::Error;

use crate::error::CliResult;
use crate::run_dir::RunDir;
use crate::ExtractArgs;

/// The configured fallback, else the agent's most frequent logged action
/// (ties to the alphabetically first), else the first label of the alphabet.
fn default_action(
    configured: Option<&str>,
    set: &TrajectorySet,
    catalog: &ArgumentCatalog,
    agent: AgentIndex,
) -> CliResult<String> {
    if let Some(label) = configured {
        if !catalog.actions().contains(label) {
            return Err(Error::UnknownAction(label.to_string()).into());
        }
        return Ok(label.to_string());
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for episode in set.episodes() {
        for step in &episode.steps {
            if let Some(a) = step.actions.get(&agent) {
                *counts.entry(a.as_str()).or_default() += 1;
            }
        }
    }
    let best = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(label, _)| label.to_string());
    Ok(best.unwrap_or_else(|| {
        catalog
            .actions()
            .first()
            .expect("catalogs have a non-empty alphabet")
            .clone()
    }))
}

fn report(label: &str, e: &Extraction) {
    println!(
        "{label}: {} preference edges (max weight {}), {} removed to break cycles",
        e.apg_edges,
        e.apg_max_weight,
        e.removed.len()
    );
}

pub fn run(args: ExtractArgs) -> CliResult<()> {
    let mut run = RunDir::create(&args.out, "extract")?;
    let threads = args.threads as usize;

    let mut config = match &args.config {
        Some(path) => {
            run.input(path)?;
            ExtractionConfig::load(path)?
        }
        None => ExtractionConfig::default(),
    };
    if let Some(p) = args.threshold {
        config.pruning_threshold = p;
    }
    if let Some(a) = &args.default_action {
        config.default_action = Some(a.clone());
    }

    run.input(&args.catalog)?;
    let catalog = Arc::new(ArgumentCatalog::load(&args.catalog)?);
    run.input(&args.trajectories)?;
    let format = args
        .format
        .map(Format::from)
        .unwrap_or_else(|| Format::from_path(&args.trajectories));
    let mut set = load_trajectories(&args.trajectories, format, Some(catalog.actions()))?;
    log::info!(
        "loaded {} steps in {} episodes",
        set.step_count(),
        set.episodes().len()
    );
    if set.step_count() == 0 {
        log::warn!(
            "{}: no trajectory data; every ordering is the default ordering",
            args.trajectories.display()
        );
        set = TrajectorySet::empty(set.feature_names().to_vec(), catalog.team_size())?;
    } else if set.team_size() != catalog.team_size() {
        return Err(Error::TeamSizeMismatch {
            expected: catalog.team_size(),
            found: set.team_size(),
        }
        .into());
    }

    run.param("threshold", config.pruning_threshold);
    run.param("joint", args.joint);
    run.write("catalog.json", &catalog.to_json())?;

    let team_size = catalog.team_size();
    let orderings = if args.joint {
        let e = extract_scoped(&set, &catalog, ExtractionScope::Joint, &config, threads)?;
        report("team", &e);
        run.write_json("ordering.json", &e.to_file())?;
        vec![e.ordering; team_size]
    } else {
        let mut per_agent = Vec::with_capacity(team_size);
        for i in 0..team_size {
            let scope = ExtractionScope::PerAgent(AgentIndex(i));
            let e = extract_scoped(&set, &catalog, scope, &config, threads)?;
            report(&format!("agent {i}"), &e);
            run.write_json(&format!("agent_{i}.ordering.json"), &e.to_file())?;
            per_agent.push(e.ordering);
        }
        merge_team_orderings(&per_agent, &catalog)?
    };

    let mut defaults = Vec::with_capacity(team_size);
    for (i, ordering) in orderings.iter().enumerate() {
        let agent = AgentIndex(i);
        let fallback = default_action(config.default_action.as_deref(), &set, &catalog, agent)?;
        let model = AAAgentModel::new(
            catalog.clone(),
            ordering_to_values(ordering)?,
            agent,
            fallback.clone(),
        )?;
        run.write_json(
            &format!("agent_{i}.model.json"),
            &model.to_file("catalog.json"),
        )?;
        defaults.push(fallback);
    }
    run.param("default_actions", defaults);
    run.finish()
}
