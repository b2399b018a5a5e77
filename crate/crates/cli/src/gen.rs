use serde::Serialize;
use vaf_extract::environments::{run_episodes, EpisodeStats, RunOptions};
use vaf_extract::trajectories::{render_trajectories, Format};

use crate::error::CliResult;
use crate::policy::PolicySpec;
use crate::run_dir::RunDir;
use crate::setup::{
    check_scripted_env, environment, ground_truth, standalone_policy, LoadedPolicy,
};
use crate::GenArgs;

/// The reproducible part of [`EpisodeStats`].
#[derive(Serialize)]
pub struct OutcomeStats {
    pub episodes: usize,
    pub mean_steps: f64,
    pub std_steps: f64,
    pub success_rate: f64,
}

impl From<&EpisodeStats> for OutcomeStats {
    fn from(s: &EpisodeStats) -> Self {
        OutcomeStats {
            episodes: s.episodes,
            mean_steps: s.mean_steps,
            std_steps: s.std_steps,
            success_rate: s.success_rate,
        }
    }
}

pub fn print_stats(stats: &EpisodeStats) {
    println!(
        "episodes {}  steps {:.2} +/- {:.2}  wall {:.3} +/- {:.3} ms  success {:.3}",
        stats.episodes,
        stats.mean_steps,
        stats.std_steps,
        stats.mean_wall_time * 1e3,
        stats.std_wall_time * 1e3,
        stats.success_rate
    );
}

pub fn run(args: GenArgs) -> CliResult<()> {
    let mut run = RunDir::create(&args.out, "gen")?;
    let setup = environment(
        &args.env.env,
        args.env.config.as_deref(),
        args.env.seed,
        &mut run,
    )?;
    run.param("episodes", args.env.episodes);
    run.param("policy", args.policy.kind());
    let format = Format::from(args.format);
    run.param("format", format.to_string());
    run.write("catalog.json", &setup.catalog.to_json())?;

    let policy = if args.policy == PolicySpec::GroundTruth {
        let style = args.style.into();
        let team = ground_truth(&setup, style)?;
        run.param("style", serde_json::to_value(style)?);
        for member in team
            .members()
            .expect("ground truth teams are decentralized")
        {
            run.write_json(
                &format!("ground_truth/agent_{}.model.json", member.self_index()),
                &member.to_file("../catalog.json"),
            )?;
        }
        LoadedPolicy::Team(team)
    } else {
        standalone_policy(&args.policy, &mut run)?
    };
    check_scripted_env(&policy, &setup.env)?;

    let options = RunOptions::new(args.env.episodes as usize, setup.seed)
        .logged()
        .workers(args.threads as usize);
    log::info!(
        "running {} {} episodes on {} threads",
        args.env.episodes,
        setup.env.name(),
        args.threads
    );
    let out = run_episodes(policy.as_policy(), &setup.env, &options)?;
    let set = out.trajectories.expect("logging was requested");
    run.write(
        &format!("trajectories.{format}"),
        &render_trajectories(&set, format)?,
    )?;
    run.write_json("stats.json", &OutcomeStats::from(&out.stats))?;
    run.finish()?;
    print_stats(&out.stats);
    Ok(())
}
