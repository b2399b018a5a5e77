use std::collections::BTreeMap;

use serde::Serialize;
use vaf_extract::agents::AgentIndex;
use vaf_extract::environments::{run_episodes, RunOptions};
use vaf_extract::evaluation::{
    benchmark_deployment, fidelity_parallel, inspect_top_k, policy_grid, render_table,
    FidelityReport, GridRanges, PolicyGrid,
};
use vaf_extract::trajectories::{load_trajectories, Format};

use crate::error::{CliError, CliResult};
use crate::gen::{print_stats, OutcomeStats};
use crate::policy::load_team;
use crate::run_dir::RunDir;
use crate::setup::{check_scripted_env, environment, standalone_policy};
use crate::{BenchArgs, FidelityArgs, GridArgs, InspectArgs};

#[derive(Serialize)]
struct FidelityDocument<'a> {
    per_agent: &'a BTreeMap<AgentIndex, f64>,
    step_counts: &'a BTreeMap<AgentIndex, usize>,
    overall: f64,
}

fn write_fidelity(run: &mut RunDir, report: &FidelityReport) -> CliResult<()> {
    run.write_json(
        "fidelity.json",
        &FidelityDocument {
            per_agent: &report.per_agent,
            step_counts: &report.step_counts,
            overall: report.overall(),
        },
    )?;
    let text = report.render();
    run.write("fidelity.txt", &text)?;
    print!("{text}");
    Ok(())
}

pub fn fidelity(args: FidelityArgs) -> CliResult<()> {
    let mut run = RunDir::create(&args.out, "eval fidelity")?;
    let team = load_team(&args.model, &mut run)?;
    let threads = args.threads as usize;
    let set = if args.holdout {
        let (Some(env), Some(original), Some(episodes)) =
            (&args.env, &args.original, args.episodes)
        else {
            return Err(CliError::usage(
                "--holdout needs --env, --original and --episodes",
            ));
        };
        let setup = environment(env, args.config.as_deref(), args.seed, &mut run)?;
        let original = standalone_policy(original, &mut run)?;
        check_scripted_env(&original, &setup.env)?;
        run.param("holdout", true);
        run.param("episodes", episodes);
        let options = RunOptions::new(episodes as usize, setup.seed)
            .logged()
            .workers(threads);
        run_episodes(original.as_policy(), &setup.env, &options)?
            .trajectories
            .expect("logging was requested")
    } else {
        let path = args
            .trajectories
            .as_ref()
            .ok_or_else(|| CliError::usage("--trajectories or --holdout is required"))?;
        run.input(path)?;
        run.param("holdout", false);
        load_trajectories(
            path,
            Format::from_path(path),
            Some(team.catalog().actions()),
        )?
    };
    log::info!("scoring {} steps", set.step_count());
    let report = fidelity_parallel(&team, &set, threads)?;
    write_fidelity(&mut run, &report)?;
    run.finish()
}

#[derive(Serialize)]
struct BenchTiming {
    mean_wall_time: f64,
    std_wall_time: f64,
    mean_decision_latency: f64,
    std_decision_latency: f64,
}

#[derive(Serialize)]
struct BenchOutcome {
    #[serde(flatten)]
    outcome: OutcomeStats,
    decisions: usize,
}

pub fn bench(args: BenchArgs) -> CliResult<()> {
    let mut run = RunDir::create(&args.out, "eval bench")?;
    let setup = environment(
        &args.env.env,
        args.env.config.as_deref(),
        args.env.seed,
        &mut run,
    )?;
    let policy = standalone_policy(&args.model, &mut run)?;
    check_scripted_env(&policy, &setup.env)?;
    run.param("model", args.model.kind());
    run.param("episodes", args.env.episodes);
    let report = benchmark_deployment(
        policy.as_policy(),
        &setup.env,
        args.env.episodes as usize,
        setup.seed,
    )?;
    run.write_json(
        "bench.json",
        &BenchOutcome {
            outcome: OutcomeStats::from(&report.stats),
            decisions: report.decisions,
        },
    )?;
    // not recorded in the manifest
    let timing = BenchTiming {
        mean_wall_time: report.stats.mean_wall_time,
        std_wall_time: report.stats.std_wall_time,
        mean_decision_latency: report.mean_decision_latency,
        std_decision_latency: report.std_decision_latency,
    };
    let mut text = serde_json::to_string_pretty(&timing)?;
    text.push('\n');
    let path = args.out.join("bench_timing.json");
    std::fs::write(&path, text).map_err(|e| vaf_extract::Error::Io { path, source: e })?;
    print_stats(&report.stats);
    println!(
        "decision latency {:.4} +/- {:.4} ms over {} decisions",
        report.mean_decision_latency * 1e3,
        report.std_decision_latency * 1e3,
        report.decisions
    );
    run.finish()
}

pub fn inspect(args: InspectArgs) -> CliResult<()> {
    let mut run = RunDir::create(&args.out, "eval inspect")?;
    let team = load_team(&args.model, &mut run)?;
    run.param("top", args.top);
    let members = team.members().expect("loaded teams are decentralized");
    let reports = members
        .iter()
        .map(|m| inspect_top_k(m, args.top as usize))
        .collect::<Result<Vec<_>, _>>()?;
    run.write_json("inspect.json", &reports)?;
    let table = render_table(&reports);
    run.write("inspect.txt", &table)?;
    print!("{table}");
    run.finish()
}

fn parse_resolution(text: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::usage(format!("resolution `{text}` is not of the form RxC"));
    let (r, c) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r == 0 || c == 0 {
        return Err(CliError::usage("grid resolution must be at least 1x1"));
    }
    Ok((r, c))
}

fn parse_ranges(text: &str) -> CliResult<GridRanges> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::usage(format!("ranges `{text}` are not four numbers")))?;
    match values[..] {
        [plo, phi, vlo, vhi] => Ok(GridRanges {
            position: (plo, phi),
            velocity: (vlo, vhi),
        }),
        _ => Err(CliError::usage(format!(
            "ranges `{text}` are not four numbers"
        ))),
    }
}

fn write_grid(run: &mut RunDir, prefix: &str, grid: &PolicyGrid) -> CliResult<()> {
    run.write(&format!("{prefix}.csv"), &grid.to_csv())?;
    run.write(&format!("{prefix}.txt"), &grid.render_ascii())?;
    run.write(&format!("{prefix}.pgm"), &grid.to_pgm())?;
    Ok(())
}

#[derive(Serialize)]
struct GridDiff {
    differing_cells: usize,
    cells: usize,
}

pub fn grid(args: GridArgs) -> CliResult<()> {
    let mut run = RunDir::create(&args.out, "eval grid")?;
    let resolution = parse_resolution(&args.res)?;
    let ranges = match &args.ranges {
        Some(text) => parse_ranges(text)?,
        None => GridRanges::default(),
    };
    run.param("model", args.model.kind());
    run.param("res", format!("{}x{}", resolution.0, resolution.1));
    run.param("ranges", serde_json::to_value(ranges)?);

    let policy = standalone_policy(&args.model, &mut run)?;
    let compare = args
        .compare
        .as_ref()
        .map(|spec| standalone_policy(spec, &mut run))
        .transpose()?;
    let mut alphabet = policy.alphabet();
    if let Some(c) = &compare {
        alphabet.extend(c.alphabet());
    }
    let grid = policy_grid(policy.as_policy(), &alphabet, resolution, ranges)?;
    write_grid(&mut run, "grid", &grid)?;
    print!("{}", grid.render_ascii());
    if let (Some(other), Some(spec)) = (&compare, &args.compare) {
        run.param("compare", spec.kind());
        let other = policy_grid(other.as_policy(), &alphabet, resolution, ranges)?;
        write_grid(&mut run, "compare", &other)?;
        let side = grid.render_side_by_side(&other)?;
        run.write("grid_diff.txt", &side)?;
        run.write_json(
            "grid_diff.json",
            &GridDiff {
                differing_cells: grid.diff(&other)?,
                cells: resolution.0 * resolution.1,
            },
        )?;
        print!("{side}");
    }
    run.finish()
}
