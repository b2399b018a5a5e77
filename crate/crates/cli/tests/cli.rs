use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn vafx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vafx"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("vafx runs")
}

fn ok(args: &[&str]) -> Output {
    let out = vafx(args);
    assert!(
        out.status.success(),
        "vafx {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    vafx(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn gen_mc(dir: &Path, episodes: &str, seed: &str, threads: &str) -> PathBuf {
    ok(&[
        "gen",
        "--env",
        "mountain_car",
        "--policy",
        "scripted",
        "--episodes",
        episodes,
        "--seed",
        seed,
        "--threads",
        threads,
        "--out",
        s(dir),
    ]);
    dir.to_path_buf()
}

fn gen_takeaway(dir: &Path, episodes: &str, seed: &str) -> PathBuf {
    ok(&[
        "gen",
        "--env",
        "takeaway_synth",
        "--policy",
        "ground_truth",
        "--episodes",
        episodes,
        "--seed",
        seed,
        "--out",
        s(dir),
    ]);
    dir.to_path_buf()
}

fn extract(gen: &Path, out: &Path) {
    ok(&[
        "extract",
        "--trajectories",
        s(&gen.join("trajectories.jsonl")),
        "--catalog",
        s(&gen.join("catalog.json")),
        "--out",
        s(out),
    ]);
}

#[test]
fn gen_writes_requested_episodes() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = gen_mc(&tmp.path().join("g"), "7", "1", "2");
    let text = std::fs::read_to_string(gen.join("trajectories.jsonl")).unwrap();
    let mut episodes = std::collections::BTreeSet::new();
    for line in text.lines().skip(1) {
        let v: Value = serde_json::from_str(line).unwrap();
        episodes.insert(v["episode"].as_u64().unwrap());
    }
    assert_eq!(episodes.len(), 7);
    let stats = read_json(&gen.join("stats.json"));
    assert_eq!(stats["episodes"], 7);
    assert_eq!(stats["success_rate"], 1.0);
    let manifest = read_json(&gen.join("manifest.json"));
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["parameters"]["seed"], 1);
}

#[test]
fn csv_output_extracts() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("g");
    ok(&[
        "gen",
        "--env",
        "mountain_car",
        "--policy",
        "scripted",
        "--episodes",
        "3",
        "--seed",
        "5",
        "--format",
        "csv",
        "--out",
        s(&gen),
    ]);
    let text = std::fs::read_to_string(gen.join("trajectories.csv")).unwrap();
    assert!(text.starts_with("episode,step,action_0,position,velocity\n"));
    ok(&[
        "extract",
        "--trajectories",
        s(&gen.join("trajectories.csv")),
        "--catalog",
        s(&gen.join("catalog.json")),
        "--out",
        s(&tmp.path().join("x")),
    ]);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = s(&out);
    let base = ["gen", "--policy", "scripted", "--out", o];
    let with = |extra: &[&'static str]| -> Vec<&str> {
        base.iter().copied().chain(extra.iter().copied()).collect()
    };
    assert_eq!(
        code(&with(&[
            "--env",
            "mountain_car",
            "--episodes",
            "0",
            "--seed",
            "1"
        ])),
        1
    );
    assert_eq!(
        code(&with(&[
            "--env",
            "cartpole",
            "--episodes",
            "1",
            "--seed",
            "1"
        ])),
        1
    );
    assert_eq!(
        code(&with(&["--env", "mountain_car", "--episodes", "1"])),
        1
    );
    assert_eq!(
        code(&with(&[
            "--env",
            "takeaway_synth",
            "--episodes",
            "1",
            "--seed",
            "1"
        ])),
        1
    );
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn data_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = gen_mc(&tmp.path().join("g"), "2", "1", "1");
    let bad = tmp.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"garbage").unwrap();
    let catalog = gen.join("catalog.json");
    assert_eq!(
        code(&[
            "extract",
            "--trajectories",
            s(&bad),
            "--catalog",
            s(&catalog),
            "--out",
            s(&tmp.path().join("x"))
        ]),
        2
    );
    let broken = tmp.path().join("broken.json");
    std::fs::write(&broken, "[1, 2").unwrap();
    assert_eq!(
        code(&[
            "extract",
            "--trajectories",
            s(&gen.join("trajectories.jsonl")),
            "--catalog",
            s(&broken),
            "--out",
            s(&tmp.path().join("y"))
        ]),
        2
    );
    let config = tmp.path().join("env.json");
    std::fs::write(&config, r#"{"seed": 1, "mc": {"force": -1.0}}"#).unwrap();
    assert_eq!(
        code(&[
            "gen",
            "--env",
            "mountain_car",
            "--policy",
            "scripted",
            "--episodes",
            "1",
            "--config",
            s(&config),
            "--out",
            s(&tmp.path().join("z")),
        ]),
        2
    );
}

#[test]
fn seed_from_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("env.json");
    std::fs::write(&config, r#"{"seed": 11}"#).unwrap();
    let a = tmp.path().join("a");
    ok(&[
        "gen",
        "--env",
        "mountain_car",
        "--policy",
        "scripted",
        "--episodes",
        "2",
        "--config",
        s(&config),
        "--out",
        s(&a),
    ]);
    let b = gen_mc(&tmp.path().join("b"), "2", "11", "1");
    assert_eq!(
        std::fs::read(a.join("trajectories.jsonl")).unwrap(),
        std::fs::read(b.join("trajectories.jsonl")).unwrap()
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = gen_mc(&tmp.path().join("a"), "20", "9", "1");
    let b = gen_mc(&tmp.path().join("b"), "20", "9", "3");
    for name in [
        "trajectories.jsonl",
        "catalog.json",
        "stats.json",
        "manifest.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn takeaway_extraction_writes_a_model_per_taker() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = gen_takeaway(&tmp.path().join("g"), "40", "2");
    let ex = tmp.path().join("x");
    extract(&gen, &ex);
    for i in 0..3 {
        let model = read_json(&ex.join(format!("agent_{i}.model.json")));
        assert_eq!(model["self"], i);
        assert!(ex.join(format!("agent_{i}.ordering.json")).exists());
    }
    assert!(!ex.join("agent_3.model.json").exists());

    let insp = tmp.path().join("i");
    let out = ok(&[
        "eval",
        "inspect",
        "--model",
        s(&ex),
        "--top",
        "5",
        "--out",
        s(&insp),
    ]);
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("Rank | Agent 1"));
    assert!(lines[0].contains("Agent 3"));
    for (i, agent) in ["TackleBall_1", "TackleBall_2", "TackleBall_3"]
        .iter()
        .enumerate()
    {
        assert!(lines[1].contains(&format!("{agent} (51)")), "column {i}");
    }
    assert_eq!(
        std::fs::read_to_string(insp.join("inspect.txt")).unwrap(),
        table
    );
}

#[test]
fn empty_trajectories_give_default_ordering() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = gen_takeaway(&tmp.path().join("g"), "1", "2");
    let empty = tmp.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let ex = tmp.path().join("x");
    let out = ok(&[
        "extract",
        "--trajectories",
        s(&empty),
        "--catalog",
        s(&gen.join("catalog.json")),
        "--out",
        s(&ex),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no trajectory data"));
    let catalog = read_json(&gen.join("catalog.json"));
    for i in 0..3 {
        let ordering = read_json(&ex.join(format!("agent_{i}.ordering.json")));
        let ids: Vec<&str> = ordering["ranked"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        assert_eq!(ids.len(), 51);
        // the agent's own arguments lead, in catalog order
        let own: Vec<&str> = catalog["arguments"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|a| a["target"] == i)
            .map(|a| a["id"].as_str().unwrap())
            .collect();
        assert_eq!(&ids[..own.len()], &own[..]);
    }
}

#[test]
fn grid_export_has_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = gen_mc(&tmp.path().join("g"), "30", "4", "2");
    let ex = tmp.path().join("x");
    extract(&gen, &ex);
    let grid = tmp.path().join("grid");
    let model = format!("model:{}", s(&ex));
    ok(&[
        "eval",
        "grid",
        "--model",
        &model,
        "--res",
        "20x20",
        "--compare",
        "scripted",
        "--out",
        s(&grid),
    ]);
    let csv = std::fs::read_to_string(grid.join("grid.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("position_bin,velocity_bin,action"));
    assert_eq!(lines.count(), 400);
    let pgm = std::fs::read_to_string(grid.join("grid.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n20 20\n255\n"));
    let diff = read_json(&grid.join("grid_diff.json"));
    assert_eq!(diff["cells"], 400);
    assert_eq!(
        code(&[
            "eval",
            "grid",
            "--model",
            "scripted",
            "--res",
            "0x3",
            "--out",
            s(&grid)
        ]),
        1
    );
}

#[test]
fn holdout_fidelity_of_round_trip_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = gen_takeaway(&tmp.path().join("g"), "60", "8");
    let ex = tmp.path().join("x");
    extract(&gen, &ex);
    let fid = tmp.path().join("f");
    let original = format!("model:{}", s(&gen.join("ground_truth")));
    ok(&[
        "eval",
        "fidelity",
        "--model",
        s(&ex),
        "--holdout",
        "--original",
        &original,
        "--env",
        "takeaway_synth",
        "--episodes",
        "60",
        "--seed",
        "99",
        "--threads",
        "2",
        "--out",
        s(&fid),
    ]);
    let report = read_json(&fid.join("fidelity.json"));
    assert_eq!(report["overall"], 1.0);
    assert_eq!(report["step_counts"]["0"], 1200);

    let own = tmp.path().join("own");
    ok(&[
        "eval",
        "fidelity",
        "--model",
        s(&ex),
        "--trajectories",
        s(&gen.join("trajectories.jsonl")),
        "--out",
        s(&own),
    ]);
    assert_eq!(read_json(&own.join("fidelity.json"))["overall"], 1.0);
}

#[test]
fn bench_reports_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    ok(&[
        "eval",
        "bench",
        "--model",
        "scripted",
        "--env",
        "mountain_car",
        "--episodes",
        "5",
        "--seed",
        "3",
        "--out",
        s(&out),
    ]);
    let bench = read_json(&out.join("bench.json"));
    assert_eq!(bench["episodes"], 5);
    assert_eq!(bench["success_rate"], 1.0);
    assert!(out.join("bench_timing.json").exists());
    let manifest = read_json(&out.join("manifest.json"));
    let names: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["bench.json"]);
}
