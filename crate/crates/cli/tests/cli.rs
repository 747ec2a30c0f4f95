use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sketchlab"))
        .args(args)
        .current_dir(cwd)
        .env("SKETCHLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn ok(out: Output) -> Output {
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        ["gen", "--n", "100", "--d", "20", "--k", "5", "--zeta", "10", "--seed", "7", "--out", out]
    };
    ok(run(&args("a.mtx"), dir.path()));
    ok(run(&args("b.mtx"), dir.path()));
    let a = fs::read(dir.path().join("a.mtx")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.mtx")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix array real general"));
    assert!(text.lines().any(|l| l.trim() == "100 20"));
}

#[test]
fn sketch_writes_b_and_v() {
    let dir = tempfile::tempdir().unwrap();
    ok(run(&["gen", "--n", "60", "--d", "8", "--k", "3", "--out", "a.mtx"], dir.path()));
    let out = ok(run(
        &["sketch", "--input", "a.mtx", "--method", "spfd4", "--ell", "5", "--seed", "1", "--out-b", "b.mtx", "--out-v", "v.mtx"],
        dir.path(),
    ));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["method"], "spfd4");
    assert_eq!(summary["iterations"], 3);
    let dims = |f: &str| {
        fs::read_to_string(dir.path().join(f))
            .unwrap()
            .lines()
            .find(|l| !l.starts_with('%'))
            .unwrap()
            .to_string()
    };
    assert_eq!(dims("b.mtx"), "5 8");
    assert_eq!(dims("v.mtx"), "8 5");
}

const CONFIG: &str = r#"{
    "schema_version": 1,
    "dataset": {"kind": "synthetic", "n": 150, "d": 20, "zeta": 10},
    "methods": ["spemb", "fd", "spfd5"],
    "k": 3,
    "ell_sweep": {"start": 5, "step": 5, "end": 15},
    "repetitions": {"outer": 2, "inner": 2},
    "seed": 3,
    "output": "results.csv"
}"#;

#[test]
fn bench_writes_csv_at_configured_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), CONFIG).unwrap();
    ok(run(&["bench", "--config", "cfg.json"], dir.path()));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "method,ell,fro_ratio,spec_ratio,elapsed_seconds,reps");
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert!(lines[1].starts_with("spemb,5,"));
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[2].parse::<f64>().unwrap() >= 1.0 - 1e-8);
        assert!(f[4].parse::<f64>().unwrap() > 0.0);
        assert_eq!(f[5], "4");
    }
}

#[test]
fn bench_without_timing_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), CONFIG).unwrap();
    let args = |out: &'static str| {
        ["bench", "--config", "cfg.json", "--no-timing", "--methods", "fd,spfd5", "--ell", "5:5:10", "--output", out]
    };
    ok(run(&args("x.csv"), dir.path()));
    ok(run(&args("y.csv"), dir.path()));
    let x = fs::read(dir.path().join("x.csv")).unwrap();
    assert_eq!(x, fs::read(dir.path().join("y.csv")).unwrap());
    assert_eq!(String::from_utf8(x).unwrap().lines().count(), 5);

    ok(run(&["bench", "--config", "cfg.json", "--format", "json", "--reps", "1x1", "--output", "r.json"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
    assert_eq!(v[0]["reps"], 1);
}

#[test]
fn network_reports_every_method_with_overlaps() {
    let dir = tempfile::tempdir().unwrap();
    let mut edges = String::from("# random digraph\n");
    let mut state = 12345u64;
    for i in 1..=60u64 {
        for j in 1..=60u64 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if i != j && (state >> 33) % 10 == 0 {
                edges.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    fs::write(dir.path().join("g.txt"), edges).unwrap();
    let out = ok(run(
        &["network", "--edges", "g.txt", "--one-indexed", "--k", "10", "--methods", "hits,expm,fd,spfd50", "--out", "r.json"],
        dir.path(),
    ));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["nodes"], 60);
    let records = v["records"].as_array().unwrap();
    let names: Vec<&str> = records.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(names, ["hits", "expm", "fd", "spfd50"]);
    for r in records {
        assert_eq!(r["top_hubs"].as_array().unwrap().len(), 10);
        assert_eq!(r["top_authorities"].as_array().unwrap().len(), 10);
        assert!(r["elapsed_seconds"].as_f64().unwrap() >= 0.0);
        let hubs = r["overlap_vs_exact"]["hubs"].as_u64().unwrap();
        assert!(hubs <= 10);
        assert!(r["top_hubs"].as_array().unwrap().iter().all(|id| (1..=60).contains(&id.as_u64().unwrap())));
    }
    assert_eq!(records[1]["overlap_vs_exact"]["hubs"], 10);
    assert_eq!(records[1]["overlap_vs_exact"]["authorities"], 10);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["--help"], dir.path())), 0);
    assert_eq!(code(&run(&["frobnicate"], dir.path())), 1);
    let bad_flag = run(&["gen", "--n", "5", "--d", "2", "--k", "1", "--out", "a.mtx", "--bogus"], dir.path());
    assert_eq!(code(&bad_flag), 1);
    assert!(String::from_utf8_lossy(&bad_flag.stderr).contains("Usage"));
    assert_eq!(code(&run(&["network", "--edges", "g.txt", "--methods", "pagerank"], dir.path())), 1);
    assert_eq!(code(&run(&["bench", "--config", "missing.json"], dir.path())), 2);
    let invalid = run(&["gen", "--n", "5", "--d", "2", "--k", "3", "--out", "a.mtx"], dir.path());
    assert_eq!(code(&invalid), 2);
    assert!(String::from_utf8_lossy(&invalid.stderr).starts_with("error:"));
    fs::write(dir.path().join("cfg.json"), r#"{"schema_version": 1, "surprise": true}"#).unwrap();
    assert_eq!(code(&run(&["bench", "--config", "cfg.json"], dir.path())), 2);
}
