use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn gbsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbsk"))
        .args(args)
        .env_remove("GBSK_THREADS")
        .output()
        .expect("spawn gbsk")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes 4 blobs of 100 points in 2-D with a label column.
fn gen(dir: &Path) -> std::path::PathBuf {
    let data = dir.join("blobs.csv");
    let out = gbsk(&["gen", "--clusters", "4", "--per-cluster", "100", "--dim", "2", "--std", "0.5", "--seed", "3", "--out", s(&data)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    data
}

#[test]
fn cluster_writes_labels_and_report() {
    let dir = tempdir().unwrap();
    let data = gen(dir.path());
    let labels = dir.path().join("labels.txt");
    let report = dir.path().join("report.json");
    let out = gbsk(&[
        "cluster", "--in", s(&data), "--has-labels", "--k", "4", "--s", "10",
        "--out", s(&labels), "--report", s(&report),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let lines: Vec<u32> = fs::read_to_string(&labels).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(lines.len(), 400);
    assert!(lines.iter().all(|&l| (1..=4).contains(&l)));

    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["n"], 400);
    assert_eq!(r["params"]["s"], 10);
    assert_eq!(r["params"]["m"], 40);
    assert!((r["params"]["alpha"].as_f64().unwrap() - 0.05).abs() < 1e-12);
    assert_eq!(r["params"]["variant"], "standard");
    assert_eq!(r["diagnostics"]["rootCount"], 4);
    for step in ["step1", "step2", "step3", "step4", "step5", "total"] {
        assert!(r["stepTimingsMs"][step].as_f64().unwrap() >= 0.0);
    }
    assert!(r["metrics"]["acc"].as_f64().unwrap() >= 0.99);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ACC"));
}

#[test]
fn labels_go_to_stdout_by_default() {
    let dir = tempdir().unwrap();
    let data = gen(dir.path());
    let out = gbsk(&["agbsk", "--in", s(&data), "--has-labels", "--k", "4", "--seed", "7"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 400);
}

#[test]
fn agbsk_is_deterministic_per_seed() {
    let dir = tempdir().unwrap();
    let data = gen(dir.path());
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for (path, threads) in [(&a, "1"), (&b, "2")] {
        let out = gbsk(&["--threads", threads, "agbsk", "--in", s(&data), "--has-labels", "--k", "4", "--seed", "7", "--out", s(path)]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn variant_and_unlimited_budget() {
    let dir = tempdir().unwrap();
    let data = gen(dir.path());
    let report = dir.path().join("r.json");
    let out = gbsk(&[
        "cluster", "--in", s(&data), "--has-labels", "--k", "4", "--m", "-1",
        "--variant", "no-sampling", "--report", s(&report), "--out", s(&dir.path().join("l.txt")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["params"]["variant"], "no-sampling");
    assert_eq!(r["params"]["m"], -1);
    assert_eq!(r["diagnostics"]["sampleSize"], 0);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempdir().unwrap();
    let data = gen(dir.path());
    assert_eq!(gbsk(&["cluster", "--in", s(&data)]).status.code(), Some(2));
    assert_eq!(gbsk(&[]).status.code(), Some(2));
    assert_eq!(gbsk(&["cluster", "--in", s(&data), "--k", "2", "--variant", "bogus"]).status.code(), Some(2));
    assert_eq!(gbsk(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = gbsk(&["agbsk", "--in", s(&missing), "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));

    let tiny = dir.path().join("tiny.csv");
    fs::write(&tiny, "0,0\n0,0\n0,0\n1,1\n1,1\n1,1\n").unwrap();
    let out = gbsk(&["agbsk", "--in", s(&tiny), "--k", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("insufficient key balls") && err.contains("raise"), "{err}");

    let data = gen(dir.path());
    let out = gbsk(&["cluster", "--in", s(&data), "--has-labels", "--k", "4", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_binary_and_eval() {
    let dir = tempdir().unwrap();
    let bin = dir.path().join("d.bin");
    let truth = dir.path().join("truth.txt");
    let out = gbsk(&[
        "gen", "--clusters", "3", "--per-cluster", "50", "--dim", "3", "--std", "0.5",
        "--out", s(&bin), "--labels-out", s(&truth),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read(&bin).unwrap().len(), 25 + 150 * 3 * 8);

    let pred = dir.path().join("pred.txt");
    let out = gbsk(&["agbsk", "--in", s(&bin), "--truth", s(&truth), "--k", "3", "--out", s(&pred)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = gbsk(&["eval", "--pred", s(&pred), "--truth", s(&truth)]);
    assert!(out.status.success());
    let m: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["acc", "ari", "ami"] {
        assert!(m[key].as_f64().unwrap() >= 0.99, "{m}");
    }

    fs::write(&pred, "1\n2\n").unwrap();
    assert_eq!(gbsk(&["eval", "--pred", s(&pred), "--truth", s(&truth)]).status.code(), Some(1));
}

#[test]
fn dump_skeleton_csv_and_svg() {
    let dir = tempdir().unwrap();
    let data = gen(dir.path());
    let edges = dir.path().join("edges.csv");
    let balls = dir.path().join("balls.csv");
    let peaks = dir.path().join("peaks.csv");
    let svg = dir.path().join("sk.svg");
    let out = gbsk(&[
        "dump-skeleton", "--in", s(&data), "--has-labels", "--k", "4",
        "--edges", s(&edges), "--balls", s(&balls), "--peaks", s(&peaks), "--svg", s(&svg), "--with-points",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let edge_csv = fs::read_to_string(&edges).unwrap();
    let mut lines = edge_csv.lines();
    assert_eq!(lines.next().unwrap(), "child,parent,c0,c1,label");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    let w = rows.len();
    let roots = rows.iter().filter(|r| r[1] == "-1").count();
    assert_eq!(roots, 4);
    assert_eq!(fs::read_to_string(&balls).unwrap().lines().count(), w + 1);
    assert_eq!(fs::read_to_string(&peaks).unwrap().lines().next().unwrap(), "id,density,delta,gamma");
    let drawing = fs::read_to_string(&svg).unwrap();
    assert!(drawing.starts_with("<svg"));
    assert_eq!(drawing.matches("class=\"edge\"").count(), w - 4);
    assert_eq!(drawing.matches("class=\"ball\"").count(), w);
}

#[test]
fn dump_skeleton_rejects_svg_above_three_dims() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("d16.csv");
    assert!(gbsk(&["gen", "--clusters", "2", "--per-cluster", "60", "--dim", "16", "--out", s(&data)]).status.success());
    let out = gbsk(&["dump-skeleton", "--in", s(&data), "--has-labels", "--k", "2", "--svg", s(&dir.path().join("x.svg"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SVG"));
    // CSV works at any dimension: W rows after the header
    let out = gbsk(&["dump-skeleton", "--in", s(&data), "--has-labels", "--k", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().ends_with("c15,label"));
    assert!(text.lines().count() >= 3);
}

#[test]
fn normalize_flag_is_accepted() {
    let dir = tempdir().unwrap();
    let data = gen(dir.path());
    let out = gbsk(&["agbsk", "--in", s(&data), "--has-labels", "--k", "4", "--normalize", "minmax"]);
    assert!(out.status.success());
    assert_eq!(gbsk(&["agbsk", "--in", s(&data), "--k", "4", "--normalize", "zscore"]).status.code(), Some(2));
}

#[test]
fn bench_writes_tables() {
    let dir = tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(
        &plan,
        r#"{
            "datasets": [
                {"name": "small", "synthetic": {"clusterCount": 3, "pointsPerCluster": 200, "dimension": 2, "clusterStd": 0.5}},
                {"name": "large", "synthetic": {"clusterCount": 3, "pointsPerCluster": 400, "dimension": 2, "clusterStd": 0.5}}
            ],
            "grid": {"s": [10, 20]},
            "repetitions": 2,
            "seeds": [1]
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = gbsk(&["bench", "--plan", s(&plan), "--out-dir", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(out_dir.join("results.csv")).unwrap().lines().count(), 1 + 2 * 2 * 2);
    assert_eq!(fs::read_to_string(out_dir.join("summary.csv")).unwrap().lines().count(), 1 + 2 * 2);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scaling"]["sizes"], serde_json::json!([600, 1200]));

    fs::write(&plan, r#"{"datasets": [], "repetitions": 1}"#).unwrap();
    assert_eq!(gbsk(&["bench", "--plan", s(&plan), "--out-dir", s(&out_dir)]).status.code(), Some(1));
}
