use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfl"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_analyze_solve() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let out = cfl(&[
        "generate",
        "--lambda",
        "0.3",
        "--threshold-dbm",
        "-15",
        "--seed",
        "4",
        "--out",
        path_str(&graph),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&graph).unwrap();
    assert!(text.lines().any(|l| l.starts_with("graph ")));
    let sidecar: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("g.txt.nodes.json")).unwrap(),
    )
    .unwrap();
    let nodes = sidecar["nodes"].as_array().unwrap();

    let analysis = json(&cfl(&["analyze", path_str(&graph)]));
    assert_eq!(
        analysis["n_vertices"].as_u64().unwrap() as usize,
        nodes.len()
    );
    assert_eq!(analysis["condition_a"]["holds"], true);
    assert!(analysis["components"].is_array());

    let solved = json(&cfl(&["solve", path_str(&graph), "--seed", "1"]));
    assert_eq!(solved["converged"], true);
    assert_eq!(solved["proper_coloring"], true);
    assert_eq!(
        solved["final_assignment"].as_array().unwrap().len(),
        nodes.len()
    );
}

#[test]
fn generate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        let out = cfl(&[
            "generate",
            "--lambda",
            "0.4",
            "--threshold-dbm",
            "-20",
            "--seed",
            "9",
            "--out",
            path_str(p),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn ingest_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let xyz = dir.path().join("aps.xyz");
    std::fs::write(&xyz, "0 0 0\n10 0 0\n0 10 0\n200 200 0\n").unwrap();
    let graph = dir.path().join("aps.txt");
    let out = cfl(&[
        "ingest",
        "--xyz",
        path_str(&xyz),
        "--threshold-dbm",
        "-45",
        "--seed",
        "2",
        "--out",
        path_str(&graph),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let analysis = json(&cfl(&["analyze", path_str(&graph)]));
    assert_eq!(analysis["n_vertices"], 4);
    // The far node is isolated.
    assert_eq!(analysis["chromatic"]["value"], 3);
}

#[test]
fn bounds_from_gamma_and_from_params() {
    let v = json(&cfl(&[
        "bounds",
        "--n",
        "2",
        "--gamma",
        "0.1",
        "--epsilon",
        "0.5",
    ]));
    let t1 = v["theorem1"]["linear"].as_f64().unwrap();
    assert!((t1 - 8.0e16 * std::f64::consts::LN_2).abs() / t1 < 1e-12);
    let c2 = v["corollary2"]["linear"].as_f64().unwrap();
    assert!((c2 - 1386.29).abs() < 0.01);

    // a = 1, b = 0.1, D = 3: gamma = 0.1 / 12
    let v = json(&cfl(&["bounds", "--n", "4", "--d", "3"]));
    let gamma = v["inputs"]["gamma"].as_f64().unwrap();
    assert!((gamma - 0.1 / 12.0).abs() < 1e-15);
    assert!(v["theorem1"]["linear"].is_null());
    assert!(v["theorem1"]["ln"].as_f64().unwrap() > 1000.0);
    assert!(v["corollary2"]["linear"].as_f64().is_some());
}

#[test]
fn experiment_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("r.csv");
    let args = |fmt: &'static str, out: &str| -> Vec<String> {
        [
            "experiment",
            "--lambda",
            "0.2",
            "--threshold-dbm",
            "-20",
            "--trials",
            "6",
            "--max-rounds",
            "20000",
            "--palette",
            "chi+1",
            "--seed",
            "3",
            "--format",
            fmt,
            "--out",
            out,
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let a: Vec<String> = args("csv", path_str(&csv_path));
    let out = cfl(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text
        .starts_with("instance_id,seed,n,d,chi,converged,rounds,frac_satisfied,frac_eligible\n"));
    assert_eq!(text.lines().count(), 7);

    let json_path = dir.path().join("r.json");
    let a: Vec<String> = args("json", path_str(&json_path));
    let out = cfl(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(doc["records"].as_array().unwrap().len(), 6);
    assert_eq!(doc["summary"]["trials"], 6);
}

#[test]
fn exit_codes() {
    // Configuration errors exit with 2.
    assert_eq!(
        cfl(&["bounds", "--n", "0", "--gamma", "0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(cfl(&["bounds", "--n", "2"]).status.code(), Some(2));
    assert_eq!(
        cfl(&["experiment", "--palette", "many"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cfl(&["experiment", "--source", "file"]).status.code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "graph 2 2\nedge 0 5\n").unwrap();
    assert_eq!(cfl(&["analyze", path_str(&bad)]).status.code(), Some(2));

    // I/O errors exit with 3.
    let missing = dir.path().join("missing.txt");
    assert_eq!(cfl(&["analyze", path_str(&missing)]).status.code(), Some(3));
    assert_eq!(cfl(&["solve", path_str(&missing)]).status.code(), Some(3));
    let unwritable = dir.path().join("no/such/dir/g.txt");
    let out = cfl(&[
        "generate",
        "--lambda",
        "0.2",
        "--threshold-dbm",
        "-20",
        "--out",
        path_str(&unwritable),
    ]);
    assert_eq!(out.status.code(), Some(3));
}
