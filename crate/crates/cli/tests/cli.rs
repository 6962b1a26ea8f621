use std::path::Path;
use std::process::{Command, Output};
use surfmem::frame::{sample_shots, ShotBatch};
use surfmem::{build_memory_circuit, build_patch, Basis, ExperimentConfig, NoiseParams};

fn surfmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfmem")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn no_arguments_prints_usage() {
    let o = surfmem(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(surfmem(&["sweep", "--colour", "red"]).status.code(), Some(2));
}

#[test]
fn validate_reports_distance_three() {
    let o = surfmem(&["validate", "--d", "3", "--rounds", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for b in ["X", "Y", "Z"] {
        assert!(s.contains(&format!("basis {b}: fault distance = 3")), "{s}");
    }
    let o = surfmem(&["validate", "--d", "3", "--rounds", "2", "--cnot-order", "hook-aligned"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fault distance = 2"));
}

#[test]
fn invalid_values_name_the_invariant() {
    let o = surfmem(&["sweep", "--q", "0.7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid q"));
    assert_eq!(surfmem(&["sweep", "--d", "4"]).status.code(), Some(2));
    assert_eq!(surfmem(&["sweep", "--t1", "soon"]).status.code(), Some(2));
    assert_eq!(surfmem(&["sweep", "--rounds", "9:3:1"]).status.code(), Some(2));
    assert_eq!(surfmem(&["sweep", "--t1", "0T"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "run.json");
    std::fs::write(&cfg, r#"{"d": 3, "rounds": "2:6:2", "t1": "2T", "p": 0.006, "shots": 300, "seed": 4}"#).unwrap();
    let out = path(dir.path(), "a.csv");
    let o = surfmem(&["sweep", "--config", &cfg, "--rounds", "2,4", "--workers", "1", "-o", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("2,300,"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path(dir.path(), "a.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["seed"], 4);
    assert_eq!(meta["config"]["rounds"], serde_json::json!([2, 4]));
    for key in ["dep1_after_hadamard", "edge_merge", "edge_weight", "matching", "interval_rule", "rng"] {
        assert!(meta["design"].get(key).is_some(), "{key}");
    }

    std::fs::write(&cfg, r#"{"d": 3, "colour": 1}"#).unwrap();
    assert_eq!(surfmem(&["sweep", "--config", &cfg]).status.code(), Some(2));
    let missing = path(dir.path(), "missing.json");
    assert_eq!(surfmem(&["sweep", "--config", &missing]).status.code(), Some(2));
}

#[test]
fn sweep_range_gives_sixteen_rows_and_ignores_workers() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "w1.csv"), path(dir.path(), "w3.csv"));
    let args = ["sweep", "--d", "3", "--rounds", "5:80:5", "--t1", "2T", "--tphi", "12T", "--p", "0.006", "--q", "0.02", "--shots", "256", "--seed", "7"];
    let run = |workers: &str, out: &str| {
        let mut v = args.to_vec();
        v.extend(["--workers", workers, "-o", out]);
        assert_eq!(surfmem(&v).status.code(), Some(0));
    };
    run("1", &a);
    run("3", &b);
    let csv = std::fs::read(&a).unwrap();
    assert_eq!(csv, std::fs::read(&b).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 17);
    assert!(text.lines().skip(1).any(|l| l.ends_with(",1")));
}

#[test]
fn unwritable_output_fails() {
    let o = surfmem(&["layout", "--d", "3", "-o", "/nonexistent-dir/layout.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn layout_circuit_and_graph_dumps() {
    let o = surfmem(&["layout", "--d", "3"]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["d"], 3);
    let o = surfmem(&["emit-circuit", "--d", "3", "--rounds", "2", "--basis", "x"]);
    assert!(stdout(&o).starts_with("# memory circuit d=3 rounds=2 basis=X"));
    assert_eq!(surfmem(&["emit-circuit", "--basis", "all"]).status.code(), Some(2));
    let g = stdout(&surfmem(&["emit-graph", "--d", "3", "--rounds", "2"]));
    assert!(g.contains("# X-graph nodes=12") && g.contains("# Z-graph nodes=12"), "{g}");
}

#[test]
fn analytic_table_and_comparison() {
    let s = stdout(&surfmem(&["analytic", "--d", "9", "--t1", "2T", "--tphi", "12T", "--p", "0.006"]));
    let row = s.lines().nth(1).unwrap();
    let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cols[1] - 44.6).abs() < 0.1 && (cols[2] - 29.8).abs() < 0.1, "{row}");

    let dir = tempfile::tempdir().unwrap();
    let sweep = path(dir.path(), "s.csv");
    surfmem(&["sweep", "--d", "3", "--rounds", "4:16:4", "--shots", "300", "-o", &sweep]);
    let out = path(dir.path(), "a.csv");
    let o = surfmem(&["analytic", "--d", "3", "--compare", &sweep, "--cycle", "0.1T", "-o", &out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("feasible rounds in T: 10"));
    let cmp = std::fs::read_to_string(path(dir.path(), "a_comparison.csv")).unwrap();
    assert!(cmp.starts_with("d,N_star_z,N_star_x,N_star_combined,empirical_argmin"));
    assert_eq!(surfmem(&["analytic", "--d", "3,5", "--compare", &sweep]).status.code(), Some(2));
}

#[test]
fn heatmap_writes_grid_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "h.csv");
    let o = surfmem(&[
        "heatmap", "--d", "3", "--rounds", "2,4", "--shots", "200", "--grid", "t1=1T,3T", "--grid", "p=0.004,0.008", "-o", &out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1 + 4 * 2);
    let summary = std::fs::read_to_string(path(dir.path(), "h_summary.csv")).unwrap();
    assert!(summary.starts_with("T1,p,argmin_N"));
    assert_eq!(summary.lines().count(), 5);
    assert_eq!(surfmem(&["heatmap", "--grid", "p=0.1"]).status.code(), Some(2));
}

#[test]
fn packed_samples_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "shots.bin");
    let o = surfmem(&["sample", "--d", "3", "--rounds", "2", "--shots", "300", "--seed", "5", "-o", &out]);
    assert_eq!(o.status.code(), Some(0));
    let batch = ShotBatch::read_packed(&std::fs::read(&out).unwrap()).unwrap();
    let cfg = ExperimentConfig {
        basis: Basis::Z,
        d: 3,
        rounds: 2,
        noise: NoiseParams {
            t1: 2.0,
            t_phi: 12.0,
            p: 0.006,
            q: 0.02,
            total_time: 1.0,
        },
        shots: 300,
        seed: 5,
    };
    let c = build_memory_circuit(&cfg, &build_patch(3).unwrap()).unwrap();
    assert_eq!(batch, sample_shots(&c, 300, 5));
}
