use std::path::Path;
use std::process::{Command, Output};

fn geowl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geowl"))
        .args(args)
        .current_dir(dir)
        .env_remove("GEOWL_SEED")
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("square.json", r#"{"dim": 2, "points": [["0","0"],["1","0"],["1","1"],["0","1"]], "label": "unit square"}"#),
        ("turned.json", r#"{"dim": 2, "points": [["0.6","0.8"],["0","0"],["-0.2","1.4"],["-0.8","0.6"]]}"#),
        ("line012.xyz", "0\n1\n2\n"),
        ("line013.xyz", "0\n1\n3\n"),
        ("tetra.json", r#"{"points": [["0","0","0"],["1","0","0"],["0","1","0"],["0","0","1"],[[1,4],[1,4],[1,4]]]}"#),
        ("bad.json", r#"{"dim": 2, "points": [["0", "0"], ["1"#),
    ];
    for (name, text) in files {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

#[test]
fn color_reports_every_iteration_and_writes_the_fingerprint() {
    let dir = setup();
    let out = geowl(dir.path(), &["color", "square.json", "--out", "fp.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["class_counts"].as_array().unwrap().len(), 4);
    assert_eq!(v["label"], "unit square");
    let fp: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fp.json")).unwrap()).unwrap();
    assert_eq!(fp, v["fingerprint"]);
}

#[test]
fn error_paths_map_to_exit_codes() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(geowl(d, &["color", "bad.json"]).status.code(), Some(2));
    assert_eq!(geowl(d, &["color", "missing.json"]).status.code(), Some(2));
    assert_eq!(geowl(d, &["--tol", "0", "color", "square.json"]).status.code(), Some(2));
    assert_eq!(geowl(d, &["compare", "square.json", "tetra.json"]).status.code(), Some(2));
    assert_eq!(geowl(d, &["roundtrip", "--algo", "wl2d", "tetra.json"]).status.code(), Some(2));
    assert_eq!(geowl(d, &["roundtrip", "--algo", "nope", "square.json"]).status.code(), Some(2));
    assert_eq!(geowl(d, &["--ell", "3", "--max-tuples", "60", "color", "tetra.json"]).status.code(), Some(3));
}

#[test]
fn compare_verdicts() {
    let dir = setup();
    let d = dir.path();
    let same = json(&geowl(d, &["compare", "square.json", "turned.json"]));
    assert_eq!(same["verdict"], "equal");
    assert!(same["first_difference"].is_null());
    let diff = json(&geowl(d, &["compare", "line012.xyz", "line013.xyz"]));
    assert_eq!(diff["verdict"], "different");
    assert_eq!(diff["first_difference"], 1);
    assert_eq!(json(&geowl(d, &["compare", "tetra.json", "tetra.json"]))["verdict"], "equal");
}

#[test]
fn roundtrip_reports_are_written() {
    let dir = setup();
    let d = dir.path();
    for (algo, file) in [("wl2d", "square.json"), ("wlnd", "tetra.json"), ("oneshot", "tetra.json")] {
        let out = geowl(d, &["roundtrip", "--algo", algo, file, "--out", "report.json"]);
        assert_eq!(out.status.code(), Some(0), "{algo}");
        let v = json(&out);
        assert_eq!(v["passed"], true);
        assert!(v["residual"].as_f64().unwrap() < 1e-6);
        assert_eq!(std::fs::read(d.join("report.json")).unwrap(), out.stdout);
    }
}

#[test]
fn generated_clouds_load_back_exactly() {
    let dir = setup();
    let d = dir.path();
    let out = geowl(d, &["--seed", "4", "gen", "--n", "6", "--dim", "3", "--isometry-seed", "2"]);
    std::fs::write(d.join("gen.json"), &out.stdout).unwrap();
    let back = geowl_cli::format::load(&d.join("gen.json")).unwrap();
    assert_eq!(back.len(), 6);
    assert!(matches!(back, geowl_cli::LoadedCloud::Exact(_)));
    assert_eq!(json(&geowl(d, &["roundtrip", "--algo", "oneshot", "gen.json"]))["passed"], true);
}

#[test]
fn search_writes_pair_files() {
    let dir = setup();
    let d = dir.path();
    let out = geowl(d, &["search", "--dim", "2", "--n", "3", "--budget", "5", "--iters", "0", "--pairs-dir", "pairs"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    // with no refinement any two triangles look alike
    let findings = v["findings"].as_array().unwrap();
    assert!(!findings.is_empty());
    for f in findings {
        let a = d.join("pairs").join(format!("finding-{}-a.json", f["attempt"]));
        let b = d.join("pairs").join(format!("finding-{}-b.json", f["attempt"]));
        assert!(geowl_cli::format::load(&a).is_ok() && geowl_cli::format::load(&b).is_ok());
    }
}
