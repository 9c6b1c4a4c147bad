use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hopfcurl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopfcurl")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn records(v: &Value) -> &Vec<Value> {
    v["records"].as_array().unwrap()
}

#[test]
fn bounds_to_stdout() {
    let o = hopfcurl(&["--command", "bounds"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["command"], "bounds");
    assert_eq!(records(&v).len(), 4);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&hopfcurl(&[])), 2);
    assert_eq!(code(&hopfcurl(&["--command", "nope"])), 2);
    assert_eq!(code(&hopfcurl(&["--command", "bounds", "--format", "xml"])), 2);
    assert_eq!(code(&hopfcurl(&["--command", "verify-atlas", "--dmax", "9"])), 2);
    assert_eq!(code(&hopfcurl(&["--command", "bounds", "--tol-float", "-1"])), 2);
    assert_eq!(code(&hopfcurl(&["--command", "optimality-scan", "--manifold", "s2"])), 2);
    assert_eq!(code(&hopfcurl(&["--config", "/nonexistent/run.toml"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "command = \"bounds\"\nunknown_key = 3\n").unwrap();
    assert_eq!(code(&hopfcurl(&["--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/annulus.csv");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("command = \"annulus\"\nn_max = 3\nformat = \"json\"\nout = {:?}\n", out)).unwrap();
    let o = hopfcurl(&["--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "id,anchor,expected_exact,expected,computed,abs_err,rel_err,tol,pass,wall_time_ms");
    assert_eq!(lines.count(), 9);
    assert!(text.contains("annulus.mu1.3,annulus-first-eigenvalue,1/3,"));
    let leftovers: Vec<_> = std::fs::read_dir(out.parent().unwrap()).unwrap().collect();
    assert_eq!(leftovers.len(), 1, "temporary file left behind");
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("a.csv");
    let mut csv = Vec::new();
    let mut json = Vec::new();
    for _ in 0..2 {
        let o = hopfcurl(&["--command", "verify-identities", "--seed", "11", "--format", "csv", "--out", c.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        csv.push(std::fs::read(&c).unwrap());
        let o = hopfcurl(&["--command", "verify-identities", "--seed", "11"]);
        assert_eq!(code(&o), 0);
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["timing"]["total_ms"].as_f64().unwrap() >= 0.0);
        v.as_object_mut().unwrap().remove("timing");
        json.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(csv[0], csv[1]);
    assert_eq!(json[0], json[1]);
}

#[test]
fn verify_identities_lists_constants() {
    let o = hopfcurl(&["--command", "verify-identities", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for want in ["2/3 * pi^-2", "14/27 * pi^-2", "4/9 * pi^-2", "151/90 * pi^-4", ",1/3,", ",3/5,"] {
        assert!(text.contains(want), "missing {want}");
    }
}

#[test]
fn verify_atlas_checks_fifty_eigenfields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atlas.json");
    let o = hopfcurl(&["--command", "verify-atlas", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    let eigen = records(&v).iter().filter(|r| r["anchor"] == "curl-eigen-equation").count();
    assert_eq!(eigen, 50);
    assert!(records(&v).iter().all(|r| r["pass"] == true));
}

#[test]
fn failing_checks_exit_1_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("taylor.json");
    let cfg = dir.path().join("taylor.toml");
    std::fs::write(&cfg, "command = \"taylor-check\"\ndirections = 1\n[quadrature]\nradial_order = 6\nangular_order = 12\n").unwrap();
    let o = hopfcurl(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = read_json(&out);
    assert_eq!(v["pass"], false);
    assert!(records(&v).iter().any(|r| r["pass"] == false));
}

#[test]
fn torus_scan() {
    let o = hopfcurl(&["--command", "optimality-scan", "--manifold", "t3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<&str> = records(&v).iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["torus.abc-speed-constant", "torus.first-variation", "torus.min-derivative"]);
}
