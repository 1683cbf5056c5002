#[allow(dead_code)]
mod common;

use common::{run, run_with};

#[test]
fn documented_examples() {
    let r = run(&["virasoro-check", "--model", "fermion", "--cutoff", "6"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["report"]["models"][0]["central_charge"], "1/2");

    let r = run(&["current", "--alpha", "0", "--Tl", "1", "--Tr", "0"]);
    assert_eq!(r.code, 0);
    let j = r.json()["report"]["J_E"].as_f64().unwrap();
    assert!((j - 0.13090).abs() < 5e-6);

    let r = run(&["current", "--alpha", "1.5707963", "--Tl", "1", "--Tr", "0"]);
    assert_eq!(r.code, 0);
    assert!(r.json()["report"]["J_E"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["no-such-command"],
        vec!["current", "--alpha", "sideways"],
        vec!["current", "--Tl", "-1"],
        vec!["virasoro-check", "--cutoff", "1/3"],
        vec!["virasoro-check", "--model", "potts"],
        vec!["su2k-decompose", "--rr-bar", "3/2"],
        vec!["lattice-run", "--sites", "41"],
        vec!["lattice-run", "--lambda", "2"],
        vec!["reflection-phases", "--ring", "/nonexistent/ring.json"],
        vec!["reflection-phases", "--max-order", "0"],
    ] {
        let r = run(&args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
        assert!(!r.stderr.is_empty());
    }
}

#[test]
fn failed_verification_exits_with_one_and_names_the_invariant() {
    // a band much narrower than the temperature cuts the integral far below the conformal value
    let r = run(&["landauer", "--constant-transmission", "0.5", "--Tl", "0.5", "--Tr", "0.1", "--coupling", "0.05"]);
    assert_eq!(r.code, 1, "{}", r.stdout);
    let doc = r.json();
    assert_eq!(doc["passed"], false);
    let diag = doc["diagnostics"][0].as_str().unwrap();
    assert!(diag.contains("Landauer current within 5%"), "{diag}");
    assert!(r.stderr.contains("violated"));
}

#[test]
fn inconsistent_fusion_ring_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ring.json");
    std::fs::write(&path, r#"{"labels":["1","a"],"identity":"1","fusion":[["a","a","b"]]}"#).unwrap();
    let r = run(&["reflection-phases", "--ring", path.to_str().unwrap()]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn csv_output_has_a_header() {
    for (args, header) in [
        (vec!["current", "--format", "csv"], "alpha,Tl,Tr,J_E,exact,symbolic"),
        (vec!["entropy", "--format", "csv", "--temperatures", "3", "--angles", "2"], "key,value"),
        (vec!["lattice-transmission", "--format", "csv", "--points", "3"], "omega,transmission,closed_form,deviation"),
    ] {
        let r = run(&args);
        assert_eq!(r.code, 0);
        assert_eq!(r.stdout.lines().next().unwrap(), header);
        assert!(r.stdout.lines().count() > 1);
    }
}

#[test]
fn out_flag_writes_one_json_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let r = run(&["su2k-decompose", "--k", "3", "--rr-bar", "1/2", "--out", path.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["command"], "su2k-decompose");
    assert_eq!(doc["report"]["coeff_tu1"], "2/3");
    assert_eq!(doc["report"]["coeff_tzk"], "5/12");
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"Tl": "2", "Tr": "1", "current": {"alpha": "pi/2"}}"#).unwrap();
    let cfg = path.to_str().unwrap();
    let r = run(&["current", "--config", cfg]);
    assert_eq!(r.json()["report"]["J_E"].as_f64().unwrap(), 0.0);
    let r = run(&["current", "--config", cfg, "--alpha", "0"]);
    let j = r.json()["report"]["J_E"].as_f64().unwrap();
    assert!((j - std::f64::consts::PI * 3.0 / 24.0).abs() < 1e-14);

    std::fs::write(&path, r#"{"current": {"alpha": 7}}"#).unwrap();
    assert_eq!(run(&["current", "--config", cfg]).code, 2);
}

#[test]
fn output_is_deterministic() {
    let args = ["su2k-current", "--k-max", "4"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn lattice_results_are_cached() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lattice-run", "--sites", "40", "--Tl", "0.5", "--Tr", "0.2"];
    let first = run_with(&args, Some(dir.path()));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let second = run_with(&args, Some(dir.path()));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn full_suite_without_lattice_passes() {
    let r = run(&["full-suite", "--skip-lattice", "--format", "csv"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.lines().skip(1).all(|l| l.contains(",true,")));
}
