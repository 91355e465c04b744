use std::path::Path;
use std::process::{Command, Output};

fn qcorr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcorr"))
        .current_dir(dir)
        .args(args)
        .env_remove("QCORR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("valid JSON")
}

#[test]
fn zoo_then_witness_on_ghz() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&qcorr(dir.path(), &["zoo", "ghz", "--n", "3", "-o", "g.json"]));
    let report = json(&qcorr(dir.path(), &["witness", "g.json", "--json", "--no-timing"]));
    let w = report["witness"]["value"].as_f64().unwrap();
    assert!((w - 1.0).abs() < 1e-12);
    let pure = &report["witness"]["pure_state"];
    assert!((pure["gme_concurrence"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(report["timing"].is_null());
}

#[test]
fn discord_of_a_single_cut() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&qcorr(dir.path(), &["zoo", "bell-times-zero", "-o", "b.json"]));
    let report = json(&qcorr(
        dir.path(),
        &["discord", "b.json", "--cut", "1|23", "--json", "--starts", "4"],
    ));
    let entries = report["discord"]["per_partition"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert!((entries[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn gmc_on_classical_state_with_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&qcorr(dir.path(), &["zoo", "classical-corr", "-o", "c.json"]));
    let basis = r#"{"dim": 2, "vectors": [[[1,0],[0,0]], [[0,0],[1,0]]]}"#;
    std::fs::write(dir.path().join("z.json"), basis).unwrap();
    let report = json(&qcorr(
        dir.path(),
        &["gmc", "c.json", "--fixed-point", "z.json", "z.json", "--json"],
    ));
    assert_eq!(report["gmc"]["verdict"], "necessary-condition-passed");
    assert!(report["gmc"]["fixed_point"]["distance"].as_f64().unwrap() < 1e-12);
    assert!(report["gmc"]["caveat"].as_str().unwrap().contains("not sufficient"));
}

#[test]
fn text_output_is_aligned_and_default_measures_skip_discord() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&qcorr(dir.path(), &["zoo", "werner", "--p", "0.5", "-o", "w.json"]));
    let text = stdout(&qcorr(dir.path(), &["analyze", "w.json", "--no-timing"]));
    assert!(text.contains("witness"));
    assert!(text.contains("gmc"));
    assert!(!text.contains("\ndiscord"));
}

#[test]
fn invalid_state_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = r#"{"dims": [2], "matrix": [[[1,0],[0,0]], [[0,0],[-0.1,0]]]}"#;
    std::fs::write(dir.path().join("bad.json"), bad).unwrap();
    let out = qcorr(dir.path(), &["analyze", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace"));
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), r#"{"dims": [2],"#).unwrap();
    for args in [
        vec!["analyze", "broken.json"],
        vec!["analyze", "missing.json"],
        vec!["frobnicate"],
        vec!["zoo", "no-such-state"],
        vec!["zoo", "werner", "--p", "2"],
    ] {
        let out = qcorr(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn seed_changes_random_zoo_states() {
    let dir = tempfile::tempdir().unwrap();
    let a = stdout(&qcorr(dir.path(), &["zoo", "random-pure", "--seed", "1"]));
    let b = stdout(&qcorr(dir.path(), &["zoo", "random-pure", "--seed", "1"]));
    let c = stdout(&qcorr(dir.path(), &["zoo", "random-pure", "--seed", "2"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
}
