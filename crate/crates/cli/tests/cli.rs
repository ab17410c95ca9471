use std::path::Path;
use std::process::{Command, Output};

fn sds(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sds"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run sds")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let o = sds(dir, args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    o
}

fn micro2(dir: &Path) {
    ok(dir, &["toy", "micro2", "--out", "case"]);
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(sds(d.path(), &["sample", "--n", "10"]).status.code(), Some(2));
    assert_eq!(sds(d.path(), &["frobnicate"]).status.code(), Some(2));
    let o = sds(d.path(), &["--workers", "0", "toy", "micro2", "--out", "case"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--workers"));
}

#[test]
fn data_errors_exit_3() {
    let d = tempfile::tempdir().unwrap();
    let o = sds(d.path(), &["validate", "--file", "missing.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("data error"));

    std::fs::write(d.path().join("grid.json"), r#"{"buses": 3}"#).unwrap();
    assert_eq!(sds(d.path(), &["validate", "--file", "grid.json"]).status.code(), Some(3));

    assert_eq!(sds(d.path(), &["toy", "atlantis", "--out", "x"]).status.code(), Some(3));
}

#[test]
fn infeasible_reserve_exits_4() {
    let d = tempfile::tempdir().unwrap();
    micro2(d.path());
    let grid = "case/grid.json";
    let track = "case/track.csv";
    ok(d.path(), &["sample", "--grid", grid, "--track", track, "--method", "sds", "--n", "50", "--out", "p.jsonl"]);
    ok(d.path(), &["select", "--pool", "p.jsonl", "--rule", "random", "--n", "2", "--out", "s.json"]);
    let o = sds(d.path(), &["plan", "--grid", grid, "--selection", "s.json", "--out", "plan.json", "--reserve", "10"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("solver error"));
}

#[test]
fn validate_recognizes_bundle_files() {
    let d = tempfile::tempdir().unwrap();
    micro2(d.path());
    for (f, kind) in [
        ("case/grid.json", "grid"),
        ("case/track.csv", "track"),
        ("case/config.json", "case config"),
        ("case/manifest.json", "run manifest"),
    ] {
        let o = ok(d.path(), &["validate", "--file", f]);
        assert!(stdout(&o).starts_with(&format!("ok: {kind}")), "{f}: {}", stdout(&o));
    }
}

#[test]
fn pipeline_report_and_replay() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["toy", "coastal12", "--out", "case"]);
    for m in ["sds", "smc"] {
        let out = format!("{m}.jsonl");
        ok(p, &["sample", "--grid", "case/grid.json", "--track", "case/track.csv", "--method", m, "--n", "300", "--out", &out]);
    }
    ok(p, &["analyze", "--pool", "sds.jsonl", "--out", "tail.csv"]);
    ok(p, &["select", "--pool", "sds.jsonl", "--rule", "worst", "--n", "3", "--out", "worst.json"]);
    ok(p, &["select", "--pool", "sds.jsonl", "--rule", "stratified", "--n", "4", "--out", "test.json"]);
    ok(p, &["plan", "--grid", "case/grid.json", "--selection", "worst.json", "--out", "plan.json"]);
    ok(p, &["evaluate", "--grid", "case/grid.json", "--plan", "plan.json", "--test-pool", "test.json", "--out", "costs.csv"]);
    ok(p, &["report", "--compare", "sds.jsonl", "smc.jsonl", "--out", "report.csv", "--gnuplot", "report.gp"]);

    let report = std::fs::read_to_string(p.join("report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some("sampler,t,mean,median,max,hill_alpha,excess_kurtosis,mmr"));
    let horizon = 8;
    assert_eq!(lines.clone().count(), 2 * horizon);
    assert!(lines.all(|l| l.starts_with("sds,") || l.starts_with("smc,")));
    assert!(std::fs::read_to_string(p.join("report.gp")).unwrap().contains("'report.csv'"));

    let costs = std::fs::read_to_string(p.join("costs.csv")).unwrap();
    assert_eq!(costs.lines().count(), 1 + 4 + 1);
    assert!(costs.lines().last().unwrap().starts_with("expected,"));
    for f in ["tail.csv", "costs.csv", "report.csv", "plan.json", "test.json"] {
        let o = ok(p, &["validate", "--file", f]);
        assert!(stdout(&o).starts_with("ok"));
    }

    let before = std::fs::read(p.join("costs.csv")).unwrap();
    let o = ok(p, &["--workers", "2", "replay", "--manifest", "costs.csv.manifest.json"]);
    assert!(stdout(&o).contains("replay ok"));
    assert_eq!(std::fs::read(p.join("costs.csv")).unwrap(), before);
}

#[test]
fn replay_detects_changed_input() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    micro2(p);
    ok(p, &["sample", "--grid", "case/grid.json", "--track", "case/track.csv", "--method", "smc", "--n", "20", "--out", "p.jsonl"]);
    let track = p.join("case/track.csv");
    let mut text = std::fs::read_to_string(&track).unwrap();
    text.push('\n');
    std::fs::write(&track, text).unwrap();
    let o = sds(p, &["replay", "--manifest", "p.jsonl.manifest.json"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("track.csv"), "{}", stderr(&o));
}

#[test]
fn seed_changes_pool_and_is_recorded() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    micro2(p);
    let run = |seed: &str, out: &str| {
        ok(p, &["--seed", seed, "sample", "--grid", "case/grid.json", "--track", "case/track.csv", "--method", "smc", "--n", "200", "--out", out]);
        std::fs::read(p.join(out)).unwrap()
    };
    assert_ne!(run("1", "a.jsonl"), run("2", "b.jsonl"));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("b.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seeds"]["sampler"], 2);
    assert_eq!(m["subcommand"], "sample");
}

#[test]
fn lindev_and_sensitivity_write_tables() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let o = ok(p, &["lindev", "--cells", "6", "--out", "lindev.csv"]);
    assert!(stdout(&o).contains("fraction below"));
    let lindev = std::fs::read_to_string(p.join("lindev.csv")).unwrap();
    assert_eq!(lindev.lines().count(), 1 + 36 * 7 * 2);
    ok(p, &["sensitivity", "--n", "100", "--out", "sens.csv"]);
    assert!(std::fs::read_to_string(p.join("sens.csv")).unwrap().lines().count() > 1);
}
