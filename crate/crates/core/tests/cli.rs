use std::fs;
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

use pqci_core::harness::REPORT_SCHEMA;

/// Runs the binary, asking for JSON unless the test picks a format.
fn pqci(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pqci"));
    cmd.args(args);
    if args.len() > 1 && !args.contains(&"--format") {
        cmd.args(["--format", "json"]);
    }
    cmd.output()
        .expect("spawn pqci")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn assert_valid(report: &Value) {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let compiled = JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(report) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("schema violations:\n{}", msgs.join("\n"));
}

#[test]
fn decide_is_byte_identical_for_a_seed() {
    let args = ["decide", "--t", "3", "--alice", "2,3,1", "--bob", "5,5,2", "--seed", "42"];
    let a = pqci(&args);
    let b = pqci(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["command"], "decide");
    assert_eq!(r["results"]["outcome"], "Disjoint");
    assert_valid(&r);
}

#[test]
fn every_command_validates_against_the_schema() {
    let runs: &[&[&str]] = &[
        &["decide", "--alice", "1,1,1", "--bob", "2,2,1", "--seed", "1"],
        &["trace", "--alice", "1,1,1", "--bob", "3,3,1", "--seed", "1"],
        &["verify", "--t", "2", "--seed", "1"],
        &["verify", "--t", "4", "--samples", "50", "--seed", "1"],
        &["attack", "--strategy", "bob-direct-measure-one", "--alice", "1,1,1", "--bob", "2,2,1", "--trials", "200", "--seed", "1"],
        &["attack", "--strategy", "bob-entangle-measure-both", "--alice", "1,1,1", "--bob", "2,2,1", "--trials", "100", "--seed", "1"],
        &["attack", "--strategy", "alice-multi-input", "--alice", "1,1,1", "--alice2", "3,3,1", "--bob", "2,2,1", "--trials", "10", "--seed", "1"],
        &["attack", "--strategy", "eve-intercept", "--decoys", "2", "--alice", "1,1,1", "--bob", "2,2,1", "--trials", "100", "--seed", "1"],
        &["attack", "--strategy", "alice-superposed", "--t", "2", "--bob", "2,2,1", "--shots", "50", "--seed", "1"],
        &["cost", "--ts", "2,4", "--seed", "1"],
    ];
    for args in runs {
        let out = pqci(args);
        let code = out.status.code();
        assert!(matches!(code, Some(0) | Some(1)), "{args:?}: {code:?} {}", String::from_utf8_lossy(&out.stderr));
        let r = json(&out);
        assert_eq!(r["passed"].as_bool().unwrap(), code == Some(0), "{args:?}");
        assert_valid(&r);
    }
}

#[test]
fn timing_only_where_it_belongs() {
    let decide = json(&pqci(&["decide", "--alice", "1,1,1", "--bob", "2,2,1", "--seed", "1"]));
    assert!(decide.get("timing").is_none());
    let verify = json(&pqci(&["verify", "--t", "2", "--seed", "1"]));
    assert!(verify["timing"]["wall_seconds"].as_f64().is_some());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["decide", "--alice", "1,1,1"][..],
        &["decide", "--alice", "1,1", "--bob", "1,1,1"],
        &["decide", "--t", "2", "--alice", "4,1,1", "--bob", "1,1,1"],
        &["attack", "--strategy", "nope", "--alice", "1,1,1", "--bob", "1,1,1"],
        &["attack", "--strategy", "alice-superposed", "--t", "3", "--bob", "1,1,1"],
        &["verify", "--t", "4", "--exhaustive"],
        &["frobnicate"],
    ] {
        let out = pqci(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn failed_check_exits_1() {
    // the default precision list includes the small-t cost ratios that miss the band
    let out = pqci(&["cost", "--ts", "4,8", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["passed"], false);
}

#[test]
fn cli_overrides_config_file_and_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# shared settings\nt = 3\nalice = 1,1,1\nbob = 7,7,1\nseed = 5\nformat = json\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let from_file = json(&pqci(&["decide", "--config", cfg_s]));
    assert_eq!(from_file["config"]["t"], 3);
    assert_eq!(from_file["config"]["seed"], 5);
    assert_eq!(from_file["results"]["outcome"], "Disjoint");

    let overridden = json(&pqci(&["decide", "--config", cfg_s, "--bob", "2,2,1", "--seed", "6"]));
    assert_eq!(overridden["config"]["seed"], 6);
    assert_eq!(overridden["config"]["bob"]["x"], 2);
    assert_eq!(overridden["config"]["t"], 3);
    assert_eq!(overridden["results"]["outcome"], "Intersect");

    // defaults fill what neither sets
    assert_eq!(from_file["config"]["trials"], 10000);

    fs::write(&cfg, "t = 3\nwat = 1\n").unwrap();
    assert_eq!(pqci(&["decide", "--config", cfg_s]).status.code(), Some(2));
}

#[test]
fn embedded_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = pqci(&["attack", "--strategy", "bob-direct-measure-both", "--alice", "1,2,1", "--bob", "3,2,2", "--trials", "300"]);
    let r = json(&first);
    let c = &r["config"];
    let circle = |v: &Value| format!("{},{},{}", v["x"], v["y"], v["r"]);
    let text = format!(
        "t = {}\nalice = {}\nbob = {}\nstrategy = {}\ntrials = {}\nseed = {}\n",
        c["t"],
        circle(&c["alice"]),
        circle(&c["bob"]),
        c["strategy"].as_str().unwrap(),
        c["trials"],
        c["seed"]
    );
    let cfg = dir.path().join("again.conf");
    fs::write(&cfg, text).unwrap();
    let again = json(&pqci(&["attack", "--config", cfg.to_str().unwrap()]));
    assert_eq!(r["results"], again["results"]);
}

#[test]
fn out_flag_writes_file_and_formats_render() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = pqci(&["decide", "--alice", "1,1,1", "--bob", "2,2,1", "--seed", "3", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("t,alice,bob,seed,outcome"));
    assert!(csv.contains("Intersect"));

    let text = pqci(&["trace", "--alice", "1,1,1", "--bob", "2,2,1", "--seed", "3", "--format", "text"]);
    let s = String::from_utf8(text.stdout).unwrap();
    assert!(s.contains("[Prepare] pair 1"));
    assert!(s.contains("outcome: Intersect"));
}
