use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn smtpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smtpd"))
        .args(args)
        .env_remove("SMTPD_SEED")
        .output()
        .unwrap()
}

fn last_record(out: &Output) -> Value {
    let stdout = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(stdout.lines().last().unwrap()).unwrap()
}

#[test]
fn reliability_emits_trials_then_summary() {
    let out = smtpd(&["reliability", "--n", "3", "--t", "2", "--m", "16", "--l", "4", "--trials", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<Value> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1001);
    for (i, rec) in lines[..1000].iter().enumerate() {
        assert_eq!(rec["record"], "trial");
        assert_eq!(rec["trial"], i as u64);
        assert!(rec["timestamp"].is_u64());
    }
    assert_eq!(lines[1000]["record"], "summary");
    assert_eq!(lines[1000]["bound"], 0.25);
}

#[test]
fn passive_adversary_never_causes_failures() {
    let out = smtpd(&["reliability", "--adversary", "passive", "--trials", "2000", "--summary-only"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(last_record(&out)["failure_rate"], 0.0);
}

#[test]
fn invalid_input_exits_two() {
    for args in [
        &["reliability", "--t", "4", "--n", "4"][..],
        &["reliability", "--adversary", "gremlin"],
        &["reliability", "--trials", "10"],
        &["reliability", "--l", "4", "--kappa", "10"],
        &["privacy", "--format", "csv"],
        &["attack", "--demo", "swap", "--toy", "missing.json"],
        &["attack", "--demo", "swap", "--toy", "xor2"],
        &["rate"],
    ] {
        assert_eq!(smtpd(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn privacy_exit_codes() {
    let ok = smtpd(&["privacy", "--n", "2", "--t", "1", "--m", "2", "--l", "1", "--adversary", "substitute"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(last_record(&ok)["max_distance"]["num"], 0);
    let leak = smtpd(&["privacy", "--protocol", "cleartext"]);
    assert_eq!(leak.status.code(), Some(1));
    assert_eq!(last_record(&leak)["max_distance_f64"], 1.0);
    let big = smtpd(&["privacy", "--m", "64"]);
    assert_eq!(big.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&big.stderr).contains("2^"));
}

#[test]
fn attack_on_a_toy_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = smtpd(&["toy", "otp2"]);
    assert_eq!(spec.status.code(), Some(0));
    let path = dir.path().join("otp2.json");
    fs::write(&path, &spec.stdout).unwrap();
    let from_file = smtpd(&["attack", "--demo", "swap", "--toy", path.to_str().unwrap(), "--no-timestamp"]);
    let builtin = smtpd(&["attack", "--demo", "swap", "--no-timestamp"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, builtin.stdout);

    let mut broken: Value = serde_json::from_slice(&spec.stdout).unwrap();
    broken["rounds"][1].as_array_mut().unwrap().pop();
    fs::write(&path, broken.to_string()).unwrap();
    assert_eq!(smtpd(&["attack", "--demo", "swap", "--toy", path.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&path, "{").unwrap();
    assert_eq!(smtpd(&["attack", "--demo", "swap", "--toy", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn impersonation_demo() {
    let out = smtpd(&["attack", "--demo", "impersonate-r", "--toy", "relay3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = last_record(&out);
    assert_eq!(r["p_success_given_distinct"], r["p_fail_given_distinct"]);
}

#[test]
fn rate_single_and_sweep() {
    let out = smtpd(&["rate", "--n", "4", "--l", "8", "--m", "64"]);
    assert_eq!(last_record(&out)["wire_rate"], 4.5);

    let csv = smtpd(&["rate", "--n", "5", "--l", "8", "--sweep-log2", "6:16", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut rows = csv_rows(&text);
    assert_eq!(rows.len(), 11);
    let rates: Vec<f64> = rows.iter_mut().map(|r| r["public_rate"].parse().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] < w[0]), "{rates:?}");
}

fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| header.iter().map(|h| h.to_string()).zip(l.split(',').map(String::from)).collect())
        .collect()
}

#[test]
fn seed_flag_env_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.jsonl");
    let args = ["reliability", "--m", "16", "--l", "4", "--trials", "1000", "--no-timestamp"];
    let flag = smtpd(&[&args[..], &["--seed", "5"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_smtpd"))
        .args(args)
        .args(["--output", path.to_str().unwrap()])
        .env("SMTPD_SEED", "5")
        .output()
        .unwrap();
    assert!(env.stdout.is_empty());
    assert_eq!(fs::read(&path).unwrap(), flag.stdout);
    let other = smtpd(&[&args[..], &["--seed", "6"]].concat());
    assert_ne!(other.stdout, flag.stdout);
}
