use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    p.display().to_string()
}

fn ergokit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergokit"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn entropy_run_embeds_its_config() {
    let out = ergokit(&[
        "entropy",
        "--space",
        &fixture("golden.json"),
        "--n",
        "12",
        "--scale",
        "1",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["budgets"]["max_n"], 64);
    assert_eq!(v["result"]["series"][11]["count"], 377);
    let reference = v["result"]["reference"].as_f64().unwrap();
    assert!((reference - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-10);
}

#[test]
fn usage_errors_exit_two() {
    let out = ergokit(&["entropy", "--space", "no-such-file.json", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-file.json"));

    let out = ergokit(&["qbound", "--n", "10", "--delta", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--delta 0.7"));

    let out = ergokit(&[
        "entropy",
        "--space",
        &fixture("golden.json"),
        "--n",
        "3",
        "--bogus",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--bogus"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"backend": "full", "alphabet": 2, "colour": "red"}"#).unwrap();
    let out = ergokit(&["entropy", "--space", bad.to_str().unwrap(), "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));
}

#[test]
fn budget_exhaustion_exits_three() {
    let out = ergokit(&[
        "entropy",
        "--space",
        &fixture("golden.json"),
        "--n",
        "12",
        "--max-n",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = ergokit(&[
        "language",
        "--space",
        &fixture("hereditary-log.json"),
        "--n",
        "12",
        "--list",
        "--max-words",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn failed_checks_exit_one_with_a_report() {
    let args = [
        "trace",
        "--space",
        &fixture("golden.json"),
        "--task",
        &fixture("task.json"),
    ];
    let out = ergokit(&[&args[..], &["--z", "010100101"]].concat());
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "check-failed");
    assert_eq!(v["result"]["report"]["ok"], false);
    let out = ergokit(&[&args[..], &["--z", "010101010"]].concat());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn construct_example_passes_with_its_ledger() {
    let out = ergokit(&[
        "construct",
        "--space",
        &fixture("full2.json"),
        "--h0",
        "0.3",
        "--beta0",
        "0.15",
        "--eta0",
        "0.4",
        "--depth",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"]["pass"], true);
    let ledger = v["ledger"].as_array().unwrap();
    assert!(ledger.len() >= 10);
    assert!(ledger
        .iter()
        .all(|c| c["holds"] == true && c["margin"].is_number()));
}

#[test]
fn spectrum_example_finds_p_near_011() {
    let out = ergokit(&["spectrum", "--target", "entropy=0.34657", "--family", "bernoulli"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let p = json(&out)["result"]["parameter"].as_f64().unwrap();
    assert!((p - 0.11).abs() < 5e-4, "{p}");
    let out = ergokit(&["spectrum", "--target", "entropy=0.9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_only_for_series() {
    let out = ergokit(&[
        "entropy",
        "--space",
        &fixture("full2.json"),
        "--n",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("n,count,ln_count_over_n"));
    let out = ergokit(&["qbound", "--n", "10", "--delta", "0.3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout_and_threads_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    let args = ["qbound", "--n", "24", "--delta", "0.25", "--series"];
    let stdout = ergokit(&args).stdout;
    let out = ergokit(&[&args[..], &["--output", path.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read(&path).unwrap();
    let strip = |b: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(b).unwrap();
        v["config"].as_object_mut().unwrap().remove("output");
        v
    };
    assert_eq!(strip(&written), strip(&stdout));

    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_ergokit"))
            .env("ERGOKIT_THREADS", threads)
            .args([
                "separated",
                "--space",
                &fixture("golden.json"),
                "--n",
                "8",
                "--method",
                "brute-force",
            ])
            .output()
            .unwrap()
    };
    assert_eq!(run("zero").status.code(), Some(2));
    let one = run("1");
    let four = run("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn pressure_reports_the_variational_ledger() {
    let out = ergokit(&[
        "pressure",
        "--space",
        &fixture("full2.json"),
        "--potential",
        &fixture("indicator1.json"),
        "--n",
        "6",
        "--measure",
        &fixture("fair.json"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let value = v["result"]["value"].as_f64().unwrap();
    assert!((value - (1.0 + 1f64.exp()).ln()).abs() < 1e-12);
    assert_eq!(v["ledger"].as_array().unwrap().len(), 2);
}
