use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nlgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlgame")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = nlgame(&all);
    assert!(out.status.code().is_some_and(|c| c < 2), "{}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

/// `# name` sections of a csv report, each as header plus rows.
fn csv_sections(text: &str) -> BTreeMap<String, Vec<Vec<String>>> {
    let mut out = BTreeMap::new();
    for block in text.split("\n\n") {
        let (title, body) = block.split_once('\n').unwrap();
        let name = title.strip_prefix("# ").unwrap().to_string();
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(body.as_bytes());
        let rows = reader.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect();
        out.insert(name, rows);
    }
    out
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Every results table of the json report, laid out as the csv sections are.
fn json_tables(report: &Value) -> BTreeMap<String, Vec<Vec<String>>> {
    let mut out = BTreeMap::new();
    for (name, rows) in report["results"].as_object().unwrap() {
        let rows = rows.as_array().unwrap();
        let header: Vec<String> = rows[0].as_object().unwrap().keys().cloned().collect();
        let mut table = vec![header.clone()];
        for row in rows {
            table.push(header.iter().map(|k| cell_text(&row[k])).collect());
        }
        out.insert(name.clone(), table);
    }
    out
}

fn assert_same_numbers(args: &[&str]) {
    let report = json(args);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let sections = csv_sections(&stdout(&nlgame(&csv_args)));
    for (name, table) in json_tables(&report) {
        assert_eq!(sections.get(&name), Some(&table), "table {name} of {args:?}");
    }
    let checks: Vec<Vec<String>> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| ["name", "status", "detail"].iter().map(|k| cell_text(&c[*k])).collect())
        .collect();
    assert_eq!(sections["checks"][1..], checks[..]);
}

#[test]
fn verify_is_reproducible() {
    let a = nlgame(&["verify", "--n", "6", "--seed", "42", "--format", "json"]);
    let b = nlgame(&["verify", "--n", "6", "--seed", "42", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("one.txt"), dir.path().join("two.txt")];
    for p in &paths {
        let out = nlgame(&["verify", "--seed", "42", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn worker_count_does_not_change_reports() {
    let args = ["play", "--n", "7", "--game", "general", "--trials", "3000", "--format", "json"];
    let default = nlgame(&args);
    let single = Command::new(env!("CARGO_BIN_EXE_nlgame")).args(args).env("NLGAME_WORKERS", "1").output().unwrap();
    assert_eq!(default.stdout, single.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_nlgame")).args(args).env("NLGAME_WORKERS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_passes_across_sizes() {
    for n in ["2", "3", "5", "8"] {
        for game in ["simple", "general"] {
            let report = json(&["verify", "--n", n, "--game", game]);
            for check in report["checks"].as_array().unwrap() {
                assert_ne!(check["status"], "fail", "n = {n}: {check}");
            }
        }
    }
}

#[test]
fn exit_status_follows_checks() {
    assert_eq!(nlgame(&["verify", "--n", "5"]).status.code(), Some(0));

    // two runs that both lose sit far outside three standard errors of 1/10
    let out = nlgame(&["play", "--n", "5", "--strategy", "classical-atoms:balanced", "--trials", "2", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("check failed: loss_rate_within_3se"));

    let out = nlgame(&["play", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("usage"));

    for bad in [
        vec!["play", "--strategy", "telepathy"],
        vec!["play", "--n", "2"],
        vec!["lemma", "--max-l", "0"],
        vec!["lemma", "--family", "/nonexistent/family.txt"],
        vec!["verify", "--format", "yaml"],
    ] {
        assert_eq!(nlgame(&bad).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    assert_same_numbers(&["table", "--n", "12"]);
    assert_same_numbers(&["verify", "--n", "7", "--game", "general"]);
    assert_same_numbers(&["play", "--n", "6", "--strategy", "classical-atoms:balanced", "--trials", "5000"]);
    assert_same_numbers(&["play", "--n", "5", "--exhaustive"]);
    assert_same_numbers(&["lemma", "--n", "6", "--game", "general"]);
}

#[test]
fn table_reaches_two_hundred() {
    let report = json(&["table", "--n", "200", "--n-min", "190"]);
    let rows = report["results"]["table"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[10]["p(n)"], "49/199 (0.246231155779)");
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["status"] == "pass"), "{checks:?}");
}

#[test]
fn play_reports_exact_and_sampled_results() {
    let report = json(&["play", "--n", "9", "--game", "general", "--trials", "20000"]);
    let summary = &report["results"]["summary"][0];
    assert_eq!(summary["wins"], 20000);
    assert_eq!(summary["max_broadcast_bits"], 1);

    let report = json(&["play", "--n", "6", "--exhaustive", "--strategy", "classical-atoms:balanced"]);
    let text = report.to_string();
    assert!(text.contains("2/15"), "{text}");
}

fn write_family(dir: &Path, name: &str, rows: &[&str]) -> String {
    let path = dir.join(name);
    std::fs::write(&path, rows.join("\n")).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn lemma_checks_family_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_family(dir.path(), "good.txt", &["# five labels", "000", "001", "010", "100", "111"]);
    let report = json(&["lemma", "--family", &good]);
    assert_eq!(report["results"]["family"][0]["condition_holds"], true);

    let bad = write_family(dir.path(), "bad.txt", &["0000", "0001", "0010", "0100", "1000", "1111"]);
    let report = json(&["lemma", "--family", &bad]);
    let row = &report["results"]["family"][0];
    assert_eq!(row["condition_holds"], false);
    assert_eq!(row["zero_sum_subset"], "1 2 3 4 5 6");

    let ragged = write_family(dir.path(), "ragged.txt", &["01", "011"]);
    assert_eq!(nlgame(&["lemma", "--family", &ragged]).status.code(), Some(2));
}

#[test]
fn lemma_search_reports_attempts() {
    let report = json(&["lemma", "--n", "10", "--game", "general"]);
    assert_eq!(report["results"]["summary"][0]["l_min"], 5);
    let attempts = report["results"]["attempts"].as_array().unwrap();
    assert_eq!(attempts.len(), 5);
    assert!(attempts[..4].iter().all(|a| a["feasible"] == false));
}
