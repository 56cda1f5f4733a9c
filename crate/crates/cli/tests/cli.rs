use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_evicalc"));
    c.env_remove("EVICALC_SEED");
    c
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> String {
    repo().join("data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(repo().join("schema/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = run(&full);
    let v: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), v)
}

fn assert_valid(v: &Value) {
    let validator = validator();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{}", errors.join("\n"));
}

#[test]
fn audit_exit_codes() {
    assert_eq!(code(&["audit", "--measure", "lambda", "--family", "ci-grid", "--tol", "1e-9"]), 0);
    assert_eq!(code(&["audit", "--measure", "weight", "--family", "ci-grid"]), 0);
    assert_eq!(
        code(&["audit", "--measure", "cf", "--family", "ci-random", "--seed", "7", "--samples", "500"]),
        3
    );
    let bad = run(&["audit", "--measure", "frobnitz"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("frobnitz"));
    assert_eq!(code(&["audit"]), 1);
    assert_eq!(code(&["audit", "--measure", "cf", "--tol", "-1"]), 1);
    assert_eq!(code(&["audit", "--measure", "cf", "--family", "explicit"]), 1);
    assert_eq!(code(&["audit", "--measure", "cf", "--arity", "1"]), 1);
    assert_eq!(code(&["audit", "--measure", "cf", "--model", "/nonexistent/model.json"]), 2);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["frobnicate"]), 1);
}

#[test]
fn cf_audit_reports_a_witness() {
    let (c, v) = json(&["audit", "--measure", "cf", "--family", "ci-random", "--seed", "7", "--samples", "500"]);
    assert_eq!(c, 3);
    assert_eq!(v["exit_code"], 3);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["verdict"] == "violated"));
    let collision = &reports[1]["witnesses"][0];
    assert_eq!(collision["role"], "collision");
    assert!(collision["partner"].is_object());
    assert_valid(&v);
}

#[test]
fn explicit_family_from_model_files() {
    let (c, v) = json(&["audit", "--measure", "lambda", "--model", &data("counterexample.model.json")]);
    assert_eq!(c, 0);
    assert_eq!(v["config"]["family"], "explicit");
    let (c, _) = json(&["audit", "--measure", "lambda", "--model", &data("general.model.json"), "--axiom", "modularity"]);
    assert_eq!(c, 3);
}

#[test]
fn demos_print_their_numbers() {
    let out = run(&["demo", "mycin-counterexample"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["0.500000", "0.990000", "0.494949", "0.980000", "0.485051"] {
        assert!(text.contains(needle), "missing {needle}");
    }
    let out = run(&["demo", "cf-limit-trap"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("reductio confirmed"));
    let out = run(&["demo", "internist-modularity"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("strength_given_prior = 4.000000000"));
    assert_eq!(code(&["demo", "nope"]), 1);
}

#[test]
fn every_json_output_validates() {
    let model = data("counterexample.model.json");
    let general = data("general.model.json");
    let rules = data("counterexample.weight.rules.json");
    let cases = data("cases.json");
    let rival = data("rival.model.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["audit", "--measure", "lambda"],
        vec!["audit", "--measure", "posterior", "--family", "general-random", "--samples", "50", "--seed", "2"],
        vec!["audit", "--measure", "evoking", "--family", "ci-grid"],
        vec!["audit", "--measure", "weight", "--log-base", "10", "--model", &general],
        vec!["demo", "mycin-counterexample"],
        vec!["demo", "cf-limit-trap"],
        vec!["demo", "internist-modularity"],
        vec!["eval", "--rules", &rules, "--case", &cases],
        vec!["compare", "--model", &model],
        vec!["compare", "--model", &model, "--model", &rival, "--case", &cases],
    ];
    for args in runs {
        let (_, v) = json(&args);
        assert_valid(&v);
    }
}

#[test]
fn eval_examples() {
    let rules = data("counterexample.weight.rules.json");
    let (c, v) = json(&["eval", "--rules", &rules, "--case", &data("cases.json")]);
    assert_eq!(c, 0);
    let both = &v["beliefs"][0]["hypotheses"][0];
    assert!((both["posterior"].as_f64().unwrap() - 0.99).abs() < 1e-12);

    let (c, v) = json(&["eval", "--rules", &rules, "--case", &data("empty.cases.json")]);
    assert_eq!(c, 0);
    let b = &v["beliefs"][0]["hypotheses"][0];
    assert_eq!(b["accumulated"]["value"], 0.0);
    assert!((b["posterior"].as_f64().unwrap() - 0.01).abs() < 1e-15);

    let cf = data("counterexample.cf.rules.json");
    assert_eq!(code(&["eval", "--rules", &cf, "--case", &data("cases.json"), "--calculus", "weight"]), 2);
    assert_eq!(code(&["eval", "--rules", &data("cases.json"), "--case", &data("cases.json")]), 2);
    let (_, v) = json(&["eval", "--rules", &cf, "--case", &data("cases.json")]);
    assert!((v["beliefs"][0]["hypotheses"][0]["accumulated"]["value"].as_f64().unwrap() - 0.744924).abs() < 1e-6);
}

#[test]
fn compare_examples() {
    let (c, v) = json(&["compare", "--model", &data("counterexample.model.json")]);
    assert_eq!(c, 0);
    let rows = v["divergence"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 36);
    for r in rows {
        match r["calculus"].as_str().unwrap() {
            "weight" | "lambda" => assert!(r["max_abs_error"].as_f64().unwrap() < 1e-9),
            _ => {}
        }
    }
    assert!(rows
        .iter()
        .any(|r| r["calculus"] == "cf" && r["max_abs_error"].as_f64().unwrap() > 0.1));

    let (_, v) = json(&["compare", "--model", &data("uninformative.model.json")]);
    for s in v["divergence"]["summary"].as_array().unwrap() {
        if let Some(e) = s["max_abs_error"].as_f64() {
            assert!(e < 1e-12);
        }
    }
    assert_eq!(code(&["compare", "--model", &data("missing.model.json")]), 2);
    assert_eq!(code(&["compare"]), 1);
}

#[test]
fn csv_output_has_one_row_per_case_and_calculus() {
    let out = run(&["compare", "--model", &data("counterexample.model.json"), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("case,observed,calculus"));
    assert_eq!(lines.count(), 36);
}

#[test]
fn out_flag_and_seed_env() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["audit", "--measure", "cf", "--family", "ci-random", "--samples", "40", "--format", "json"];
    let s = bin()
        .args(base)
        .args(["--seed", "9", "--out", a.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(3));
    let s = bin()
        .args(base)
        .args(["--out", b.to_str().unwrap()])
        .env("EVICALC_SEED", "9")
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(3));
    let va: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let vb: Value = serde_json::from_str(&std::fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(va["config"]["seed"], 9);
    assert_eq!(va["reports"], vb["reports"]);
}
