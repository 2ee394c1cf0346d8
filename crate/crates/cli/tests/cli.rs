use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn voa(args: &[&str]) -> Output {
    voa_with(args, None)
}

fn voa_with(args: &[&str], cache_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_voa"));
    cmd.args(args).env_remove("VOA_CACHE");
    if let Some(p) = cache_env {
        cmd.env("VOA_CACHE", p);
    }
    cmd.output().expect("voa runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8")
}

fn schema_path(verb: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{verb}.schema.json"))
}

/// Runs `args` with JSON output, checks the exit code and validates against the verb's schema.
fn json_report(args: &[&str], code: i32) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = voa(&all);
    assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).expect("json output");
    let verb = report["verb"].as_str().expect("verb").to_string();
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path(&verb)).expect("schema")).expect("schema json");
    let validator = jsonschema::validator_for(&schema).expect("valid schema");
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{verb}: {errors:?}");
    report
}

fn leaves(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => m.values().for_each(|x| leaves(x, out)),
        Value::Array(a) => a.iter().for_each(|x| leaves(x, out)),
        Value::String(s) => out.push(s.clone()),
        Value::Number(n) => out.push(n.to_string()),
        Value::Bool(b) => out.push(b.to_string()),
        Value::Null => {}
    }
}

/// Every value in the JSON report appears in the text report, and keys match.
fn assert_same_data(args: &[&str], code: i32) {
    let report = json_report(args, code);
    let o = voa(args);
    assert_eq!(o.status.code(), Some(code));
    let text = stdout(&o);
    let mut vals = Vec::new();
    leaves(&report, &mut vals);
    for v in vals {
        for line in v.lines() {
            assert!(text.contains(line), "{args:?}: text output lacks '{line}'");
        }
    }
}

#[test]
fn every_verb_emits_schema_valid_json() {
    json_report(&["ope", "G+", "G-"], 0);
    json_report(&["normal-order", ":(d G+) G-:"], 0);
    json_report(&["verify-relation", "--builtin", "weight8"], 0);
    json_report(&["cn-table", "--n", "2", "--telescoping"], 0);
    let r = json_report(&["cn-table", "--n", "1", "--omega", ":(d^2 G+) d^3 G-:"], 0);
    assert_eq!(r["value"], "1");
    json_report(&["solve-decoupling", "--n", "1"], 0);
    json_report(&["solve-correction", "--i", "0"], 0);
    json_report(&["mode-bracket", "G+", "G-", "--convention", "shifted"], 0);
    json_report(&["character", "--ell", "1", "--order", "4", "--z-power-grading"], 0);
    json_report(&["verify-decomposition", "--ell", "1", "--order", "4"], 0);
    json_report(&["verify-corollary", "--ell", "2", "--s", "1", "--order", "4"], 0);
    json_report(&["selftest", "--criterion", "2"], 0);
}

#[test]
fn text_and_json_carry_the_same_data() {
    assert_same_data(&["ope", "G+", "G-", "--ell", "3/2"], 0);
    assert_same_data(&["solve-correction", "--i", "1"], 0);
    assert_same_data(&["mode-bracket", "J", "G+"], 0);
    assert_same_data(&["verify-corollary", "--ell", "1", "--s", "0", "--order", "3"], 0);
    assert_same_data(&["verify-relation", "--builtin", "u01"], 1);
}

#[test]
fn products_and_normal_forms() {
    let r = json_report(&["ope", "G+", "G-"], 0);
    let products = r["products"].as_array().unwrap();
    assert_eq!(products[0]["n"], 2);
    assert_eq!(products[0]["value"], "2*l^2-l");
    assert_eq!(products.last().unwrap()["n"], 0);
    let r = json_report(&["normal-order", "G+ _2_ G-"], 0);
    assert_eq!(r["normal_form"], "2*l^2-l");
    let r = json_report(&["normal-order", "-l/3*J"], 0);
    assert_eq!(r["normal_form"], "-l/3*J");
    let r = json_report(&["normal-order", ":J J:"], 0);
    assert_eq!(r["normal_form"], ":J J:");
    assert_eq!(r["weight"], "2");
    let r = json_report(&["normal-order", "G+ _2_ G-", "--ell", "1"], 0);
    assert_eq!(r["normal_form"], "1");
    let r = json_report(&["ope", "b", "c", "--algebra", "bc"], 0);
    assert_eq!(r["products"][0]["value"], "1");
}

#[test]
fn reports_carry_the_computed_values() {
    let r = json_report(&["cn-table", "--n", "3"], 0);
    assert_eq!(r["matches_closed_form"], true);
    let r = json_report(&["solve-decoupling", "--n", "1"], 0);
    assert_eq!(r["target"], "U[0,5]");
    assert_eq!(r["leading_coefficient"], "(2*l^2-l)/60");
    let r = json_report(&["verify-decomposition", "--ell", "1", "--order", "8"], 0);
    assert_eq!(r["agreement_order"], "8");
    assert!(r["first_mismatch"].is_null());
    assert_eq!(r["calibration_choices"]["theta_start"], "FromZero");
    assert_eq!(r["calibration_choices"]["theta_index"], "Triple");
    let r = json_report(&["character", "--ell", "1", "--order", "2"], 0);
    assert_eq!(r["series"], "q^(-1/60) + q^(59/60) + 2*q^(89/60) + 3*q^(119/60) + O(q^2)");
}

#[test]
fn exit_codes_follow_verification_outcomes() {
    json_report(&["verify-relation", "--builtin", "u01"], 1);
    json_report(&["verify-relation", "--builtin", "u01-amended"], 0);
    let r = json_report(&["selftest", "--criterion", "9"], 1);
    assert_eq!(r["passed"], false);
    assert_eq!(r["as_analyzed"], true);
    assert_eq!(voa(&["selftest", "--criterion", "9", "--accept-analyzed"]).status.code(), Some(0));
    assert_eq!(voa(&["selftest", "--criterion", "13"]).status.code(), Some(2));
    assert_eq!(voa(&["verify-relation"]).status.code(), Some(2));
}

#[test]
fn relation_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.rel");
    std::fs::write(&good, "# J _1_ J\nJ _1_ J\n=\n2*l/3\n").unwrap();
    let r = json_report(&["verify-relation", "--file", good.to_str().unwrap()], 0);
    assert_eq!(r["terms"], 2);
    let bad = dir.path().join("bad.rel");
    std::fs::write(&bad, "J _1_ J\n=\nl\n").unwrap();
    let r = json_report(&["verify-relation", "--file", bad.to_str().unwrap()], 1);
    assert_eq!(r["residual"], "-l/3");
}

#[test]
fn input_errors_are_located() {
    let o = voa(&["normal-order", ":J Q:"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1:4:") && stderr(&o).contains("'Q'"), "{}", stderr(&o));
    let o = voa(&["normal-order", ":J J"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1:5:"), "{}", stderr(&o));
    for bad in [["--ell", "x"], ["--ell", "1/0"]] {
        assert_eq!(voa(&["normal-order", "J", bad[0], bad[1]]).status.code(), Some(2));
    }
    assert_eq!(voa(&["character", "--ell", "1/2"]).status.code(), Some(2));
    assert_eq!(voa(&["verify-corollary", "--ell", "1", "--s", "2"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let one = voa(&["mode-bracket", "G+", "G-", "--threads", "1", "--format", "json"]);
    let four = voa(&["mode-bracket", "G+", "G-", "--threads", "4", "--format", "json"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

const CACHED: [&[&str]; 4] = [
    &["solve-decoupling", "--n", "2"],
    &["verify-relation", "--builtin", "weight8"],
    &["ope", ":G+ G+:", ":G- G-:", "--ell", "2"],
    &["solve-correction", "--i", "1"],
];

#[test]
fn cache_is_written_and_reused_with_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("products.json");
    let p = path.to_str().unwrap();
    for args in CACHED {
        let cold = voa(args);
        let mut with = args.to_vec();
        with.extend(["--cache", p]);
        let first = voa(&with);
        assert!(path.exists());
        let size = std::fs::metadata(&path).unwrap().len();
        let warm = voa(&with);
        let via_env = voa_with(args, Some(&path));
        for o in [&first, &warm, &via_env] {
            assert_eq!(o.status.code(), Some(0));
            assert_eq!(stdout(o), stdout(&cold), "{args:?}");
            assert!(o.stderr.is_empty(), "{}", stderr(o));
        }
        assert!(std::fs::metadata(&path).unwrap().len() >= size);
    }
    // Sections for several algebras live side by side.
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(file["sections"].as_array().unwrap().len() >= 2);
}

#[test]
fn damaged_caches_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("products.json");
    let p = path.to_str().unwrap();
    let args = ["solve-decoupling", "--n", "1", "--cache", p];
    let cold = voa(&args[..3]);
    assert_eq!(voa(&args).status.code(), Some(0));
    let good = std::fs::read_to_string(&path).unwrap();

    // Tampered product: the checksum no longer matches.
    let mut file: Value = serde_json::from_str(&good).unwrap();
    let entry = &mut file["sections"][0]["entries"][0]["value"];
    *entry = serde_json::json!([[[[0, 0]], "12345"]]);
    let cases = [
        ("checksum", serde_json::to_string(&file).unwrap()),
        ("version", good.replacen("\"version\":1", "\"version\":99", 1)),
        ("unreadable", good[..good.len() / 2].to_string()),
        ("unreadable", "not json".to_string()),
    ];
    for (why, text) in cases {
        std::fs::write(&path, text).unwrap();
        let o = voa(&args);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), stdout(&cold), "{why}");
        assert!(stderr(&o).contains("ignoring cache") && stderr(&o).contains(why), "{}", stderr(&o));
        // The rewritten file is valid again.
        let again = voa(&args);
        assert!(again.stderr.is_empty(), "{}", stderr(&again));
    }
}
