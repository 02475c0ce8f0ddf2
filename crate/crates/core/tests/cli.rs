//! The `thomae` binary: exit codes, error objects, cache behavior.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use thomae::io::ConfigFile;
use thomae::thomae::example7_problem;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, doc: &Value) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, serde_json::to_string_pretty(doc).unwrap()).unwrap();
        p
    }

    fn example(&self) -> PathBuf {
        self.write("ex.json", &example_doc())
    }

    /// Runs the binary with its cache inside the sandbox.
    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_thomae"))
            .args(args)
            .env("THOMAE_CACHE_DIR", self.path("cache"))
            .output()
            .unwrap()
    }
}

fn example_doc() -> Value {
    let (c, t, l) = example7_problem();
    serde_json::to_value(ConfigFile::new(&c, &t, Some(&l))).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn error_of(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str::<Value>(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))["error"].clone()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn validate_accepts_the_worked_example() {
    let sb = Sandbox::new();
    let o = sb.run(&["validate", s(&sb.example())]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("genus 2"));
}

#[test]
fn unknown_field_is_a_schema_error_with_its_path() {
    let sb = Sandbox::new();
    let mut doc = example_doc();
    doc["tree"]["inner"][0]["colour"] = Value::from("white");
    let o = sb.run(&["validate", s(&sb.write("bad.json", &doc))]);
    assert_eq!(code(&o), 1);
    let e = error_of(&o);
    assert_eq!(e["kind"], "schema");
    assert_eq!(e["exit_code"], 1);
    assert!(e["path"].as_str().unwrap().starts_with("tree.inner"), "{e}");
}

#[test]
fn monochromatic_edge_is_invalid_input() {
    let sb = Sandbox::new();
    let mut doc = example_doc();
    for v in doc["tree"]["inner"].as_array_mut().unwrap() {
        v["color"] = Value::from("white");
    }
    let o = sb.run(&["verify", s(&sb.write("mono.json", &doc))]);
    assert_eq!(code(&o), 1);
    assert_eq!(error_of(&o)["kind"], "invalid_input");
}

#[test]
fn unbalanced_labeling_and_missing_file_are_invalid_input() {
    let sb = Sandbox::new();
    let mut doc = example_doc();
    doc["Lambda"] = serde_json::json!([0, 0, 0, 1]);
    assert_eq!(code(&sb.run(&["verify", s(&sb.write("l.json", &doc))])), 1);
    assert_eq!(code(&sb.run(&["validate", s(&sb.path("absent.json"))])), 1);
    assert_eq!(code(&sb.run(&["verify", s(&sb.example()), "--eps=-1"])), 1);
    let o = sb.run(&["verify", s(&sb.example()), "--precision", "quad"]);
    assert_eq!(code(&o), 1);
    assert_eq!(error_of(&o)["kind"], "invalid_input");
}

#[test]
fn loose_quadrature_is_a_numerical_failure() {
    let sb = Sandbox::new();
    let o = sb.run(&["verify", s(&sb.example()), "--no-cache", "--eps", "1e-1"]);
    assert_eq!(code(&o), 2);
    let e = error_of(&o);
    assert_eq!(e["kind"], "numerical");
    assert_eq!(e["stage"], "period_matrices");
}

#[test]
fn inaccurate_periods_fail_verification() {
    let sb = Sandbox::new();
    let o = sb.run(&["verify", s(&sb.example()), "--no-cache", "--eps", "1e-3"]);
    assert_eq!(code(&o), 3);
    assert_eq!(error_of(&o)["kind"], "verification");
}

#[test]
fn verify_passes_at_both_precisions() {
    let sb = Sandbox::new();
    let ex = sb.example();
    for p in ["double", "extended"] {
        let o = sb.run(&["verify", s(&ex), "--precision", p, "--json"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let r = stdout_json(&o);
        assert_eq!(r["precision"], p);
        assert_eq!(r["result"]["verification"]["pass"], true);
    }
}

#[test]
fn warm_cache_reproduces_the_report_exactly() {
    let sb = Sandbox::new();
    let ex = sb.example();
    let cold = sb.run(&["periods", s(&ex), "--json"]);
    assert_eq!(code(&cold), 0);
    assert!(std::fs::read_dir(sb.path("cache")).unwrap().count() > 0, "cache directory stays empty");
    let warm = sb.run(&["periods", s(&ex), "--json"]);
    assert_eq!(cold.stdout, warm.stdout);
    let uncached = sb.run(&["periods", s(&ex), "--json", "--no-cache"]);
    assert_eq!(cold.stdout, uncached.stdout);
}

#[test]
fn cache_dir_flag_beats_the_environment() {
    let sb = Sandbox::new();
    let flag = sb.path("flagged");
    let o = sb.run(&["periods", s(&sb.example()), "--cache-dir", s(&flag)]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_dir(&flag).unwrap().count() > 0);
    assert!(!sb.path("cache").exists());
}

#[test]
fn theta_reads_tau_from_a_periods_report() {
    let sb = Sandbox::new();
    let periods = sb.run(&["periods", s(&sb.example()), "--json"]);
    let report = sb.write("periods.json", &stdout_json(&periods));
    let o = sb.run(&["theta", "--tau", s(&report), "--char", "5/6,5/6;1/6,1/6", "--json"]);
    assert_eq!(code(&o), 0);
    let v = &stdout_json(&o)["result"]["value"];
    let (re, im) = (v[0].as_f64().unwrap(), v[1].as_f64().unwrap());
    assert!((re - 1.086007591584452).abs() < 1e-12 && (im + 0.470642395726817).abs() < 1e-12, "{v}");
}

#[test]
fn theta_rejects_a_malformed_characteristic() {
    let sb = Sandbox::new();
    let tau = sb.write("tau.json", &serde_json::json!([[[0.0, 1.0]]]));
    let o = sb.run(&["theta", "--tau", s(&tau), "--char", "1/5;0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn seeded_runs_are_deterministic() {
    let sb = Sandbox::new();
    let ex = sb.example();
    let a = sb.run(&["verify", s(&ex), "--seed", "7", "--no-cache", "--json"]);
    let b = sb.run(&["verify", s(&ex), "--seed", "7", "--no-cache", "--json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn example7_selftest_and_degenerate_pass() {
    let sb = Sandbox::new();
    for args in [vec!["example7"], vec!["selftest"]] {
        let o = sb.run(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let ex = sb.example();
    let o = sb.run(&["degenerate", s(&ex), "--merge", "2", "--tilde", "2.5", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout_json(&o)["result"].is_object());
    let o = sb.run(&["degenerate", s(&ex), "--merge", "3", "--tilde", "2.5"]);
    assert_eq!(code(&o), 1);
}
