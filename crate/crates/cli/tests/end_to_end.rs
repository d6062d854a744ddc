use std::path::{Path, PathBuf};
use std::process::Command;

use dmpest::cli::{run, Outcome};
use serde_json::Value;

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("dmpest-e2e-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let p = self.0.join(name);
        std::fs::write(&p, contents).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn dmpest(args: &[&str]) -> Outcome {
    run(std::iter::once("dmpest").chain(args.iter().copied()))
}

fn json(out: &Outcome) -> Value {
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../docs/schemas/{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_schema(name: &str, doc: &Value) {
    let v = schema(name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

const TRIANGLE: &str = "%mode undirected\n0 1 1\n1 2 1\n0 2 1\n";
const SMALL: &str = "%mode undirected\n0 1 0.5\n1 2 0.4 0.3\n2 0 0.4\n2 3 0.2\n";

#[test]
fn triangle_estimate() {
    let s = Scratch::new("triangle");
    let g = s.file("g.txt", TRIANGLE);
    let i = s.file("i.txt", "0 0.5\n");
    let doc = json(&dmpest(&["estimate", "--graph", &g, "--init", &i, "--horizon", "2"]));
    let m: Vec<f64> = serde_json::from_value(doc["marginals"].clone()).unwrap();
    assert_eq!(m, [0.5, 0.75, 0.75]);
    let doc = json(&dmpest(&["oracle", "--graph", &g, "--init", &i, "--horizon", "2"]));
    assert_eq!(doc["sigma"], 1.5);
}

#[test]
fn every_document_matches_its_schema() {
    let s = Scratch::new("schema");
    let g = s.path("g.txt");
    let i = s.path("i.txt");
    assert_eq!(dmpest(&["gen", "--nodes", "40", "--out", &g, "--init-out", &i]).code, 0);
    let small = s.file("small.txt", SMALL);
    let small_init = s.file("small_init.txt", "0 0.5\n3 1\n");
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("estimate", vec!["estimate", "--graph", &g, "--init", &i, "--horizon", "3", "--trajectory"]),
        ("estimate", vec!["estimate-inf", "--graph", &g, "--init", &i]),
        ("estimate", vec!["lt-estimate", "--graph", &small, "--init", &small_init, "--horizon", "3"]),
        ("mc", vec!["mc", "--graph", &g, "--init", &i, "--horizon", "3", "--runs", "200"]),
        ("mc", vec!["mc", "--graph", &small, "--init", &small_init, "--inf", "--model", "lt", "--runs", "200"]),
        ("oracle", vec!["oracle", "--graph", &small, "--init", &small_init, "--horizon", "3", "--messages"]),
        ("oracle", vec!["oracle", "--graph", &small, "--init", &small_init, "--inf", "--model", "lt"]),
        ("compare", vec!["compare", "--graph", &g, "--init", &i, "--horizon", "3", "--runs", "200"]),
        ("certify", vec!["certify", "--graph", &g, "--inf"]),
        ("bracket", vec!["bracket", "--graph", &g, "--init", &i, "--horizon", "4"]),
        ("bench", vec!["bench", "--sizes", "100,200", "--repetitions", "1"]),
        ("bench", vec!["bench", "--sizes", "100", "--repetitions", "1"]),
        ("accuracy", vec!["accuracy", "--nodes", "100", "--runs", "100"]),
    ];
    for (name, args) in cases {
        assert_schema(name, &json(&dmpest(&args)));
    }
}

#[test]
fn exit_codes() {
    let s = Scratch::new("exit");
    let g = s.file("g.txt", TRIANGLE);
    let i = s.file("i.txt", "0 1\n");
    let bad = s.file("bad.txt", "%mode undirected\n0 1 2.0\n");
    assert_eq!(dmpest(&["estimate", "--graph", &g, "--init", &i, "--horizon", "1"]).code, 0);
    assert_eq!(dmpest(&["estimate", "--graph", &bad, "--init", &i, "--horizon", "1"]).code, 1);
    assert_eq!(dmpest(&["estimate", "--graph", &s.path("missing"), "--init", &i, "--horizon", "1"]).code, 1);
    assert_eq!(dmpest(&["estimate", "--graph", &g, "--init", &i]).code, 1);
    assert_eq!(dmpest(&["no-such-command"]).code, 1);
    let out = dmpest(&["--format", "csv", "certify", "--graph", &g, "--horizon", "1"]);
    assert_eq!(out.code, 1);
    assert!(!out.stderr.is_empty());
}

#[test]
fn csv_output_round_trips() {
    let s = Scratch::new("csv");
    let g = s.file("g.txt", "%mode undirected\n%labels\na b 0.5\nb c 0.25\n");
    let i = s.file("i.txt", "a 1\n");
    let out = dmpest(&["--format", "csv", "estimate", "--graph", &g, "--init", &i, "--horizon", "2"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "node,p_hat\na,1.0\nb,0.5\nc,0.125\n");

    let csv = s.path("out.csv");
    let out = dmpest(&["--format", "csv", "--out", &csv, "estimate", "--graph", &g, "--init", &i, "--horizon", "2"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    // Marginals can be fed back as an initial condition.
    let again = json(&dmpest(&["estimate", "--graph", &g, "--init", &csv, "--horizon", "0"]));
    assert_eq!(again["marginals"], serde_json::json!([1.0, 0.5, 0.125]));
}

#[test]
fn monte_carlo_ignores_thread_count() {
    let s = Scratch::new("threads");
    let g = s.path("g.txt");
    let i = s.path("i.txt");
    assert_eq!(dmpest(&["gen", "--nodes", "200", "--out", &g, "--init-out", &i]).code, 0);
    let base = ["mc", "--graph", &g, "--init", &i, "--horizon", "6", "--runs", "3001", "--seed", "9"];
    let one = dmpest(&[&["--threads", "1"][..], &base].concat());
    let four = dmpest(&[&["--threads", "4"][..], &base].concat());
    assert_eq!(one.code, 0);
    assert_eq!(one.stdout, four.stdout);
    let other = dmpest(&[&base[..base.len() - 1], &["10"]].concat());
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn binary_matches_library() {
    let s = Scratch::new("binary");
    let g = s.file("g.txt", SMALL);
    let i = s.file("i.txt", "1 0.7\n");
    let args = ["estimate", "--graph", &g, "--init", &i, "--horizon", "3"];
    let out = Command::new(env!("CARGO_BIN_EXE_dmpest")).args(args).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), dmpest(&args).stdout);

    let out = Command::new(env!("CARGO_BIN_EXE_dmpest")).args(["estimate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
