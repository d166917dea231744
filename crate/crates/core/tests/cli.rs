use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const EXPERIMENT: &str =
    "tensor v1\ndims 2 3 4\n1 2 1 806\n1 3 1 761\n1 3 4 3\n2 1 1 833\n2 2 2 285\n2 3 3 176\n";
const ONES: &str = "tensor v1\ndims 2 2 2\n1 1 1 1\n1 1 2 1\n1 2 1 1\n1 2 2 1\n2 1 1 1\n2 1 2 1\n2 2 1 1\n2 2 2 1\n";
const DIAGONAL: &str = "tensor v1\ndims 2 2 2\n1 1 1 1\n2 2 2 1\n";
const ASYMMETRIC: &str =
    "tensor v1\ndims 2 2 2\n1 1 1 1\n1 1 2 1\n1 2 1 1\n2 1 1 1\n2 2 1 1\n2 2 2 1\n";
const REDUCIBLE: &str = "tensor v1\ndims 2 2 2\n1 1 1 1\n1 2 1 1\n2 2 2 1\n";
const SKEW: &str = "tensor v1\ndims 2 2\n1 2 1\n2 1 -1\n";

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tensornorm"))
        .args(args)
        .env_remove("TENSORNORM_SEED")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn lambda(out: &Output) -> f64 {
    json(out)["lambda"].as_f64().unwrap()
}

#[test]
fn check_reports_structure() {
    let sb = Sandbox::new();
    let f = sb.file("f.tns", EXPERIMENT);
    let out = run(&["check", s(&f), "--p", "3,3,3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["weakly_irreducible"], true);
    assert_eq!(v["admissible_indices"], serde_json::json!([1, 2, 3]));
    assert_eq!(v["chosen_index"], 1);

    let d = sb.file("d.tns", DIAGONAL);
    let out = run(&["check", s(&d), "--p", "3,3,3"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["weakly_irreducible"], false);

    let out = run(&["check", s(&f), "--p", "2,2,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["chosen_index"], Value::Null);
}

#[test]
fn input_errors_exit_one() {
    let sb = Sandbox::new();
    let bad = sb.file("bad.tns", "tensor v1\ndims 2 2\n1 1 x\n");
    assert_eq!(
        run(&["check", s(&bad), "--p", "2,2"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["check", s(&sb.path("missing.tns")), "--p", "2,2"])
            .status
            .code(),
        Some(1)
    );
    let f = sb.file("f.tns", EXPERIMENT);
    assert_eq!(run(&["norm", s(&f), "--p", "3,3"]).status.code(), Some(1));
    assert_eq!(
        run(&["norm", s(&f), "--p", "3,3,0.5"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let out = run(&["norm", s(&f), "--p", "3,4,4", "--method", "pm"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("same exponent"));
}

#[test]
fn norm_methods_agree_on_the_experiment_tensor() {
    let sb = Sandbox::new();
    let f = sb.file("f.tns", EXPERIMENT);
    let h = run(&["norm", s(&f), "--p", "3,3,3", "--method", "hgpm", "--json"]);
    assert_eq!(h.status.code(), Some(0));
    let v = json(&h);
    assert_eq!(v["status"], "converged");
    let b = v["bracket"].as_array().unwrap();
    assert!(b[1].as_f64().unwrap() - b[0].as_f64().unwrap() < 1e-10);
    assert!(v["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r.as_f64().unwrap() < 1e-8));
    let pm = run(&["norm", s(&f), "--p", "3,3,3", "--method", "pm", "--json"]);
    assert_eq!(json(&pm)["bracket"], Value::Null);
    let o = run(&[
        "norm",
        s(&f),
        "--p",
        "3,3,3",
        "--method",
        "oracle",
        "--json",
        "--seed",
        "4",
    ]);
    let l = lambda(&h);
    assert!((lambda(&pm) - l).abs() < 1e-6 * l);
    assert!((lambda(&o) - l).abs() < 1e-6 * l);
}

#[test]
fn output_is_deterministic() {
    let sb = Sandbox::new();
    let f = sb.file("f.tns", EXPERIMENT);
    for method in ["hgpm", "pm", "oracle"] {
        let a = run(&["norm", s(&f), "--p", "4,4,4", "--method", method, "--json"]);
        let b = run(&["norm", s(&f), "--p", "4,4,4", "--method", method, "--json"]);
        assert_eq!(a.stdout, b.stdout, "{method}");
    }
    let env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_tensornorm"))
            .args([
                "norm",
                s(&f),
                "--p",
                "4,4,4",
                "--method",
                "oracle",
                "--json",
            ])
            .env("TENSORNORM_SEED", seed)
            .output()
            .unwrap()
    };
    let flag = run(&[
        "norm",
        s(&f),
        "--p",
        "4,4,4",
        "--method",
        "oracle",
        "--json",
        "--seed",
        "12",
    ]);
    assert_eq!(env("12").stdout, flag.stdout);
    assert!(json(&flag)["note"].as_str().unwrap().contains("seed 12"));
    assert_eq!(env("nope").status.code(), Some(1));
}

#[test]
fn trace_csv_has_the_documented_columns() {
    let sb = Sandbox::new();
    let f = sb.file("f.tns", EXPERIMENT);
    let trace = sb.path("trace.csv");
    let out = run(&["norm", s(&f), "--p", "3,3,3", "--trace", s(&trace)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("k,lambda_minus,lambda_plus,err_vs_final")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 2);
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(row[0] as usize, n + 1);
        assert!(row[1] <= row[2]);
    }
    assert!(rows.last().unwrap()[3] < 1e-10);

    let pm_trace = sb.path("pm.csv");
    run(&[
        "norm",
        s(&f),
        "--p",
        "3,3,3",
        "--method",
        "pm",
        "--trace",
        s(&pm_trace),
    ]);
    let text = std::fs::read_to_string(&pm_trace).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1,,,"));
}

#[test]
fn breakdown_exits_four() {
    let sb = Sandbox::new();
    let f = sb.file(
        "tiny.tns",
        "tensor v1\ndims 2 2\n1 1 1\n1 2 1e-300\n2 2 1e-300\n",
    );
    let out = run(&["norm", s(&f), "--p", "2,2", "--json"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["status"], "numerical_breakdown");
}

#[test]
fn norm_rejects_unsolvable_inputs() {
    let sb = Sandbox::new();
    let d = sb.file("d.tns", DIAGONAL);
    assert_eq!(run(&["norm", s(&d), "--p", "3,3,3"]).status.code(), Some(3));
    let f = sb.file("f.tns", EXPERIMENT);
    assert_eq!(run(&["norm", s(&f), "--p", "2,2,2"]).status.code(), Some(2));
    assert_eq!(run(&["norm", s(&d), "--p", "2,2,2"]).status.code(), Some(2));
    assert_eq!(
        run(&["norm", s(&f), "--p", "5,1.8,5", "--index", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["norm", s(&f), "--p", "5,1.8,5", "--index", "2"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run(&["norm", s(&f), "--p", "5,3,3", "--index", "9"])
            .status
            .code(),
        Some(1)
    );
    let out = run(&["norm", s(&f), "--p", "3,3,3", "--index", "3", "--json"]);
    assert_eq!(json(&out)["eliminated_mode"], 3);
}

#[test]
fn eigen_command() {
    let sb = Sandbox::new();
    let ones = sb.file("ones.tns", ONES);
    let out = run(&["eigen", s(&ones), "--blocks", "3", "--p", "3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((lambda(&out) - 4.0).abs() < 1e-10);
    assert_eq!(json(&out)["parts"].as_array().unwrap().len(), 1);

    let g = sb.file("g.tns", ASYMMETRIC);
    assert_eq!(
        run(&["eigen", s(&g), "--blocks", "1,2", "--p", "3,3"])
            .status
            .code(),
        Some(5)
    );

    let f = sb.file("f.tns", EXPERIMENT);
    let e = run(&[
        "eigen",
        s(&f),
        "--blocks",
        "1,1,1",
        "--p",
        "3,3,3",
        "--json",
    ]);
    let n = run(&["norm", s(&f), "--p", "3,3,3", "--json"]);
    assert_eq!(lambda(&e), lambda(&n));
    assert_eq!(json(&e)["parts"], json(&n)["parts"]);
    assert_eq!(
        run(&["eigen", s(&f), "--blocks", "2,1", "--p", "3,3"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn verify_command() {
    let sb = Sandbox::new();
    let skew = sb.file("skew.tns", SKEW);
    let a = 2f64.powf(-1.0 / 3.0);
    let b = 2f64.powf(-1.0 / 1.5);
    let lam = 2f64.powf(1.0 - 1.0 / 3.0 - 1.0 / 1.5);
    let good = sb.file(
        "good.json",
        &serde_json::json!({"lambda": lam, "parts": [[a, -a], [b, b]]}).to_string(),
    );
    assert_eq!(
        run(&["verify", s(&skew), s(&good), "--p", "3,1.5"])
            .status
            .code(),
        Some(0)
    );
    let bad = sb.file(
        "bad.json",
        &serde_json::json!({"lambda": lam, "parts": [[a, -a * 0.9], [b, b]]}).to_string(),
    );
    let out = run(&["verify", s(&skew), s(&bad), "--p", "3,1.5"]);
    assert_eq!(out.status.code(), Some(6));
    assert_eq!(json(&out)["pass"], false);

    let g = sb.file("g.tns", REDUCIBLE);
    let ystar = sb.file(
        "y.json",
        r#"{"lambda": 1, "parts": [[0, 1], [0, 1], [0, 1]]}"#,
    );
    assert_eq!(
        run(&["verify", s(&g), s(&ystar), "--p", "3,3,3"])
            .status
            .code(),
        Some(0)
    );

    let garbage = sb.file("garbage.json", "{\"lambda\": ");
    assert_eq!(
        run(&["verify", s(&g), s(&garbage), "--p", "3,3,3"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn norm_output_round_trips_through_verify() {
    let sb = Sandbox::new();
    let f = sb.file("f.tns", EXPERIMENT);
    let out = run(&["norm", s(&f), "--p", "4,3,5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let vec = sb.file("v.json", &String::from_utf8(out.stdout.clone()).unwrap());
    assert_eq!(
        run(&["verify", s(&f), s(&vec), "--p", "4,3,5"])
            .status
            .code(),
        Some(0)
    );

    // Reduced form: drop the eliminated mode and let verify lift it.
    let v = json(&out);
    let i = v["eliminated_mode"].as_u64().unwrap() as usize;
    let mut parts = v["parts"].as_array().unwrap().clone();
    parts.remove(i - 1);
    let reduced = serde_json::json!({"lambda": v["lambda"], "parts": parts, "omitted_mode": i});
    let r = sb.file("r.json", &reduced.to_string());
    assert_eq!(
        run(&["verify", s(&f), s(&r), "--p", "4,3,5"]).status.code(),
        Some(0)
    );
    let wrong = serde_json::json!({"lambda": v["lambda"].as_f64().unwrap() * 1.1, "parts": parts, "omitted_mode": i});
    let w = sb.file("w.json", &wrong.to_string());
    assert_eq!(
        run(&["verify", s(&f), s(&w), "--p", "4,3,5"]).status.code(),
        Some(6)
    );
}
