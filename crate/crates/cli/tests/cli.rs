use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn zdsym(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zdsym"))
        .current_dir(dir)
        .env_remove("ZDSYM_OUTPUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn real_diag(values: &[f64]) -> String {
    let n = values.len();
    let rows: Vec<Value> = (0..n)
        .map(|i| {
            Value::Array(
                (0..n)
                    .map(|j| serde_json::json!([if i == j { values[i] } else { 0.0 }, 0.0]))
                    .collect(),
            )
        })
        .collect();
    serde_json::json!({ "dim": n, "entries": rows }).to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_pair() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "pair.json", &real_diag(&[1.0, -1.0]));
    let out = zdsym(tmp.path(), &["analyze", "--d", "2", "--input", "pair.json"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read_json(&tmp.path().join("analyze.json"));
    assert_eq!(report["spectral_verdict"], true);
    assert_eq!(report["trace_verdict"], true);
    assert_eq!(report["d"], 2);
}

#[test]
fn scan_finds_divisors_of_four() {
    let tmp = TempDir::new().unwrap();
    let gen = zdsym(
        tmp.path(),
        &[
            "generate",
            "--family",
            "dcyclic",
            "--d",
            "4",
            "--block-dim",
            "2",
            "--count",
            "1",
            "--output",
            "cases",
        ],
    );
    assert_eq!(
        gen.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&gen.stderr)
    );
    let case = tmp.path().join("cases/case_0000.json");
    assert_eq!(read_json(&case)["meta"]["family"], "dcyclic");

    let out = zdsym(
        tmp.path(),
        &[
            "analyze",
            "--scan-d",
            "2..6",
            "--input",
            case.to_str().unwrap(),
            "--output",
            "scan.json",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports = read_json(&tmp.path().join("scan.json"));
    let symmetric: Vec<u64> = reports
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["spectral_verdict"] == true && r["trace_verdict"] == true)
        .map(|r| r["d"].as_u64().unwrap())
        .collect();
    assert_eq!(symmetric, [2, 4]);
}

#[test]
fn malformed_input_is_an_error() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad.json", "{\"dim\": 2, \"entries\": [");
    let out = zdsym(tmp.path(), &["analyze", "--d", "2", "--input", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let out = zdsym(
        tmp.path(),
        &["analyze", "--d", "2", "--input", "missing.json"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn disagreement_exits_two() {
    // a clustering tolerance wide enough to merge -1.001 with -1 makes the
    // spectrum look symmetric while Trace A = -0.001 does not vanish
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "near.json", &real_diag(&[1.0, -1.001]));
    let out = zdsym(
        tmp.path(),
        &[
            "analyze",
            "--d",
            "2",
            "--input",
            "near.json",
            "--cluster-tol",
            "0.01",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let report = read_json(&tmp.path().join("analyze.json"));
    assert_eq!(report["spectral_verdict"], true);
    assert_eq!(report["trace_verdict"], false);
}

#[test]
fn bad_flags_exit_one() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "pair.json", &real_diag(&[1.0, -1.0]));
    assert_eq!(
        zdsym(tmp.path(), &["analyze", "--input", "pair.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        zdsym(
            tmp.path(),
            &[
                "analyze",
                "--d",
                "2",
                "--input",
                "pair.json",
                "--rel-tol",
                "-1"
            ]
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        zdsym(
            tmp.path(),
            &[
                "analyze",
                "--d",
                "2",
                "--input",
                "pair.json",
                "--n-min",
                "5",
                "--n-max",
                "2"
            ]
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        zdsym(tmp.path(), &["verify", "--count", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(zdsym(tmp.path(), &["--help"]).status.code(), Some(0));
}

fn campaign_rows(dir: &Path) -> Vec<csv::StringRecord> {
    let mut reader = csv::Reader::from_path(dir.join("verify_cases.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[1], "family");
    assert_eq!(&headers[7], "trace_verdict");
    reader.records().map(Result::unwrap).collect()
}

#[test]
fn verify_campaign_flags_exactly_the_injected_cases() {
    let tmp = TempDir::new().unwrap();
    let out = zdsym(
        tmp.path(),
        &[
            "verify",
            "--count",
            "20",
            "--broken-every",
            "3",
            "--seed",
            "11",
            "--output",
            "run",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let rows = campaign_rows(&tmp.path().join("run"));
    assert_eq!(rows.len(), 20);
    let mut broken = 0;
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), i);
        let is_broken = &row[1] == "broken";
        broken += usize::from(is_broken);
        assert_eq!(&row[7] == "false", is_broken, "row {i}");
    }
    assert_eq!(broken, 6);
    let summary = read_json(&tmp.path().join("run/verify_summary.json"));
    assert_eq!(summary["disagreements"], 0);
}

#[test]
fn verify_is_deterministic_and_uses_the_output_env() {
    let tmp = TempDir::new().unwrap();
    let run = |sub: &str, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_zdsym"));
        cmd.current_dir(tmp.path())
            .env("ZDSYM_OUTPUT_DIR", tmp.path().join(sub))
            .args(["verify", "--count", "6", "--seed", "3"])
            .args(extra);
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(tmp.path().join(sub).join("verify_cases.csv")).unwrap()
    };
    assert_eq!(run("a", &[]), run("b", &["--sequential"]));
}

#[test]
fn decay_table() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "m.json", &real_diag(&[1.0, -1.0, 0.3]));
    let out = zdsym(
        tmp.path(),
        &[
            "decay",
            "--input",
            "m.json",
            "--d",
            "2",
            "--rho",
            "0.6",
            "--p",
            "1..6",
            "--output",
            "decay.csv",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("t = (rho/|lambda|)^d = 3.600000e-1"),
        "{stdout}"
    );

    let mut reader = csv::Reader::from_path(tmp.path().join("decay.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["p", "r", "measured", "bound", "ratio"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        let measured: f64 = row[2].parse().unwrap();
        let bound: f64 = row[3].parse().unwrap();
        assert!(bound >= measured);
        if i == 0 {
            assert!(row[4].is_empty());
        } else {
            assert!(row[4].parse::<f64>().unwrap() <= 0.36 * 1.1);
        }
    }
}

#[test]
fn decay_rejects_bad_lambda_and_rho() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "m.json", &real_diag(&[1.0, -1.0, 0.3]));
    let bad_index = zdsym(
        tmp.path(),
        &[
            "decay",
            "--input",
            "m.json",
            "--d",
            "2",
            "--lambda-index",
            "7",
        ],
    );
    assert_eq!(bad_index.status.code(), Some(1));
    // the circle would pass through the eigenvalue 0.3
    let bad_rho = zdsym(
        tmp.path(),
        &["decay", "--input", "m.json", "--d", "2", "--rho", "0.3"],
    );
    assert_eq!(bad_rho.status.code(), Some(1));
}
