use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn spinsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinsurf"))
        .args(args)
        .output()
        .expect("spawn")
}

fn catalog(stem: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("catalog")
        .join(format!("{stem}.json"))
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn validate_accepts_catalog_file() {
    let o = spinsurf(&["validate", catalog("cube4").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["valid"], true);
}

#[test]
fn validate_reports_violations_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(catalog("square2"))
        .unwrap()
        .replace("\"weight\": 0.1", "\"weight\": 2.0");
    std::fs::write(&path, text).unwrap();
    let o = spinsurf(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["violations"][0]["code"], "surface_weight");
}

#[test]
fn spectrum_of_square() {
    let o = spinsurf(&["spectrum", "--geometry", "square2", "--lambda", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["ground_energy"].as_f64().unwrap() + 5.691642429717664).abs() < 1e-10);
    assert_eq!(v["symmetry"], "XX");
}

#[test]
fn concurrence_of_file_network_at_new_lambda() {
    let path = catalog("square2");
    let o = spinsurf(&[
        "concurrence",
        "--network",
        path.to_str().unwrap(),
        "--lambda",
        "0.01",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout_json(&o)["concurrence"].as_f64().unwrap() > 0.999);
}

#[test]
fn effective_reports_tensor_and_symmetry() {
    let o = spinsurf(&["effective", catalog("square4").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["symmetry"], "XX");
    let z = v["lambda_tensor"]["z"].as_array().unwrap();
    assert_eq!(z.len(), 4);
    assert!(z
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .all(|x| x.as_f64().unwrap() == 0.0));
}

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "3"].into_iter().enumerate() {
        let out = dir.path().join(format!("run{k}.csv"));
        let o = spinsurf(&[
            "sweep",
            "--geometry",
            "cube2",
            "--kz",
            "lin:0:1:0.25",
            "--lambda",
            "0.1",
            "--observable",
            "concurrence",
            "--observable",
            "gap",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    let mut lines = text.lines();
    let header: Value =
        serde_json::from_str(lines.next().unwrap().strip_prefix('#').unwrap().trim()).unwrap();
    assert_eq!(header["manifest_hash"].as_str().unwrap().len(), 64);
    assert!(lines.next().unwrap().starts_with("kz,concurrence,gap"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn sweep_json_output() {
    let o = spinsurf(&[
        "sweep",
        "--geometry",
        "square2",
        "--lambda",
        "0.05,0.1",
        "--observable",
        "gap",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    // usage and spec errors
    assert_eq!(
        spinsurf(&["sweep", "--geometry", "square2", "--lambda", "0.1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(spinsurf(&["figure", "9"]).status.code(), Some(1));
    assert_eq!(
        spinsurf(&["spectrum", "--geometry", "dodecahedron"])
            .status
            .code(),
        Some(1)
    );
    let o = spinsurf(&[
        "sweep",
        "--geometry",
        "square2",
        "--lambda",
        "0.1,0.3,0.2",
        "--observable",
        "gap",
    ]);
    assert_eq!(o.status.code(), Some(1));
    // resource cap
    let o = spinsurf(&["spectrum", "--geometry", "ring(12)", "--max-dim", "1000"]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 3);
}

#[test]
fn frustration_comparison_passes_on_window() {
    let o = spinsurf(&[
        "compare-frustration",
        "--lambda",
        "0.1,0.3",
        "--format",
        "csv",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("true")).count(), 4);
}

#[test]
fn figure_writes_data_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let o = spinsurf(&[
        "figure",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
        "--lambda",
        "0.05,0.1",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let written: Vec<_> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(PathBuf::from)
        .collect();
    assert!(written
        .iter()
        .any(|p| p.extension().is_some_and(|e| e == "gp")));
    for p in &written {
        assert!(p.exists());
    }
}
