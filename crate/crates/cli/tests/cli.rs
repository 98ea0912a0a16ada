// Copyright 2026 The esw-core Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn esw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esw"))
        .args(args)
        .env_remove("ESW_DEFAULT_TOL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not one JSON document ({}): {}",
            e,
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn real(rows: &[&[f64]]) -> Value {
    Value::from(
        rows.iter()
            .map(|r| r.iter().map(|&x| json!([x, 0.0])).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )
}

/// Four-mode config in the standard basis, with `Lplus` given by hand.
fn four_mode_config(lplus00: f64) -> Value {
    let q = 0.25;
    json!({
        "dim_K": 4,
        // ½[(ψ₁+ψ₂)|1⟩ + (ψ₃+ψ₄)|0⟩], index = 2·spatial + ancilla
        "state": [[0.0,0.0],[0.5,0.0],[0.0,0.0],[0.5,0.0],[0.5,0.0],[0.0,0.0],[0.5,0.0],[0.0,0.0]],
        "operators": {
            "L": real(&[&[1.0,0.0,0.0,0.0], &[0.0,1.0,0.0,0.0], &[0.0,0.0,0.0,0.0], &[0.0,0.0,0.0,0.0]]),
            "Lplus": real(&[&[lplus00,q,-q,q], &[q,3.0*q,q,-q], &[-q,q,q,-q], &[q,-q,-q,q]]),
        }
    })
}

fn write_config(dir: &TempDir, name: &str, config: &Value) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn detector_matrices(out: &Output) -> Vec<Value> {
    stdout_json(out)
        .as_array()
        .expect("synth prints a list")
        .iter()
        .map(|d| d["R"].clone())
        .collect()
}

fn pairs(rows: [[f64; 2]; 2]) -> Value {
    real(&[&rows[0], &rows[1]])
}

#[test]
fn verify_builtin_four_mode() {
    let out = esw(&["verify", "--model", "builtin:four-mode"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["passed"], true);
    let norm = report["incompatibility"]["commutator_norm"]
        .as_f64()
        .unwrap();
    assert!((norm - 1.0).abs() <= 1e-12);
    for key in ["residual_e_t", "residual_t_eplus"] {
        assert!(report["chain"][key].as_f64().unwrap() <= 1e-12);
    }
    assert!(
        report["detector_T_Eplus"]["correlation_residual"]
            .as_f64()
            .unwrap()
            <= 1e-12
    );
    assert!((report["chain"]["probability"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
}

#[test]
fn verify_builtin_simple() {
    let out = esw(&["verify", "--model", "builtin:simple"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["detector_T_E"]["pass"], true);
    assert!(report["detector_T_Eplus"].is_null());
}

#[test]
fn verify_config_file_matches_builtin() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "four.json", &four_mode_config(0.75));
    let out = esw(&["verify", "--model", &path]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let norm = stdout_json(&out)["incompatibility"]["commutator_norm"]
        .as_f64()
        .unwrap();
    assert!((norm - 1.0).abs() <= 1e-12);
}

#[test]
fn verify_perturbed_lplus_fails_idempotence() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "bad.json", &four_mode_config(0.80));
    let out = esw(&["verify", "--model", &path]);
    assert_eq!(code(&out), 1);
    let report = stdout_json(&out);
    assert_eq!(report["passed"], false);
    assert_eq!(report["load_error"]["operator"], "Lplus");
    assert_eq!(report["load_error"]["residual"], "idempotence");
    assert!(report["load_error"]["value"].as_f64().unwrap() > 1e-12);
    assert!(String::from_utf8_lossy(&out.stderr).contains("idempotence"));
}

#[test]
fn verify_bad_input_is_code_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let out = esw(&["verify", "--model", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());

    let garbage = write_config(&dir, "garbage.json", &json!({"dim_K": 2}));
    assert_eq!(code(&esw(&["verify", "--model", &garbage])), 2);
    assert_eq!(code(&esw(&["verify", "--model", "builtin:nope"])), 2);
}

#[test]
fn tolerance_from_environment() {
    // a negative tolerance is rejected whether it arrives by flag or env
    let out = Command::new(env!("CARGO_BIN_EXE_esw"))
        .args(["verify", "--model", "builtin:simple"])
        .env("ESW_DEFAULT_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_esw"))
        .args(["verify", "--model", "builtin:simple"])
        .env("ESW_DEFAULT_TOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["tolerance"], 1e-9);
}

#[test]
fn demo_reports_incompatibility_and_branch_probability() {
    let out = esw(&["demo"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let line = text
        .lines()
        .find(|l| l.starts_with("‖[E+,E]‖"))
        .expect("commutator line");
    let value: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((value - 1.0).abs() <= 1e-12);
    let p: f64 = text
        .lines()
        .find(|l| l.starts_with("P(T = 1)"))
        .and_then(|l| l.rsplit(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((p - 0.5).abs() <= 1e-12);
    assert!(text.contains("outcome 1 (0) of T certifies outcome 1 (0) for both E and E+"));

    let doc = stdout_json(&out);
    assert!((doc["commutator_eplus_e"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((doc["branch_probabilities"]["t1"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
    assert_eq!(doc["lplus"][0], json!([0.75, 0.25, -0.25, 0.25]));

    let quiet = esw(&["demo", "--json"]);
    assert_eq!(code(&quiet), 0);
    assert!(quiet.stderr.is_empty());
    assert_eq!(stdout_json(&quiet), doc);
}

fn read(prefix: &Path, suffix: &str) -> Vec<u8> {
    let mut p = prefix.as_os_str().to_owned();
    p.push(suffix);
    std::fs::read(p).unwrap()
}

#[test]
fn simulate_seed_seven_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |p: &Path| {
        vec![
            "simulate".to_string(),
            "--measure-t".into(),
            "true".into(),
            "--runs".into(),
            "100000".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let run = |p: &Path| {
        let a = args(p);
        esw(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let out_a = run(&a);
    assert_eq!(
        code(&out_a),
        0,
        "{}",
        String::from_utf8_lossy(&out_a.stderr)
    );
    let summary = stdout_json(&out_a);
    assert!(summary["total_variation"].as_f64().unwrap() <= 0.02);
    let f1 = summary["t1_fraction"].as_f64().unwrap();
    assert!((0.49..=0.51).contains(&f1));

    let out_b = run(&b);
    assert_eq!(code(&out_b), 0);
    for suffix in ["_hist.csv", "_exact.csv", "_runs.jsonl"] {
        assert_eq!(read(&a, suffix), read(&b, suffix), "{} differs", suffix);
    }
    let hist = String::from_utf8(read(&a, "_hist.csv")).unwrap();
    assert_eq!(hist.lines().next(), Some("bin_center,probability"));
    assert_eq!(hist.lines().count(), 65);
    let runs = String::from_utf8(read(&a, "_runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 100_000);
}

#[test]
fn simulate_without_measurement_logs_null_outcomes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("u");
    let out = esw(&[
        "simulate",
        "--measure-t",
        "false",
        "--runs",
        "50",
        "--seed",
        "3",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout_json(&out)["t1_fraction"].is_null());
    let runs = String::from_utf8(read(&p, "_runs.jsonl")).unwrap();
    let first: Value = serde_json::from_str(runs.lines().next().unwrap()).unwrap();
    assert!(first["t_outcome"].is_null());
}

#[test]
fn simulate_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("x");
    let out = esw(&["simulate", "--runs", "0", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());

    let unwritable = dir.path().join("no/such/dir/x");
    let out = esw(&[
        "simulate",
        "--runs",
        "10",
        "--out",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);

    let out = esw(&[
        "simulate",
        "--runs",
        "10",
        "--n-points",
        "1000",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn synth_four_mode_finds_which_slit_detector() {
    let out = esw(&["synth", "--model", "builtin:four-mode"]);
    assert_eq!(code(&out), 0);
    let rs = detector_matrices(&out);
    assert!(rs.contains(&pairs([[0.0, 0.0], [0.0, 1.0]])), "{:?}", rs);
    for d in stdout_json(&out).as_array().unwrap() {
        assert_eq!(d["report"]["pass"], true);
    }
}

#[test]
fn synth_identity_and_zero_targets() {
    let out = esw(&["synth", "--target", "identity"]);
    assert_eq!(code(&out), 0);
    assert!(detector_matrices(&out).contains(&pairs([[1.0, 0.0], [0.0, 1.0]])));

    let out = esw(&["synth", "--target", "zero"]);
    assert_eq!(code(&out), 0);
    assert!(detector_matrices(&out).contains(&pairs([[0.0, 0.0], [0.0, 0.0]])));
}

#[test]
fn synth_zero_overlap_config_includes_zero() {
    // Ψ = e₁ ⊗ |1⟩ and Lplus = |e₃⟩⟨e₃|, so E₊Ψ = 0
    let dir = TempDir::new().unwrap();
    let config = json!({
        "dim_K": 3,
        "state": [[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
        "operators": {
            "L": real(&[&[1.0,0.0,0.0], &[0.0,0.0,0.0], &[0.0,0.0,0.0]]),
            "Lplus": real(&[&[0.0,0.0,0.0], &[0.0,0.0,0.0], &[0.0,0.0,1.0]]),
        }
    });
    let path = write_config(&dir, "zero.json", &config);
    let out = esw(&["synth", "--model", &path]);
    assert_eq!(code(&out), 0);
    let rs = detector_matrices(&out);
    assert!(rs.contains(&pairs([[0.0, 0.0], [0.0, 0.0]])), "{:?}", rs);
    // T = 1 ⊗ |1⟩⟨1| does not detect this E₊, so verify reports a failure
    assert_eq!(code(&esw(&["verify", "--model", &path])), 1);
}

#[test]
fn synth_empty_result_is_code_one() {
    // Ψ spread over two spatial modes in a product state with E₊ = |e₁⟩⟨e₁| ⊗ 1:
    // no ancilla projection can reproduce E₊Ψ
    let dir = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let config = json!({
        "dim_K": 2,
        "state": [[0.0,0.0],[h,0.0],[0.0,0.0],[h,0.0]],
        "operators": {
            "L": real(&[&[1.0,0.0], &[0.0,1.0]]),
            "Lplus": real(&[&[1.0,0.0], &[0.0,0.0]]),
        }
    });
    let path = write_config(&dir, "none.json", &config);
    let out = esw(&["synth", "--model", &path]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out), json!([]));
}

#[test]
fn synth_missing_target_is_code_two() {
    let out = esw(&["synth", "--model", "builtin:simple", "--target", "eplus"]);
    assert_eq!(code(&out), 2);
    let out = esw(&["synth", "--model", "builtin:simple", "--target", "E"]);
    assert_eq!(code(&out), 0);
}
