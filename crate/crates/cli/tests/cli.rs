use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn qle(args: &[&str]) -> (Value, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_qle")).args(args).env_remove("QLE_TOL").output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (value, String::from_utf8(out.stderr).unwrap(), out.status.code().unwrap())
}

fn fixture(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let mut args = vec!["examples", name, "-o", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (_, err, code) = qle(&args);
    assert_eq!(code, 0, "{err}");
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_reports_first_violation() {
    let dir = tempfile::tempdir().unwrap();
    let good = fixture(dir.path(), "spontaneous_emission", &[]);
    let (r, _, code) = qle(&["validate", p(&good)]);
    assert_eq!((code, r["valid"].as_bool()), (0, Some(true)));
    assert!(r["input_digest"].as_str().unwrap().starts_with("sha256:"));

    // scale the gauge by 1.1
    let text = std::fs::read_to_string(&good).unwrap();
    let mut file: Value = serde_json::from_str(&text).unwrap();
    for row in file["S_blocks"][0][0].as_array_mut().unwrap() {
        for z in row.as_array_mut().unwrap() {
            let re = z[0].as_f64().unwrap();
            z[0] = Value::from(re * 1.1);
        }
    }
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&file).unwrap()).unwrap();
    let (r, _, code) = qle(&["validate", p(&bad)]);
    assert_eq!(code, 1);
    assert_eq!(r["violation"]["kind"], "GaugeNotUnitary");
    assert!(r["violation"]["message"].as_str().unwrap().contains("unitary"));

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let (_, err, code) = qle(&["validate", p(&empty)]);
    assert_eq!(code, 2);
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let emission = fixture(dir.path(), "spontaneous_emission", &[]);
    let (r, err, code) = qle(&["classify", p(&emission)]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("Quantum")));
    assert!(err.contains("decompose"));
    let (_, _, code) = qle(&["classify", p(&emission), "--require-classical"]);
    assert_eq!(code, 1);

    let mixed = fixture(dir.path(), "example_4_2", &["--theta", "0.5235987755982988", "--lambda", "2"]);
    let (r, _, _) = qle(&["classify", p(&mixed)]);
    assert_eq!(r["not_classical"]["reason"], "WienerGramMismatch");

    let brownian = fixture(dir.path(), "brownian_d1", &[]);
    let (r, _, code) = qle(&["classify", p(&brownian), "--require-classical"]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("Classical")));
    assert_eq!(r["classical_form"]["brownian"].as_array().unwrap().len(), 1);
    assert_eq!(r["single_noise"]["kind"], "Brownian");
}

#[test]
fn decompose_examples() {
    let dir = tempfile::tempdir().unwrap();
    let ex42 = fixture(dir.path(), "example_4_2", &[]);
    let (r, _, code) = qle(&["decompose", p(&ex42)]);
    assert_eq!(code, 0);
    let d = &r["decomposition"];
    assert_eq!((d["kc_dim"].as_u64(), d["kq_dim"].as_u64()), (Some(1), Some(1)));
    assert_eq!(d["tier"], "Exact");
    assert_eq!(r["verdict"], "Mixed");
    let rho = d["classical_part"]["poisson"][0]["rho"].as_f64().unwrap();
    assert!((rho - 2.0).abs() < 1e-9);

    let ex43 = fixture(dir.path(), "example_4_3", &[]);
    let (r, _, _) = qle(&["decompose", p(&ex43)]);
    let d = &r["decomposition"];
    assert_eq!((d["kc_dim"].as_u64(), d["tier"].as_str()), (Some(1), Some("Heuristic")));
    assert!(d["certificate"]["classical"]["max_residual"].as_f64().unwrap() <= 1e-8);

    let emission = fixture(dir.path(), "spontaneous_emission", &[]);
    let (r, _, _) = qle(&["decompose", p(&emission)]);
    assert_eq!(r["decomposition"]["kc_dim"], 0);
    assert_eq!(r["verdict"], "Quantum");
}

#[test]
fn lindblad_and_detailed_balance() {
    let dir = tempfile::tempdir().unwrap();
    let damping = fixture(dir.path(), "amplitude_damping", &[]);
    let (r, _, code) = qle(&["lindblad", p(&damping), "--observable", "diag:1,0", "--time", "1"]);
    assert_eq!(code, 0);
    let x11 = r["result"][1][1][0].as_f64().unwrap();
    assert!((x11 - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    assert!((r["result"][0][0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let selfadjoint = fixture(dir.path(), "brownian_selfadjoint", &[]);
    let (r, _, _) = qle(&["detailed-balance", p(&selfadjoint)]);
    assert_eq!(r["detailed_balance"], true);
    let flip = fixture(dir.path(), "poisson_d1", &[]);
    let (r, _, _) = qle(&["detailed-balance", p(&flip)]);
    assert_eq!(r["detailed_balance"], false);
}

#[test]
fn simulate_refuses_quantum_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let emission = fixture(dir.path(), "spontaneous_emission", &[]);
    let (_, err, code) = qle(&["simulate", p(&emission), "--observable", "sz"]);
    assert_eq!(code, 1);
    assert!(err.contains("decompose"));

    let brownian = fixture(dir.path(), "brownian_d1", &[]);
    let args = ["simulate", p(&brownian), "--observable", "sz", "--time", "0.5", "--ntraj", "4000", "--seed", "3"];
    let run = || Command::new(env!("CARGO_BIN_EXE_qle")).args(args).output().unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["simulation"]["pass"], true);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn examples_round_trip_and_unknown_name() {
    let dir = tempfile::tempdir().unwrap();
    for name in qle_cli::commands::FIXTURES {
        let path = fixture(dir.path(), name, &[]);
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed = qle_cli::CoefficientFile::parse(&text).unwrap();
        assert_eq!(parsed.to_json() + "\n", text);
        assert_eq!(parsed.metadata["fixture"], *name);
    }
    let (_, err, code) = qle(&["examples", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("spontaneous_emission") && err.contains("example_4_2"));
}

#[test]
fn tolerance_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path(), "brownian_d1", &[]);
    let out = Command::new(env!("CARGO_BIN_EXE_qle")).args(["classify", p(&path)]).env("QLE_TOL", "abc").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_qle")).args(["classify", p(&path)]).env("QLE_TOL", "1e-6").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn observables() {
    use qle_cli::commands::parse_observable;
    assert_eq!(parse_observable("id", 3).unwrap().nrows(), 3);
    assert!(parse_observable("sx", 3).is_err());
    assert!(parse_observable("diag:1,2", 3).is_err());
    let m = parse_observable("[[[1,0],[0,-1]],[[0,1],[2,0]]]", 2).unwrap();
    assert_eq!(m[(0, 1)].im, -1.0);
}
