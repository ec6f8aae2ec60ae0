//! Subcommand implementations. Each returns the report text and exit code;
//! nothing here touches stdout or the process.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Complex, DVector};
use qle_core::classify::{classify_d1, to_classical_form, ClassifyError, D1Verdict};
use qle_core::decompose::decompose;
use qle_core::fixtures;
use qle_core::lindblad::{detailed_balance_check, from_coefficients, semigroup_apply, BalanceWitness};
use qle_core::model::{ModelError, QleCoefficients, SchemeViolation};
use qle_core::sim::{compare_with_lindblad, SimConfig};
use qle_core::{CMatrix, Tol};
use serde_json::{json, Map, Value};

use crate::format::{matrix_from_json, CoefficientFile, JsonMatrix};
use crate::report::{self, header, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Environment variable overriding the default tolerance.
pub const TOL_ENV: &str = "QLE_TOL";

pub const FIXTURES: &[&str] = &[
    "spontaneous_emission",
    "amplitude_damping",
    "example_4_2",
    "example_4_3",
    "brownian_d1",
    "brownian_selfadjoint",
    "poisson_d1",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Report (JSON) or fixture file text.
    pub stdout: String,
    /// Diagnostics.
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn report(map: Map<String, Value>, code: i32) -> Self {
        let mut stdout = serde_json::to_string_pretty(&Value::Object(map)).expect("json values serialize");
        stdout.push('\n');
        Self { stdout, stderr: String::new(), code }
    }

    fn input_error(message: impl Into<String>) -> Self {
        Self { stdout: String::new(), stderr: format!("error: {}\n", message.into()), code: EXIT_INPUT }
    }

    fn with_diagnostic(mut self, message: impl Into<String>) -> Self {
        self.stderr.push_str(&message.into());
        self.stderr.push('\n');
        self
    }
}

/// `flag`, else `QLE_TOL`, else the default `1e-9`.
pub fn resolve_tolerance(flag: Option<f64>) -> Result<Tol, String> {
    let value = match flag {
        Some(v) => Some(v),
        None => match std::env::var(TOL_ENV) {
            Ok(s) => Some(s.trim().parse::<f64>().map_err(|_| format!("{TOL_ENV}={s:?} is not a number"))?),
            Err(_) => None,
        },
    };
    match value {
        Some(v) => Tol::uniform(v).map_err(|_| format!("tolerance {v} must be positive and finite")),
        None => Ok(Tol::default()),
    }
}

struct Input {
    bytes: Vec<u8>,
    file: CoefficientFile,
}

fn read_input(path: &Path) -> Result<Input, Outcome> {
    let bytes = std::fs::read(path).map_err(|e| Outcome::input_error(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Outcome::input_error(format!("{}: {e}", path.display())))?;
    let file = CoefficientFile::parse(text).map_err(|e| Outcome::input_error(format!("{}: {e}", path.display())))?;
    Ok(Input { bytes, file })
}

fn load(path: &Path, tol: &Tol) -> Result<(Input, QleCoefficients<f64>), Outcome> {
    let input = read_input(path)?;
    let c = input
        .file
        .coefficients(tol)
        .map_err(|e| Outcome::input_error(format!("{}: invalid coefficients: {e}", path.display())))?;
    Ok((input, c))
}

fn violation_name(e: &ModelError) -> &'static str {
    match e {
        ModelError::NotUnitaryScheme { violation, .. } => match violation {
            SchemeViolation::GaugeNotUnitary => "GaugeNotUnitary",
            SchemeViolation::HamiltonianNotSelfAdjoint => "HamiltonianNotSelfAdjoint",
            SchemeViolation::RowRelation { .. } => "RowRelation",
        },
        ModelError::Shape(_) => "Shape",
        ModelError::NoiseChangeNotUnitary { .. } => "NoiseChangeNotUnitary",
        ModelError::Linalg(_) => "Linalg",
    }
}

pub fn validate(path: &Path, tol: &Tol) -> Outcome {
    let input = match read_input(path) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let mut m = header("validate", &input.bytes);
    m.insert("dim_system".into(), json!(input.file.dim_system));
    m.insert("dim_noise".into(), json!(input.file.dim_noise));
    match input.file.coefficients(tol) {
        Ok(_) => {
            m.insert("valid".into(), json!(true));
            m.insert("violation".into(), Value::Null);
            Outcome::report(m, EXIT_OK)
        }
        Err(e) => {
            m.insert("valid".into(), json!(false));
            m.insert("violation".into(), json!({"kind": violation_name(&e), "message": e.to_string()}));
            Outcome::report(m, EXIT_DOMAIN).with_diagnostic(format!("invalid: {e}"))
        }
    }
}

fn not_classical_json(e: &ClassifyError) -> Value {
    match e {
        ClassifyError::NotClassical { reason, indices, residual } => {
            json!({"reason": reason.to_string(), "indices": indices, "residual": residual})
        }
        other => json!({"reason": "Failure", "message": other.to_string()}),
    }
}

pub fn classify(path: &Path, tol: &Tol, require_classical: bool) -> Outcome {
    let (input, c) = match load(path, tol) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let mut m = header("classify", &input.bytes);
    if c.d() == 1 {
        let d1 = match classify_d1(&c.l0()[0], c.gauge(), tol) {
            D1Verdict::Brownian { theta } => json!({"kind": "Brownian", "theta": theta}),
            D1Verdict::Poisson { lambda } => json!({"kind": "Poisson", "lambda": [lambda.re, lambda.im]}),
            D1Verdict::Quantum => json!({"kind": "Quantum"}),
        };
        m.insert("single_noise".into(), d1);
    }
    let verdict = match to_classical_form(&c, tol) {
        Ok(cf) => {
            m.insert("classical_form".into(), report::classical_form(&cf));
            m.insert("not_classical".into(), Value::Null);
            Verdict::Classical
        }
        Err(e @ ClassifyError::NotClassical { .. }) => {
            m.insert("classical_form".into(), Value::Null);
            m.insert("not_classical".into(), not_classical_json(&e));
            Verdict::Quantum
        }
        Err(e) => return Outcome::input_error(format!("classification failed: {e}")),
    };
    m.insert("verdict".into(), json!(verdict.as_str()));
    let code = if require_classical && verdict != Verdict::Classical { EXIT_DOMAIN } else { EXIT_OK };
    let out = Outcome::report(m, code);
    if verdict == Verdict::Classical {
        out
    } else {
        out.with_diagnostic("not classical as a whole; `qle decompose` extracts the classical part")
    }
}

pub fn decompose_cmd(path: &Path, tol: &Tol, search_budget: usize) -> Outcome {
    let (input, c) = match load(path, tol) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let result = match decompose(&c, tol, search_budget) {
        Ok(r) => r,
        Err(e) => return Outcome::input_error(format!("decomposition failed: {e}")),
    };
    let mut m = header("decompose", &input.bytes);
    m.insert("verdict".into(), json!(report::decomposition_verdict(&result).as_str()));
    m.insert("decomposition".into(), report::decomposition(&result));
    m.insert("search_budget".into(), json!(search_budget));
    Outcome::report(m, EXIT_OK)
}

/// `sx`, `sy`, `sz`, `id`, `diag:a,b,...` or a JSON matrix of `[re, im]` rows.
pub fn parse_observable(spec: &str, n: usize) -> Result<CMatrix, String> {
    let c = |re: f64, im: f64| Complex::new(re, im);
    let pauli = |m: [[Complex<f64>; 2]; 2]| -> Result<CMatrix, String> {
        if n != 2 {
            return Err(format!("observable {spec:?} needs a two-level system, got n = {n}"));
        }
        Ok(CMatrix::from_fn(2, 2, |i, j| m[i][j]))
    };
    let z = c(0.0, 0.0);
    match spec.trim() {
        "sx" => pauli([[z, c(1.0, 0.0)], [c(1.0, 0.0), z]]),
        "sy" => pauli([[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
        "sz" => pauli([[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]]),
        "id" => Ok(CMatrix::identity(n, n)),
        s if s.starts_with("diag:") => {
            let values = s[5..]
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad diagonal entry {v:?}")))
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != n {
                return Err(format!("diagonal has {} entries, expected {n}", values.len()));
            }
            Ok(CMatrix::from_diagonal(&DVector::from_iterator(n, values.into_iter().map(|v| c(v, 0.0)))))
        }
        s => {
            let rows: JsonMatrix = serde_json::from_str(s).map_err(|e| format!("observable: {e}"))?;
            matrix_from_json("observable", &rows, n).map_err(|e| e.to_string())
        }
    }
}

fn check_time(t: f64) -> Result<(), Outcome> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Outcome::input_error(format!("time {t} must be nonnegative")))
    }
}

pub fn lindblad(path: &Path, tol: &Tol, observable: &str, time: f64) -> Outcome {
    let (input, c) = match load(path, tol) {
        Ok(x) => x,
        Err(o) => return o,
    };
    if let Err(o) = check_time(time) {
        return o;
    }
    let x = match parse_observable(observable, c.n()) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(e),
    };
    let g = match from_coefficients(&c, tol) {
        Ok(g) => g,
        Err(e) => return Outcome::input_error(e.to_string()),
    };
    let mut m = header("lindblad", &input.bytes);
    m.insert("generator".into(), report::generator(&g));
    m.insert("observable".into(), report::matrix(&x));
    m.insert("time".into(), json!(time));
    m.insert("result".into(), report::matrix(&semigroup_apply(&g, &x, time)));
    m.insert("generator_of_identity".into(), json!(g.apply(&CMatrix::identity(c.n(), c.n())).norm()));
    Outcome::report(m, EXIT_OK)
}

pub fn detailed_balance(path: &Path, tol: &Tol) -> Outcome {
    let (input, c) = match load(path, tol) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let check = detailed_balance_check(&c, tol);
    let mut m = header("detailed-balance", &input.bytes);
    m.insert("detailed_balance".into(), json!(check.holds));
    let witness = match &check.witness {
        BalanceWitness::Classical(cf) => json!({"classical_form": report::classical_form(cf)}),
        BalanceWitness::NotClassical(reason) => json!({"not_classical": reason}),
    };
    m.insert("witness".into(), witness);
    Outcome::report(m, EXIT_OK)
}

pub struct SimulateArgs<'a> {
    pub observable: &'a str,
    pub time: f64,
    pub dt: f64,
    pub ntraj: usize,
    pub seed: u64,
    pub reunitarize: bool,
}

pub fn simulate(path: &Path, tol: &Tol, args: &SimulateArgs<'_>) -> Outcome {
    let (input, c) = match load(path, tol) {
        Ok(x) => x,
        Err(o) => return o,
    };
    if let Err(o) = check_time(args.time) {
        return o;
    }
    let x = match parse_observable(args.observable, c.n()) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(e),
    };
    let mut m = header("simulate", &input.bytes);
    let cf = match to_classical_form(&c, tol) {
        Ok(cf) => cf,
        Err(e @ ClassifyError::NotClassical { .. }) => {
            m.insert("verdict".into(), json!(Verdict::Quantum.as_str()));
            m.insert("not_classical".into(), not_classical_json(&e));
            m.insert("simulation".into(), Value::Null);
            return Outcome::report(m, EXIT_DOMAIN).with_diagnostic(
                "refusing to simulate: the equation is not classical; run `qle decompose` and simulate its classical part",
            );
        }
        Err(e) => return Outcome::input_error(format!("classification failed: {e}")),
    };
    let config = SimConfig { dt: args.dt, t_final: args.time, n_traj: args.ntraj, seed: args.seed, reunitarize: args.reunitarize };
    let cmp = match compare_with_lindblad(&cf, c.hamiltonian(), &x, args.time, &config) {
        Ok(cmp) => cmp,
        Err(e) => return Outcome::input_error(e.to_string()),
    };
    m.insert("verdict".into(), json!(Verdict::Classical.as_str()));
    m.insert(
        "config".into(),
        json!({"dt": args.dt, "time": args.time, "ntraj": args.ntraj, "seed": args.seed, "reunitarize": args.reunitarize}),
    );
    m.insert("observable".into(), report::matrix(&x));
    m.insert("simulation".into(), report::comparison(&cmp));
    let code = if cmp.pass { EXIT_OK } else { EXIT_DOMAIN };
    Outcome::report(m, code)
}

pub struct FixtureParams {
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub gamma: Option<f64>,
}

/// Coefficients and metadata of a named fixture.
pub fn fixture(name: &str, p: &FixtureParams) -> Result<(QleCoefficients<f64>, BTreeMap<String, String>), String> {
    let mut meta = BTreeMap::new();
    meta.insert("fixture".to_string(), name.to_string());
    let mut param = |key: &str, value: Option<f64>, default: f64| {
        let v = value.unwrap_or(default);
        meta.insert(key.to_string(), format!("{v:?}"));
        v
    };
    let c = match name {
        "spontaneous_emission" => fixtures::spontaneous_emission(),
        "amplitude_damping" => fixtures::amplitude_damping(param("gamma", p.gamma, 1.0)),
        "example_4_2" => {
            let theta = param("theta", p.theta, std::f64::consts::FRAC_PI_6);
            fixtures::example_4_2(theta, param("lambda", p.lambda, 2.0))
        }
        "example_4_3" => fixtures::example_4_3(param("theta", p.theta, std::f64::consts::FRAC_PI_6)),
        "brownian_d1" => fixtures::brownian_d1(),
        "brownian_selfadjoint" => fixtures::brownian_selfadjoint(),
        "poisson_d1" => fixtures::poisson_d1(param("rho", p.rho, 1.0)),
        other => return Err(format!("unknown fixture {other:?}; available: {}", FIXTURES.join(", "))),
    };
    Ok((c, meta))
}

pub fn examples(name: &str, params: &FixtureParams, output: Option<&Path>) -> Outcome {
    let (c, meta) = match fixture(name, params) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(e),
    };
    let mut text = CoefficientFile::from_coefficients(&c, meta).to_json();
    text.push('\n');
    match output {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { stdout: String::new(), stderr: format!("wrote {}\n", path.display()), code: EXIT_OK },
            Err(e) => Outcome::input_error(format!("{}: {e}", path.display())),
        },
        None => Outcome { stdout: text, stderr: String::new(), code: EXIT_OK },
    }
}
