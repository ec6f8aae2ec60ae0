//! JSON renderings of analysis results. Object keys come out sorted, so
//! reports are byte-stable for identical inputs.

use qle_core::classify::{ClassicalForm, ClassicalResiduals};
use qle_core::decompose::{BlockKind, DecompositionResult, SubsystemCertificate, Tier};
use qle_core::lindblad::LindbladGenerator;
use qle_core::model::QleCoefficients;
use qle_core::sim::Comparison;
use qle_core::CMatrix;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::format::matrix_to_json;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Classical,
    Quantum,
    Mixed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Classical => "Classical",
            Verdict::Quantum => "Quantum",
            Verdict::Mixed => "Mixed",
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Common header of every report.
pub fn header(command: &str, input: &[u8]) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("tool_version".into(), json!(TOOL_VERSION));
    m.insert("input_digest".into(), json!(digest(input)));
    m
}

pub fn matrix(m: &CMatrix) -> Value {
    json!(matrix_to_json(m))
}

pub fn residuals(r: &ClassicalResiduals) -> Value {
    json!({
        "gauge_offdiag": r.gauge_offdiag,
        "wiener_gram": r.wiener_gram,
        "wiener_relation": r.wiener_relation,
        "wiener_symmetry": r.wiener_symmetry,
        "takagi": r.takagi,
        "brownian_skew": r.brownian_skew,
        "poisson_ray": r.poisson_ray,
        "max": r.max(),
    })
}

pub fn classical_form(cf: &ClassicalForm<f64>) -> Value {
    json!({
        "A0": matrix(&cf.a0),
        "brownian": cf.brownian.iter().map(|e| json!({"index": e.index, "A": matrix(&e.a)})).collect::<Vec<_>>(),
        "poisson": cf.poisson.iter().map(|e| json!({
            "index": e.index,
            "rho": e.rho,
            "jump": e.jump,
            "intensity": e.intensity,
            "S": matrix(&e.s),
            "B": matrix(&e.b),
        })).collect::<Vec<_>>(),
        "gauge_only": cf.gauge_only.iter().map(|e| json!({"index": e.index, "S": matrix(&e.s)})).collect::<Vec<_>>(),
        "noise_change": matrix(cf.noise_change.matrix()),
        "residuals": residuals(&cf.residuals),
    })
}

pub fn coefficients(c: &QleCoefficients<f64>) -> Value {
    let d = c.d();
    json!({
        "dim_system": c.n(),
        "dim_noise": d,
        "H": matrix(c.hamiltonian()),
        "L0": c.l0().iter().map(matrix).collect::<Vec<_>>(),
        "S_blocks": (0..d).map(|i| (0..d).map(|j| matrix(&c.s(i, j))).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn subsystem(cert: &SubsystemCertificate<f64>) -> Value {
    json!({
        "passed": cert.passed(),
        "orthonormality": cert.orthonormality,
        "gauge_commutator": cert.gauge_commutator,
        "invariant": cert.invariant,
        "classical_residuals": cert.classical_form.as_ref().map(|cf| residuals(&cf.residuals)),
        "failure": cert.failure,
        "max_residual": cert.max_residual(),
    })
}

pub fn decomposition_verdict(r: &DecompositionResult<f64>) -> Verdict {
    match (r.kc_dim(), r.kq_dim()) {
        (_, 0) => Verdict::Classical,
        (0, _) => Verdict::Quantum,
        _ => Verdict::Mixed,
    }
}

pub fn decomposition(r: &DecompositionResult<f64>) -> Value {
    let cert = &r.certificate;
    let blocks: Vec<Value> = cert
        .blocks
        .iter()
        .map(|b| {
            let kind = match b.kind {
                BlockKind::Wiener => "Wiener",
                BlockKind::Poisson => "Poisson",
                BlockKind::Quantum => "Quantum",
            };
            json!({"dim": b.dim, "kind": kind, "classical_dim": b.classical_dim})
        })
        .collect();
    let wiener = cert.wiener.as_ref().map(|w| {
        json!({
            "block_dim": w.block_dim,
            "bound": w.bound,
            "found": w.found,
            "maximal": w.maximal,
            "unique": w.unique,
            "searched": w.searched,
            "search_iterations": w.search_iterations,
        })
    });
    let tier = match r.tier {
        Tier::Exact => "Exact",
        Tier::Heuristic => "Heuristic",
    };
    json!({
        "kc_dim": r.kc_dim(),
        "kq_dim": r.kq_dim(),
        "tier": tier,
        "kc_basis": matrix(&r.kc_basis),
        "kq_basis": matrix(&r.kq_basis),
        "noise_change": matrix(&r.noise_change()),
        "classical_part": r.classical_part.as_ref().map(classical_form),
        "quantum_part": r.quantum_part.as_ref().map(coefficients),
        "certificate": {
            "blocks": blocks,
            "wiener": wiener,
            "orthonormality": cert.orthonormality,
            "classical": cert.classical.as_ref().map(subsystem),
            "quantum_gauge_commutator": cert.quantum_gauge_commutator,
        },
    })
}

pub fn generator(g: &LindbladGenerator<f64>) -> Value {
    json!({
        "H": matrix(g.hamiltonian()),
        "jump_ops": g.jump_ops().iter().map(matrix).collect::<Vec<_>>(),
    })
}

pub fn comparison(c: &Comparison) -> Value {
    json!({
        "estimate": matrix(&c.estimate.mean),
        "exact": matrix(&c.exact),
        "max_abs_error": c.max_abs_error,
        "stderr": c.stderr,
        "threshold": c.threshold,
        "unitarity_defect": c.unitarity_defect,
        "mean_jumps": c.estimate.mean_jumps,
        "n_traj": c.estimate.n_traj,
        "pass": c.pass,
    })
}
