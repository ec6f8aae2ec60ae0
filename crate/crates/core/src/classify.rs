//! Classical/quantum classification of the noises of an equation and the
//! explicit classical form
//!
//! ```text
//! dU = A₀ U dt + Σ_i A_i U dW^i + Σ_k B_k U dX^k
//! ```
//!
//! with standard Brownian motions `W^i` and compensated Poisson processes
//! `X^k` of jump size `1/ρ_k` and intensity `ρ_k²`, where `B_k = ρ_k(S_k − I)`.

use std::fmt;

use nalgebra::{Complex, ComplexField};
use thiserror::Error;

use crate::algebra::{diagonalize_environment, is_wiener_block};
use crate::matrix::{
    block, nullspace, polar, set_block, svd, takagi_symmetric_unitary, ComplexMatrix, LinalgError,
    Tolerance,
};
use crate::model::{apply_noise_change, phase_change, ModelError, NoiseChange, QleCoefficients};
use crate::scalar::{lit, real, to_f64, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianEntry<T: Real> {
    pub index: usize,
    /// Anti-Hermitian coefficient of `dW`.
    pub a: ComplexMatrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonEntry<T: Real> {
    pub index: usize,
    /// `ρ(S − I)`.
    pub b: ComplexMatrix<T>,
    pub rho: T,
    /// `1/ρ`.
    pub jump: T,
    /// `ρ²`.
    pub intensity: T,
    pub s: ComplexMatrix<T>,
}

/// Direction with a nontrivial gauge block but no creation coefficient; its
/// noise has the deterministic law δ₀.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeOnlyEntry<T: Real> {
    pub index: usize,
    pub s: ComplexMatrix<T>,
}

/// Residuals of every check passed on the way to a classical form.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassicalResiduals {
    /// Off-diagonal gauge blocks after the diagonalizing change.
    pub gauge_offdiag: f64,
    /// `‖U*U − V*V‖` of the Wiener Gram vectors.
    pub wiener_gram: f64,
    /// `‖V − WU‖` for the connecting symmetric unitary.
    pub wiener_relation: f64,
    /// `‖W − Wᵗ‖`.
    pub wiener_symmetry: f64,
    /// `‖−W − TᵗT‖`.
    pub takagi: f64,
    /// Largest `‖A + A*‖` over Brownian coefficients.
    pub brownian_skew: f64,
    /// Largest `‖L − λ(S − I)‖` over Poisson directions.
    pub poisson_ray: f64,
}

impl ClassicalResiduals {
    pub fn max(&self) -> f64 {
        [
            self.gauge_offdiag,
            self.wiener_gram,
            self.wiener_relation,
            self.wiener_symmetry,
            self.takagi,
            self.brownian_skew,
            self.poisson_ray,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalForm<T: Real> {
    pub n: usize,
    /// `−iH − ½ Σ L̃*L̃` in the classical basis.
    pub a0: ComplexMatrix<T>,
    pub brownian: Vec<BrownianEntry<T>>,
    pub poisson: Vec<PoissonEntry<T>>,
    pub gauge_only: Vec<GaugeOnlyEntry<T>>,
    /// Change from the original noises to the classical ones.
    pub noise_change: NoiseChange<T>,
    pub residuals: ClassicalResiduals,
}

impl<T: Real> ClassicalForm<T> {
    pub fn d(&self) -> usize {
        self.brownian.len() + self.poisson.len() + self.gauge_only.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotClassicalReason {
    GaugeNotCommutative,
    WienerGramMismatch,
    PoissonRayMismatch,
}

impl fmt::Display for NotClassicalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NotClassicalReason::GaugeNotCommutative => "GaugeNotCommutative",
            NotClassicalReason::WienerGramMismatch => "WienerGramMismatch",
            NotClassicalReason::PoissonRayMismatch => "PoissonRayMismatch",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    /// `indices` refer to the diagonalized basis (Wiener directions first).
    #[error("not classical: {reason} at {indices:?} (residual {residual:.3e})")]
    NotClassical { reason: NotClassicalReason, indices: Vec<usize>, residual: f64 },
    #[error("no symmetric unitary completion found (residual {residual:.3e})")]
    SymmetricCompletionFailed { residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Verdict for a single noise (`d = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum D1Verdict<T: Real> {
    /// `S = I` and `L* = e^{iθ}L`.
    Brownian { theta: T },
    /// `L = λ(S − I)`.
    Poisson { lambda: Complex<T> },
    Quantum,
}

/// Columns `u(k,l) = (L_i^{kl})_i` and `v(k,l) = (conj(L_i^{lk}))_i`, column
/// index `k·n + l`.
pub fn gram_vectors<T: Real>(l0: &[ComplexMatrix<T>]) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let m = l0.len();
    let n = l0.first().map_or(0, |l| l.nrows());
    let u = ComplexMatrix::from_fn(m, n * n, |i, c| l0[i][(c / n, c % n)]);
    let v = ComplexMatrix::from_fn(m, n * n, |i, c| l0[i][(c % n, c / n)].conj());
    (u, v)
}

/// `(‖U*U − V*V‖, 1 + ‖U‖²)` for the Gram vectors of `l0`.
pub fn gram_mismatch<T: Real>(l0: &[ComplexMatrix<T>]) -> (T, T) {
    let (u, v) = gram_vectors(l0);
    let residual = (u.adjoint() * &u - v.adjoint() * &v).norm();
    (residual, T::one() + u.norm_squared())
}

/// A symmetric unitary `W` with `W u(k,l) = v(k,l)` for every `(k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerWitness<T: Real> {
    pub w: ComplexMatrix<T>,
    pub gram_residual: f64,
    pub relation_residual: f64,
    pub symmetry_residual: f64,
}

/// Looks for a symmetric unitary connecting the Gram vectors of the Wiener
/// coefficients. `Ok(None)` when the Gram matrices differ.
///
/// On the range of `U` the connecting unitary is forced; it is found by
/// Procrustes in the basis of left singular vectors `P` of `U`, where the
/// relation reads `W̃ (P*U) = PᵗV` with `W = conj(P) W̃ P*`. The complement
/// gets the identity, which keeps `W̃` (hence `W`) symmetric.
pub fn wiener_condition<T: Real>(
    l0: &[ComplexMatrix<T>],
    tol: &Tolerance<T>,
) -> Result<Option<WienerWitness<T>>, ClassifyError> {
    let m = l0.len();
    let (gram, scale) = gram_mismatch(l0);
    if !tol.accepts(gram, scale) {
        return Ok(None);
    }
    let (u, v) = gram_vectors(l0);
    let decomposition = svd(&u);
    let r = decomposition.rank(tol);
    let p_r = decomposition.u.columns(0, r).into_owned();
    let complement = nullspace(&p_r.adjoint(), tol);
    let complement = if r == 0 { ComplexMatrix::identity(m, m) } else { complement };
    if complement.ncols() + r != m {
        return Err(ClassifyError::SymmetricCompletionFailed { residual: f64::INFINITY });
    }
    let mut p = ComplexMatrix::zeros(m, m);
    p.columns_mut(0, r).copy_from(&p_r);
    p.columns_mut(r, m - r).copy_from(&complement);

    let mut w_tilde = ComplexMatrix::<T>::identity(m, m);
    if r > 0 {
        let u_r = p_r.adjoint() * &u;
        let v_r = p_r.transpose() * &v;
        let cross = svd(&(&v_r * u_r.adjoint()));
        let procrustes = &cross.u * &cross.v_adjoint;
        let symmetrized = (&procrustes + procrustes.transpose()) * real(lit::<T>(0.5));
        let (unitary, _) = polar(&symmetrized)?;
        w_tilde.view_mut((0, 0), (r, r)).copy_from(&unitary);
    }
    let w = p.map(|z| z.conj()) * w_tilde * p.adjoint();

    let relation = (&v - &w * &u).norm();
    let symmetry = (&w - w.transpose()).norm();
    let loose = tol.scaled(lit(10.0));
    if !loose.accepts(relation, u.norm()) || !loose.accepts(symmetry, T::one()) {
        return Err(ClassifyError::SymmetricCompletionFailed { residual: to_f64(relation.max(symmetry)) });
    }
    Ok(Some(WienerWitness {
        w,
        gram_residual: to_f64(gram),
        relation_residual: to_f64(relation),
        symmetry_residual: to_f64(symmetry),
    }))
}

/// `λ` read off the largest-modulus entry of `S − I`, and `‖L − λ(S − I)‖`.
fn poisson_ray<T: Real>(l: &ComplexMatrix<T>, s: &ComplexMatrix<T>) -> (Complex<T>, T) {
    let n = s.nrows();
    let diff = s - ComplexMatrix::identity(n, n);
    let (mut best, mut at) = (T::zero(), (0, 0));
    for j in 0..n {
        for i in 0..n {
            let m = diff[(i, j)].norm_sqr();
            if m > best {
                best = m;
                at = (i, j);
            }
        }
    }
    if best == T::zero() {
        return (Complex::new(T::zero(), T::zero()), l.norm());
    }
    let lambda = l[at] / diff[at];
    let residual = (l - &diff * lambda).norm();
    (lambda, residual)
}

/// `λ` with `L = λ(S − I)`, or `None`. A negligible `L` yields `λ = 0`.
pub fn poisson_condition<T: Real>(
    l: &ComplexMatrix<T>,
    s: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Option<Complex<T>> {
    if tol.accepts(l.norm(), T::one()) {
        return Some(Complex::new(T::zero(), T::zero()));
    }
    let (lambda, residual) = poisson_ray(l, s);
    tol.accepts(residual, T::one() + l.norm()).then_some(lambda)
}

/// Single-noise criterion on `(L, S)`; the Hamiltonian plays no role.
pub fn classify_d1<T: Real>(l: &ComplexMatrix<T>, s: &ComplexMatrix<T>, tol: &Tolerance<T>) -> D1Verdict<T> {
    if is_wiener_block(s, tol) {
        if tol.accepts(l.norm(), T::one()) {
            return D1Verdict::Brownian { theta: T::zero() };
        }
        let n = l.nrows();
        let (mut best, mut at) = (T::zero(), (0, 0));
        for j in 0..n {
            for i in 0..n {
                if l[(i, j)].norm_sqr() > best {
                    best = l[(i, j)].norm_sqr();
                    at = (i, j);
                }
            }
        }
        let ratio = l[(at.1, at.0)].conj() / l[at];
        let phase = ratio / real(ratio.modulus());
        let residual = (l.adjoint() - l * phase).norm();
        if !tol.accepts(residual, T::one() + l.norm()) {
            return D1Verdict::Quantum;
        }
        let mut theta = phase.argument();
        if theta <= -T::pi() {
            theta = T::pi();
        }
        return D1Verdict::Brownian { theta };
    }
    match poisson_condition(l, s, tol) {
        Some(lambda) => D1Verdict::Poisson { lambda },
        None => D1Verdict::Quantum,
    }
}

fn not_classical(reason: NotClassicalReason, indices: Vec<usize>, residual: f64) -> ClassifyError {
    ClassifyError::NotClassical { reason, indices, residual }
}

/// Runs the full classification pipeline and assembles the classical form.
pub fn to_classical_form<T: Real>(
    c: &QleCoefficients<T>,
    tol: &Tolerance<T>,
) -> Result<ClassicalForm<T>, ClassifyError> {
    let (n, d) = (c.n(), c.d());
    let report = diagonalize_environment(c, tol)?;
    let w_diag = match &report.w_diag {
        Some(w) => w.clone(),
        None => {
            return Err(not_classical(
                NotClassicalReason::GaugeNotCommutative,
                Vec::new(),
                report.commutator_residual,
            ))
        }
    };
    let mut residuals = ClassicalResiduals { gauge_offdiag: report.offdiag_residual, ..Default::default() };
    let c1 = apply_noise_change(c, &w_diag)?;
    let m = report.wiener_count();

    let mut takagi_change = NoiseChange::identity(d);
    if m > 0 {
        let wiener = &c1.l0()[..m];
        let witness = match wiener_condition(wiener, tol)? {
            Some(w) => w,
            None => {
                let (gram, _) = gram_mismatch(wiener);
                return Err(not_classical(NotClassicalReason::WienerGramMismatch, (0..m).collect(), to_f64(gram)));
            }
        };
        let minus_w = -&witness.w;
        let t = takagi_symmetric_unitary(&minus_w, tol)?;
        residuals.wiener_gram = witness.gram_residual;
        residuals.wiener_relation = witness.relation_residual;
        residuals.wiener_symmetry = witness.symmetry_residual;
        residuals.takagi = to_f64((&minus_w - t.transpose() * &t).norm());
        let sector = NoiseChange::new(t.adjoint(), &tol.scaled(lit(100.0)))?;
        takagi_change = sector.direct_sum(&NoiseChange::identity(d - m));
    }
    let c2 = apply_noise_change(&c1, &takagi_change)?;

    let mut phases = vec![Complex::new(T::one(), T::zero()); d];
    let mut lambdas = vec![Complex::new(T::zero(), T::zero()); d];
    let mut failed = Vec::new();
    let mut worst_ray = T::zero();
    for k in m..d {
        let s = block(c2.gauge(), k, k, n);
        let l = &c2.l0()[k];
        match poisson_condition(l, &s, tol) {
            Some(lambda) => {
                lambdas[k] = lambda;
                if lambda.modulus() > T::zero() {
                    phases[k] = lambda / real(lambda.modulus());
                    worst_ray = worst_ray.max(poisson_ray(l, &s).1);
                } else {
                    worst_ray = worst_ray.max(l.norm());
                }
            }
            None => {
                worst_ray = worst_ray.max(poisson_ray(l, &s).1);
                failed.push(k);
            }
        }
    }
    if !failed.is_empty() {
        return Err(not_classical(NotClassicalReason::PoissonRayMismatch, failed, to_f64(worst_ray)));
    }
    residuals.poisson_ray = to_f64(worst_ray);
    let phase_step = phase_change(&phases);
    let c3 = apply_noise_change(&c2, &phase_step)?;

    let id = ComplexMatrix::<T>::identity(n, n);
    let mut brownian = Vec::with_capacity(m);
    let mut skew = T::zero();
    for (index, a) in c3.l0()[..m].iter().enumerate() {
        skew = skew.max((a + a.adjoint()).norm());
        brownian.push(BrownianEntry { index, a: a.clone() });
    }
    residuals.brownian_skew = to_f64(skew);
    let mut poisson = Vec::new();
    let mut gauge_only = Vec::new();
    for k in m..d {
        let s = block(c3.gauge(), k, k, n);
        let rho = lambdas[k].modulus();
        if rho > T::zero() {
            poisson.push(PoissonEntry {
                index: k,
                b: (&s - &id) * real(rho),
                rho,
                jump: T::one() / rho,
                intensity: rho * rho,
                s,
            });
        } else {
            gauge_only.push(GaugeOnlyEntry { index: k, s });
        }
    }

    Ok(ClassicalForm {
        n,
        a0: c3.drift(),
        brownian,
        poisson,
        gauge_only,
        noise_change: w_diag.then(&takagi_change).then(&phase_step),
        residuals,
    })
}

/// Coefficients of the classical form in its own basis: `L⁰ = A` with gauge
/// block `I` on Wiener directions, `L⁰ = ρ(S − I)` with block `S` on Poisson
/// directions and `L⁰ = 0` with block `S` on gauge-only directions.
pub fn rebuild<T: Real>(
    cf: &ClassicalForm<T>,
    hamiltonian: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<QleCoefficients<T>, ModelError> {
    let (n, d) = (cf.n, cf.d());
    let mut l0 = vec![ComplexMatrix::<T>::zeros(n, n); d];
    let mut gauge = ComplexMatrix::<T>::identity(n * d, n * d);
    let mut seen = vec![false; d];
    let mut mark = |index: usize| -> Result<(), ModelError> {
        if index >= d || seen[index] {
            return Err(ModelError::Shape(format!("classical form has bad or repeated index {index}")));
        }
        seen[index] = true;
        Ok(())
    };
    for e in &cf.brownian {
        mark(e.index)?;
        l0[e.index] = e.a.clone();
    }
    for e in &cf.poisson {
        mark(e.index)?;
        l0[e.index] = e.b.clone();
        set_block(&mut gauge, e.index, e.index, &e.s);
    }
    for e in &cf.gauge_only {
        mark(e.index)?;
        set_block(&mut gauge, e.index, e.index, &e.s);
    }
    QleCoefficients::with_dims(n, d, hamiltonian.clone(), l0, gauge, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    fn sx() -> ComplexMatrix<f64> {
        dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(1.0, 0.0), c(0.0, 0.0)]
    }

    fn sz() -> ComplexMatrix<f64> {
        dmatrix![c(1.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(-1.0, 0.0)]
    }

    fn lowering() -> ComplexMatrix<f64> {
        dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, 0.0)]
    }

    fn id2() -> ComplexMatrix<f64> {
        ComplexMatrix::identity(2, 2)
    }

    #[test]
    fn gram_vectors_by_index() {
        let (u, v) = gram_vectors(&[sx()]);
        assert_eq!(u, v);
        let (u, v) = gram_vectors(&[lowering()]);
        for col in 0..4 {
            let expect_u = if col == 1 { 1.0 } else { 0.0 };
            let expect_v = if col == 2 { 1.0 } else { 0.0 };
            assert_eq!(u[(0, col)], c(expect_u, 0.0));
            assert_eq!(v[(0, col)], c(expect_v, 0.0));
        }
        let (u, v) = gram_vectors(&[sx() * C::i()]);
        assert_eq!(v, -u);
    }

    #[test]
    fn wiener_condition_examples() {
        let w = wiener_condition(&[sx()], &tol()).unwrap().unwrap();
        assert!((w.w[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        let w = wiener_condition(&[sx() * C::i()], &tol()).unwrap().unwrap();
        assert!((w.w[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(wiener_condition(&[lowering()], &tol()).unwrap().is_none());
    }

    #[test]
    fn poisson_condition_examples() {
        let l = (sx() - id2()) * c(2.0, 0.0);
        assert!((poisson_condition(&l, &sx(), &tol()).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(poisson_condition(&ComplexMatrix::zeros(2, 2), &sx(), &tol()), Some(c(0.0, 0.0)));
        assert_eq!(poisson_condition(&sz(), &sx(), &tol()), None);
    }

    #[test]
    fn d1_examples() {
        assert_eq!(classify_d1(&lowering(), &id2(), &tol()), D1Verdict::Quantum);
        match classify_d1(&(sx() * C::i()), &id2(), &tol()) {
            D1Verdict::Brownian { theta } => assert!((theta - std::f64::consts::PI).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        match classify_d1(&(sx() - id2()), &sx(), &tol()) {
            D1Verdict::Poisson { lambda } => assert!((lambda - c(1.0, 0.0)).norm() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            classify_d1(&ComplexMatrix::zeros(2, 2), &id2(), &tol()),
            D1Verdict::Brownian { theta: 0.0 }
        );
    }

    #[test]
    fn brownian_d1_classical_form_rebuilds() {
        let h = dmatrix![c(0.3, 0.0), c(0.0, -1.0); c(0.0, 1.0), c(-0.2, 0.0)];
        let q = QleCoefficients::with_trivial_gauge(h.clone(), vec![sx() * C::i()], &tol()).unwrap();
        let cf = to_classical_form(&q, &tol()).unwrap();
        assert_eq!(cf.brownian.len(), 1);
        let a = &cf.brownian[0].a;
        assert!((a + a.adjoint()).norm() < 1e-12);
        let rebuilt = rebuild(&cf, &h, &tol()).unwrap();
        let back = apply_noise_change(&rebuilt, &cf.noise_change.inverse()).unwrap();
        assert!((&back.l0()[0] - &q.l0()[0]).norm() < 1e-12);
    }

    #[test]
    fn spontaneous_emission_is_not_classical() {
        let q = QleCoefficients::with_trivial_gauge(ComplexMatrix::zeros(2, 2), vec![lowering()], &tol()).unwrap();
        match to_classical_form(&q, &tol()) {
            Err(ClassifyError::NotClassical { reason, indices, .. }) => {
                assert_eq!(reason, NotClassicalReason::WienerGramMismatch);
                assert_eq!(indices, vec![0]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn poisson_phase_is_absorbed() {
        let lambda = C::from_polar(1.5, 2.0);
        let q = QleCoefficients::new(ComplexMatrix::zeros(2, 2), vec![(sx() - id2()) * lambda], sx(), &tol()).unwrap();
        let cf = to_classical_form(&q, &tol()).unwrap();
        assert_eq!(cf.poisson.len(), 1);
        let p = &cf.poisson[0];
        assert!((p.rho - 1.5).abs() < 1e-12);
        assert!((p.intensity - 2.25).abs() < 1e-12);
        assert!((&p.s - sx()).norm() < 1e-12);
    }

    #[test]
    fn rebuild_examples() {
        let empty = ClassicalForm {
            n: 2,
            a0: ComplexMatrix::<f64>::zeros(2, 2),
            brownian: vec![],
            poisson: vec![],
            gauge_only: vec![],
            noise_change: NoiseChange::identity(0),
            residuals: ClassicalResiduals::default(),
        };
        let q = rebuild(&empty, &sz(), &tol()).unwrap();
        assert_eq!((q.n(), q.d()), (2, 0));
        let single = ClassicalForm {
            poisson: vec![PoissonEntry {
                index: 0,
                b: (sx() - id2()) * c(2.0, 0.0),
                rho: 2.0,
                jump: 0.5,
                intensity: 4.0,
                s: sx(),
            }],
            noise_change: NoiseChange::identity(1),
            ..empty
        };
        let q = rebuild(&single, &ComplexMatrix::zeros(2, 2), &tol()).unwrap();
        assert_eq!(q.l0()[0], (sx() - id2()) * c(2.0, 0.0));
        assert_eq!(q.gauge(), &sx());
    }
}
