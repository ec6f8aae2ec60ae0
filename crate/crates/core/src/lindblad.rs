//! Heisenberg-picture Lindblad generators
//!
//! ```text
//! ℒ(X) = −i[H, X] + Σ_k (L_k* X L_k − ½{L_k* L_k, X})
//! ```
//!
//! and the semigroup `𝒫_t = exp(tℒ)`. Matrices are vectorized by stacking
//! columns, so `X ↦ AXB` becomes `Bᵗ ⊗ A`.

use nalgebra::DVector;
use thiserror::Error;

use crate::classify::{to_classical_form, ClassicalForm};
use crate::matrix::{hermitian_defect, hermitian_part, matrix_exp, unitarity_defect, ComplexMatrix, Tolerance};
use crate::model::QleCoefficients;
use crate::scalar::{imag_unit, lit, real, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LindbladError {
    #[error("Hamiltonian is not self-adjoint (residual {residual:.3e})")]
    HamiltonianNotSelfAdjoint { residual: f64 },
    #[error("diffusion operator {index} is not self-adjoint (residual {residual:.3e})")]
    NotSelfAdjoint { index: usize, residual: f64 },
    #[error("jump unitary {index} is not unitary (residual {residual:.3e})")]
    NotUnitary { index: usize, residual: f64 },
    #[error("jump rate {index} is negative or not finite")]
    BadRate { index: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("expanded jump list disagrees with the direct form (residual {residual:.3e})")]
    Inconsistent { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator<T: Real> {
    h: ComplexMatrix<T>,
    jump_ops: Vec<ComplexMatrix<T>>,
    superop: ComplexMatrix<T>,
}

fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kronecker(b)
}

/// Superoperator of `X ↦ A X B`.
fn sandwich<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    kron(&b.transpose(), a)
}

fn vec_of<T: Real>(x: &ComplexMatrix<T>) -> DVector<nalgebra::Complex<T>> {
    DVector::from_column_slice(x.as_slice())
}

fn unvec<T: Real>(v: &DVector<nalgebra::Complex<T>>, n: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_column_slice(n, n, v.as_slice())
}

fn assemble<T: Real>(h: &ComplexMatrix<T>, jump_ops: &[ComplexMatrix<T>]) -> ComplexMatrix<T> {
    let n = h.nrows();
    let id = ComplexMatrix::<T>::identity(n, n);
    let half = real(lit::<T>(0.5));
    let mut sup = (sandwich(h, &id) - sandwich(&id, h)) * (-imag_unit::<T>());
    for l in jump_ops {
        let l_adj = l.adjoint();
        let ll = &l_adj * l;
        sup += sandwich(&l_adj, l);
        sup -= (sandwich(&ll, &id) + sandwich(&id, &ll)) * half;
    }
    sup
}

fn check_square<T: Real>(what: &str, m: &ComplexMatrix<T>, n: usize) -> Result<(), LindbladError> {
    if m.shape() != (n, n) {
        return Err(LindbladError::Shape(format!("{what} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
    }
    Ok(())
}

impl<T: Real> LindbladGenerator<T> {
    /// Generator with Hamiltonian `h` and jump operators `jump_ops`.
    pub fn new(h: ComplexMatrix<T>, jump_ops: Vec<ComplexMatrix<T>>, tol: &Tolerance<T>) -> Result<Self, LindbladError> {
        let n = h.nrows();
        check_square("Hamiltonian", &h, n)?;
        for (k, l) in jump_ops.iter().enumerate() {
            check_square(&format!("jump operator {k}"), l, n)?;
        }
        let defect = hermitian_defect(&h);
        if !tol.accepts(defect, T::one().max(h.norm())) {
            return Err(LindbladError::HamiltonianNotSelfAdjoint { residual: to_f64(defect) });
        }
        let h = hermitian_part(&h);
        let superop = assemble(&h, &jump_ops);
        Ok(Self { h, jump_ops, superop })
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix<T> {
        &self.h
    }

    pub fn jump_ops(&self) -> &[ComplexMatrix<T>] {
        &self.jump_ops
    }

    /// `n² × n²` matrix of `ℒ` on column-stacked matrices.
    pub fn superop(&self) -> &ComplexMatrix<T> {
        &self.superop
    }

    /// `ℒ(X)` through the superoperator.
    pub fn apply(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        unvec(&(&self.superop * vec_of(x)), self.n())
    }

    /// `ℒ(X)` evaluated directly from `H` and the jump operators.
    pub fn apply_direct(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let half = real(lit::<T>(0.5));
        let mut out = (&self.h * x - x * &self.h) * (-imag_unit::<T>());
        for l in &self.jump_ops {
            let l_adj = l.adjoint();
            let ll = &l_adj * l;
            out += &l_adj * x * l - (&ll * x + x * &ll) * half;
        }
        out
    }

    /// Largest `‖ℒ(E_ij) − ℒ_direct(E_ij)‖` over matrix units.
    pub fn matrix_unit_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = T::zero();
        for j in 0..n {
            for i in 0..n {
                let mut e = ComplexMatrix::zeros(n, n);
                e[(i, j)] = real(T::one());
                worst = worst.max((self.apply(&e) - self.apply_direct(&e)).norm());
            }
        }
        to_f64(worst)
    }

    /// `‖ℒ − ℒ'‖_F` of the superoperators.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.superop.shape() != other.superop.shape() {
            return f64::INFINITY;
        }
        to_f64((&self.superop - &other.superop).norm())
    }
}

/// See [`LindbladGenerator::new`].
pub fn generator<T: Real>(
    h: ComplexMatrix<T>,
    jump_ops: Vec<ComplexMatrix<T>>,
    tol: &Tolerance<T>,
) -> Result<LindbladGenerator<T>, LindbladError> {
    LindbladGenerator::new(h, jump_ops, tol)
}

/// Generator in commutative form
///
/// ```text
/// ℒ(X) = −i[H, X] + ½ Σ (2 L X L − L² X − X L²) + Σ λ_k (S_k* X S_k − X)
/// ```
///
/// with self-adjoint `L` and unitary `S_k`. The result carries the jump list
/// `{L} ∪ {√λ_k S_k}`; its superoperator is cross-checked against the direct
/// form above.
pub fn commutative_generator<T: Real>(
    h: ComplexMatrix<T>,
    selfadjoint: &[ComplexMatrix<T>],
    unitaries: &[ComplexMatrix<T>],
    rates: &[T],
    tol: &Tolerance<T>,
) -> Result<LindbladGenerator<T>, LindbladError> {
    let n = h.nrows();
    if unitaries.len() != rates.len() {
        return Err(LindbladError::Shape(format!("{} unitaries but {} rates", unitaries.len(), rates.len())));
    }
    for (k, l) in selfadjoint.iter().enumerate() {
        check_square(&format!("diffusion operator {k}"), l, n)?;
        let defect = hermitian_defect(l);
        if !tol.accepts(defect, T::one().max(l.norm())) {
            return Err(LindbladError::NotSelfAdjoint { index: k, residual: to_f64(defect) });
        }
    }
    for (k, s) in unitaries.iter().enumerate() {
        check_square(&format!("jump unitary {k}"), s, n)?;
        let defect = unitarity_defect(s);
        if !tol.accepts(defect, lit::<T>(n as f64).sqrt()) {
            return Err(LindbladError::NotUnitary { index: k, residual: to_f64(defect) });
        }
    }
    if let Some(k) = rates.iter().position(|r| !(r.is_finite() && *r >= T::zero())) {
        return Err(LindbladError::BadRate { index: k });
    }

    let mut jumps: Vec<ComplexMatrix<T>> = selfadjoint.iter().map(hermitian_part).collect();
    jumps.extend(unitaries.iter().zip(rates).map(|(s, r)| s * real(r.sqrt())));
    let g = LindbladGenerator::new(h, jumps, tol)?;

    let id = ComplexMatrix::<T>::identity(n, n);
    let half = real(lit::<T>(0.5));
    let mut direct = (sandwich(&g.h, &id) - sandwich(&id, &g.h)) * (-imag_unit::<T>());
    for l in &g.jump_ops[..selfadjoint.len()] {
        let l2 = l * l;
        direct += sandwich(l, l) - (sandwich(&l2, &id) + sandwich(&id, &l2)) * half;
    }
    for (s, r) in unitaries.iter().zip(rates) {
        let kron_id = ComplexMatrix::<T>::identity(n * n, n * n);
        direct += (sandwich(&s.adjoint(), s) - kron_id) * real(*r);
    }
    let residual = (&direct - &g.superop).norm();
    let scale = T::one().max(direct.norm());
    if residual > lit::<T>(1e-12) * scale {
        return Err(LindbladError::Inconsistent { residual: to_f64(residual) });
    }
    Ok(g)
}

/// Generator of the classical form with Hamiltonian `h`: jump operators are
/// the Brownian coefficients and `ρ_k(S_k − I)` for Poisson directions;
/// gauge-only directions contribute nothing.
pub fn from_classical_form<T: Real>(
    cf: &ClassicalForm<T>,
    h: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<LindbladGenerator<T>, LindbladError> {
    let jumps = cf.brownian.iter().map(|e| e.a.clone()).chain(cf.poisson.iter().map(|e| e.b.clone())).collect();
    LindbladGenerator::new(h.clone(), jumps, tol)
}

/// Generator of an equation: `H` and the creation coefficients. The gauge
/// does not enter.
pub fn from_coefficients<T: Real>(c: &QleCoefficients<T>, tol: &Tolerance<T>) -> Result<LindbladGenerator<T>, LindbladError> {
    LindbladGenerator::new(c.hamiltonian().clone(), c.l0().to_vec(), tol)
}

/// `𝒫_t(X) = exp(tℒ)(X)`.
///
/// # Panics
/// If `t` is negative or not finite.
pub fn semigroup_apply<T: Real>(g: &LindbladGenerator<T>, x: &ComplexMatrix<T>, t: T) -> ComplexMatrix<T> {
    assert!(t.is_finite() && t >= T::zero(), "semigroup time must be nonnegative");
    if t == T::zero() {
        return x.clone();
    }
    let e = matrix_exp(&(&g.superop * real(t))).expect("superoperator is square");
    unvec(&(e * vec_of(x)), g.n())
}

/// Schrödinger-picture evolution `exp(tℒ_*)(ρ)` with `Tr(ℒ_*(ρ) X) = Tr(ρ ℒ(X))`
/// for Hermitian `ρ`.
///
/// # Panics
/// If `t` is negative or not finite.
pub fn dual_apply<T: Real>(g: &LindbladGenerator<T>, rho: &ComplexMatrix<T>, t: T) -> ComplexMatrix<T> {
    assert!(t.is_finite() && t >= T::zero(), "semigroup time must be nonnegative");
    let e = matrix_exp(&(g.superop.adjoint() * real(t))).expect("superoperator is square");
    unvec(&(e * vec_of(rho)), g.n())
}

#[derive(Debug, Clone)]
pub enum BalanceWitness<T: Real> {
    Classical(Box<ClassicalForm<T>>),
    NotClassical(String),
}

#[derive(Debug, Clone)]
pub struct DetailedBalance<T: Real> {
    pub holds: bool,
    pub witness: BalanceWitness<T>,
}

/// Detailed balance with respect to the normalized trace, decided by whether
/// the equation is classical with Brownian noises only.
pub fn detailed_balance_check<T: Real>(c: &QleCoefficients<T>, tol: &Tolerance<T>) -> DetailedBalance<T> {
    match to_classical_form(c, tol) {
        Ok(cf) => DetailedBalance { holds: cf.poisson.is_empty(), witness: BalanceWitness::Classical(Box::new(cf)) },
        Err(e) => DetailedBalance { holds: false, witness: BalanceWitness::NotClassical(e.to_string()) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::rebuild;
    use crate::fixtures::{brownian_selfadjoint, lowering, pauli_x, pauli_y, pauli_z, poisson_d1, spontaneous_emission};
    use nalgebra::Complex;

    type CM = ComplexMatrix<f64>;

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    fn diag(a: f64, b: f64) -> CM {
        CM::from_diagonal(&DVector::from_vec(vec![Complex::new(a, 0.0), Complex::new(b, 0.0)]))
    }

    #[test]
    fn zero_generator() {
        let g = generator(CM::zeros(2, 2), vec![], &tol()).unwrap();
        assert_eq!(g.superop(), &CM::zeros(4, 4));
    }

    #[test]
    fn lowering_on_diagonal() {
        let g = generator(CM::zeros(2, 2), vec![lowering()], &tol()).unwrap();
        let (a, b) = (0.3, -1.7);
        assert!((g.apply(&diag(a, b)) - diag(0.0, a - b)).norm() < 1e-14);
        assert!(g.apply(&CM::identity(2, 2)).norm() < 1e-14);
        assert!(g.matrix_unit_residual() < 1e-12);
    }

    #[test]
    fn hamiltonian_part_is_commutator() {
        let g = generator(pauli_z(), vec![], &tol()).unwrap();
        assert!((g.apply(&pauli_x()) - pauli_y() * Complex::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        assert!(matches!(
            generator(lowering(), vec![], &tol()),
            Err(LindbladError::HamiltonianNotSelfAdjoint { .. })
        ));
    }

    #[test]
    fn flip_conjugation() {
        let g = commutative_generator(CM::zeros(2, 2), &[], &[pauli_x()], &[1.0], &tol()).unwrap();
        assert!((g.apply(&pauli_z()) + pauli_z() * Complex::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn commutative_form_rejects_bad_inputs() {
        let z = CM::zeros(2, 2);
        assert!(matches!(
            commutative_generator(z.clone(), &[lowering()], &[], &[], &tol()),
            Err(LindbladError::NotSelfAdjoint { index: 0, .. })
        ));
        assert!(matches!(
            commutative_generator(z.clone(), &[], &[lowering()], &[1.0], &tol()),
            Err(LindbladError::NotUnitary { index: 0, .. })
        ));
        assert!(matches!(
            commutative_generator(z, &[], &[pauli_x()], &[-1.0], &tol()),
            Err(LindbladError::BadRate { index: 0 })
        ));
    }

    #[test]
    fn classical_form_generator_matches_rebuilt_coefficients() {
        let q = poisson_d1(1.0);
        let cf = to_classical_form(&q, &tol()).unwrap();
        let h = pauli_z() * Complex::new(0.4, 0.0);
        let g = from_classical_form(&cf, &h, &tol()).unwrap();
        assert!((g.apply(&pauli_z()) - generator(h.clone(), vec![pauli_x() - CM::identity(2, 2)], &tol()).unwrap().apply(&pauli_z())).norm() < 1e-12);
        let rebuilt = rebuild(&cf, &h, &tol()).unwrap();
        assert!(g.distance(&from_coefficients(&rebuilt, &tol()).unwrap()) < 1e-12);
        let zero_h = from_classical_form(&cf, &CM::zeros(2, 2), &tol()).unwrap();
        assert!((zero_h.apply(&pauli_z()) + pauli_z() * Complex::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn amplitude_damping_semigroup() {
        let g = generator(CM::zeros(2, 2), vec![lowering()], &tol()).unwrap();
        for t in [0.0, 0.3, 1.0, 4.0] {
            let p = semigroup_apply(&g, &diag(1.0, 0.0), t);
            assert!((p - diag(1.0, 1.0 - (-t).exp())).norm() < 1e-12);
        }
    }

    #[test]
    fn brownian_decay_of_sigma_z() {
        let g = generator(CM::zeros(2, 2), vec![pauli_x() * Complex::i()], &tol()).unwrap();
        let p = semigroup_apply(&g, &pauli_z(), 0.5);
        assert!((p - pauli_z() * Complex::new((-1.0f64).exp(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn detailed_balance_examples() {
        assert!(detailed_balance_check(&brownian_selfadjoint(), &tol()).holds);
        let emission = detailed_balance_check(&spontaneous_emission(), &tol());
        assert!(!emission.holds && matches!(emission.witness, BalanceWitness::NotClassical(_)));
        let jump = detailed_balance_check(&poisson_d1(1.3), &tol());
        assert!(!jump.holds && matches!(jump.witness, BalanceWitness::Classical(_)));
    }
}
