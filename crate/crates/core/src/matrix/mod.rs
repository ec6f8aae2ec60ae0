//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices on the composite space `H ⊗ K` (system dimension `n`, noise
//! multiplicity `d`) are stored as a `d × d` grid of `n × n` blocks, so the
//! entry `(i*n + a, j*n + b)` is entry `(a, b)` of block `(i, j)`. Block
//! `(i, j)` of the gauge operator holds `S^j_i`, which makes
//! [`weighted_partial_trace`] return the noise-space matrices `S^{kl}` with
//! `(S^{kl})_{ij} = (S^j_i)_{kl}` without any index shuffling. An operator
//! `I_H ⊗ Y` acting on the noise factor is `Y ⊗ I_n` in this layout; see
//! [`noise_lift`].

mod decomp;
mod eigen;
mod takagi;

pub use decomp::{matrix_exp, nullspace, polar, svd, Svd};
pub use eigen::{eig_normal, hermitian_eig, simultaneous_diagonalize};
pub use takagi::takagi_symmetric_unitary;

use nalgebra::{Complex, ComplexField, DMatrix};
use thiserror::Error;

use crate::scalar::{imag_unit, lit, real, to_f64, Real};

/// Dense complex matrix, row/column sizes fixed at construction.
pub type ComplexMatrix<T> = DMatrix<Complex<T>>;

/// Absolute/relative tolerance pair used to turn exact identities into
/// floating-point checks: a residual `r` computed at magnitude `s` passes
/// when `r <= abs_eps + rel_eps * s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs_eps: T,
    pub rel_eps: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs_eps: T, rel_eps: T) -> Result<Self, LinalgError> {
        let ok = |x: T| to_f64(x).is_finite() && x >= T::zero();
        if ok(abs_eps) && ok(rel_eps) {
            Ok(Self { abs_eps, rel_eps })
        } else {
            Err(LinalgError::InvalidTolerance)
        }
    }

    /// Same value for the absolute and relative part.
    pub fn uniform(eps: T) -> Result<Self, LinalgError> {
        Self::new(eps, eps)
    }

    pub fn bound(&self, scale: T) -> T {
        self.abs_eps + self.rel_eps * scale
    }

    pub fn accepts(&self, residual: T, scale: T) -> bool {
        residual <= self.bound(scale)
    }

    /// Both parts multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self { abs_eps: self.abs_eps * factor, rel_eps: self.rel_eps * factor }
    }
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self { abs_eps: lit(1e-9), rel_eps: lit(1e-9) }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not normal (residual {residual:.3e})")]
    NotNormal { residual: f64 },
    #[error("matrices do not commute (residual {residual:.3e})")]
    NotCommuting { residual: f64 },
    #[error("degenerate eigenspaces left unresolved after {attempts} randomizations")]
    DegeneracyUnresolved { attempts: usize },
    #[error("matrix is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("factorization residual {residual:.3e} exceeds tolerance")]
    FactorizationFailed { residual: f64 },
    #[error("index {index} out of range (must be < {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("tolerances must be finite and non-negative")]
    InvalidTolerance,
}

pub(crate) fn ensure_square<T: Real>(a: &ComplexMatrix<T>) -> Result<usize, LinalgError> {
    if a.nrows() == a.ncols() {
        Ok(a.nrows())
    } else {
        Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() })
    }
}

fn ensure_same_shape<T: Real>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
) -> Result<(), LinalgError> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )))
    }
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.adjoint()
}

/// `AB - BA`.
pub fn commutator<T: Real>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>, LinalgError> {
    ensure_square(a)?;
    ensure_same_shape(a, b)?;
    Ok(a * b - b * a)
}

/// Frobenius norm of `A - B`.
pub fn frobenius_distance<T: Real>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
) -> Result<T, LinalgError> {
    ensure_same_shape(a, b)?;
    Ok((a - b).norm())
}

/// `max(‖A*A − I‖_F, ‖AA* − I‖_F)`; infinite for non-square input.
pub fn unitarity_defect<T: Real>(a: &ComplexMatrix<T>) -> T {
    if a.nrows() != a.ncols() {
        return T::max_value().unwrap_or_else(T::one);
    }
    let id = ComplexMatrix::<T>::identity(a.nrows(), a.ncols());
    let left = (a.adjoint() * a - &id).norm();
    let right = (a * a.adjoint() - &id).norm();
    left.max(right)
}

/// `‖A − A*‖_F`.
pub fn hermitian_defect<T: Real>(a: &ComplexMatrix<T>) -> T {
    (a - a.adjoint()).norm()
}

/// `‖A − Aᵗ‖_F`.
pub fn symmetric_defect<T: Real>(a: &ComplexMatrix<T>) -> T {
    (a - a.transpose()).norm()
}

/// `‖AA* − A*A‖_F`.
pub fn normality_defect<T: Real>(a: &ComplexMatrix<T>) -> T {
    (a * a.adjoint() - a.adjoint() * a).norm()
}

/// Frobenius norm of the strictly off-diagonal part.
pub fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let mut acc = T::zero();
    for (idx, z) in a.iter().enumerate() {
        let (i, j) = (idx % a.nrows(), idx / a.nrows());
        if i != j {
            acc += z.norm_sqr();
        }
    }
    acc.sqrt()
}

/// `(A + A*)/2`.
pub fn hermitian_part<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    (a + a.adjoint()) * real(lit::<T>(0.5))
}

/// `(A − A*)/(2i)`, Hermitian; `A = hermitian_part(A) + i·skew_hermitian_part(A)`.
pub fn skew_hermitian_part<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    (a - a.adjoint()) * (-imag_unit::<T>() * real(lit::<T>(0.5)))
}

/// `I_H ⊗ Y` in grid layout: every `n × n` block `(i, j)` equals `Y_ij · I_n`.
pub fn noise_lift<T: Real>(y: &ComplexMatrix<T>, n: usize) -> ComplexMatrix<T> {
    y.kronecker(&ComplexMatrix::<T>::identity(n, n))
}

/// Copy of block `(i, j)` of a grid-layout matrix with `n × n` blocks.
pub fn block<T: Real>(m: &ComplexMatrix<T>, i: usize, j: usize, n: usize) -> ComplexMatrix<T> {
    m.view((i * n, j * n), (n, n)).into_owned()
}

pub(crate) fn set_block<T: Real>(
    m: &mut ComplexMatrix<T>,
    i: usize,
    j: usize,
    value: &ComplexMatrix<T>,
) {
    let n = value.nrows();
    m.view_mut((i * n, j * n), (n, n)).copy_from(value);
}

/// The noise-space matrix `M^{(f,g)}` with entry `(i, j)` equal to entry
/// `(f, g)` of block `(i, j)`. For the gauge operator this is the partial
/// trace `Tr_{|g><f|}[S]` taken on canonical basis vectors of `H`.
pub fn weighted_partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    f_index: usize,
    g_index: usize,
    n: usize,
    d: usize,
) -> Result<ComplexMatrix<T>, LinalgError> {
    if m.nrows() != n * d || m.ncols() != n * d {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected {}x{} grid matrix, got {}x{}",
            n * d,
            n * d,
            m.nrows(),
            m.ncols()
        )));
    }
    for index in [f_index, g_index] {
        if index >= n {
            return Err(LinalgError::IndexOutOfRange { index, bound: n });
        }
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| m[(i * n + f_index, j * n + g_index)]))
}

/// Multiplies every column by a unit phase so that its first entry of modulus
/// above `threshold` becomes real and positive.
pub(crate) fn normalize_column_phases<T: Real>(u: &mut ComplexMatrix<T>, threshold: T) {
    for mut col in u.column_iter_mut() {
        if let Some(z) = col.iter().find(|z| z.modulus() > threshold).copied() {
            let phase = z.conj() / real(z.modulus());
            col *= phase;
        }
    }
}

pub(crate) fn phase_threshold<T: Real>() -> T {
    T::default_epsilon().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn adjoint_examples() {
        let a = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(adjoint(&a), dmatrix![c(0.0, 0.0), c(0.0, 0.0); c(1.0, 0.0), c(0.0, 0.0)]);
        let s = dmatrix![c(0.0, 1.0)];
        assert_eq!(adjoint(&s), dmatrix![c(0.0, -1.0)]);
        let r = ComplexMatrix::<f64>::from_fn(3, 2, |i, j| c(i as f64 + 0.5, j as f64 - 1.5));
        let ra = adjoint(&r);
        assert_eq!(ra.shape(), (2, 3));
        for k in 0..3 {
            for j in 0..2 {
                assert_eq!(ra[(j, k)], r[(k, j)].conj());
            }
        }
    }

    #[test]
    fn commutator_examples() {
        let id = ComplexMatrix::<f64>::identity(2, 2);
        let b = dmatrix![c(1.0, 2.0), c(3.0, 0.0); c(0.5, -1.0), c(2.0, 2.0)];
        assert_eq!(commutator(&id, &b).unwrap(), ComplexMatrix::zeros(2, 2));
        let d1 = ComplexMatrix::<f64>::from_diagonal(&nalgebra::dvector![c(1.0, 0.0), c(2.0, 0.0)]);
        let d2 = ComplexMatrix::<f64>::from_diagonal(&nalgebra::dvector![c(3.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(commutator(&d1, &d2).unwrap(), ComplexMatrix::zeros(2, 2));
        // raising/lowering: [E12, E21] = diag(1, -1) by direct 2x2 multiplication
        let e12 = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, 0.0)];
        let e21 = e12.transpose();
        let expected = dmatrix![c(1.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(-1.0, 0.0)];
        assert_eq!(commutator(&e12, &e21).unwrap(), expected);
        assert!(matches!(
            commutator(&id, &ComplexMatrix::<f64>::identity(3, 3)),
            Err(LinalgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn frobenius_distance_examples() {
        let id = ComplexMatrix::<f64>::identity(2, 2);
        let z = ComplexMatrix::<f64>::zeros(2, 2);
        assert_eq!(frobenius_distance(&id, &id).unwrap(), 0.0);
        assert!((frobenius_distance(&id, &z).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let d = ComplexMatrix::<f64>::from_diagonal(&nalgebra::dvector![c(3.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(frobenius_distance(&d, &z).unwrap(), 5.0);
        assert!(frobenius_distance(&id, &ComplexMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn partial_trace_of_identity() {
        let m = ComplexMatrix::<f64>::identity(6, 6);
        for k in 0..2 {
            for l in 0..2 {
                let t = weighted_partial_trace(&m, k, l, 2, 3).unwrap();
                let expected = if k == l {
                    ComplexMatrix::identity(3, 3)
                } else {
                    ComplexMatrix::zeros(3, 3)
                };
                assert_eq!(t, expected);
            }
        }
        assert!(matches!(
            weighted_partial_trace(&m, 2, 0, 2, 3),
            Err(LinalgError::IndexOutOfRange { index: 2, bound: 2 })
        ));
        assert!(weighted_partial_trace(&m, 0, 0, 2, 2).is_err());
    }

    #[test]
    fn partial_trace_of_product_operator() {
        // Y ⊗ X in grid layout has block (i,j) = Y_ij X, so the (k,l) trace is X_kl · Y.
        let x = dmatrix![c(1.0, 0.5), c(-2.0, 0.0); c(0.0, 3.0), c(0.25, -1.0)];
        let y = dmatrix![
            c(0.0, 1.0), c(2.0, 0.0), c(1.0, 1.0);
            c(-1.0, 0.0), c(0.5, 0.5), c(0.0, -2.0);
            c(3.0, 0.0), c(0.0, 0.0), c(1.0, -1.0)
        ];
        let m = y.kronecker(&x);
        for k in 0..2 {
            for l in 0..2 {
                let t = weighted_partial_trace(&m, k, l, 2, 3).unwrap();
                // brute-force block extraction
                for i in 0..3 {
                    for j in 0..3 {
                        let blk = block(&m, i, j, 2);
                        assert_eq!(t[(i, j)], blk[(k, l)]);
                        assert_eq!(t[(i, j)], x[(k, l)] * y[(i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn noise_lift_commutes_with_system_operators() {
        let y = dmatrix![c(0.0, 1.0), c(2.0, 0.0); c(-1.0, 0.5), c(0.5, 0.5)];
        let x = dmatrix![c(1.0, 0.0), c(0.0, 2.0); c(3.0, 0.0), c(-1.0, 0.0)];
        let lifted = noise_lift(&y, 2);
        let system = ComplexMatrix::<f64>::identity(2, 2).kronecker(&x);
        assert!(commutator(&lifted, &system).unwrap().norm() < 1e-14);
    }

    #[test]
    fn tolerance_rejects_negative() {
        assert!(Tolerance::new(-1.0, 0.0).is_err());
        assert!(Tolerance::new(f64::NAN, 0.0).is_err());
        let t = Tolerance::<f64>::default();
        assert!(t.accepts(1.5e-9, 1.0));
        assert!(!t.accepts(3e-9, 1.0));
    }

    #[test]
    fn hermitian_decomposition_recovers_matrix() {
        let a = dmatrix![c(1.0, 2.0), c(3.0, -1.0); c(0.5, 0.0), c(-2.0, 4.0)];
        let h = hermitian_part(&a);
        let k = skew_hermitian_part(&a);
        assert!(hermitian_defect(&h) < 1e-15);
        assert!(hermitian_defect(&k) < 1e-15);
        let back = &h + &k * C::i();
        assert!((back - a).norm() < 1e-14);
    }
}
