use std::cmp::Ordering;

use nalgebra::Complex;

use super::{ensure_square, normalize_column_phases, phase_threshold, ComplexMatrix, LinalgError, Tolerance};
use crate::scalar::Real;

/// Thin singular value decomposition `A = U diag(σ) V*` with `σ` descending.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    pub u: ComplexMatrix<T>,
    pub singular_values: Vec<T>,
    pub v_adjoint: ComplexMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn rank(&self, tol: &Tolerance<T>) -> usize {
        let max = self.singular_values.first().copied().unwrap_or_else(T::zero);
        self.singular_values.iter().filter(|&&s| s > tol.bound(max)).count()
    }
}

pub fn svd<T: Real>(a: &ComplexMatrix<T>) -> Svd<T> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Svd {
            u: ComplexMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v_adjoint: ComplexMatrix::zeros(0, n),
        };
    }
    let raw = a.clone().svd(true, true);
    let u = raw.u.expect("requested U");
    let vt = raw.v_t.expect("requested V*");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        raw.singular_values[j].partial_cmp(&raw.singular_values[i]).unwrap_or(Ordering::Equal)
    });
    Svd {
        u: ComplexMatrix::from_fn(m, k, |r, c| u[(r, order[c])]),
        singular_values: order.iter().map(|&i| raw.singular_values[i]).collect(),
        v_adjoint: ComplexMatrix::from_fn(k, n, |r, c| vt[(order[r], c)]),
    }
}

/// Polar decomposition `A = U P` of a square matrix, `U` unitary and `P`
/// positive semidefinite.
pub fn polar<T: Real>(a: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>), LinalgError> {
    ensure_square(a)?;
    let d = svd(a);
    let sigma = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d.singular_values.len(),
        d.singular_values.iter().map(|&s| Complex::new(s, T::zero())),
    ));
    let u = &d.u * &d.v_adjoint;
    let p = d.v_adjoint.adjoint() * sigma * &d.v_adjoint;
    Ok((u, p))
}

/// Orthonormal basis (as columns) of the kernel of `A`. Singular values up to
/// `tol.bound(σ_max)` count as zero. The zero matrix has the full space as
/// kernel and yields the identity.
pub fn nullspace<T: Real>(a: &ComplexMatrix<T>, tol: &Tolerance<T>) -> ComplexMatrix<T> {
    let (m, n) = a.shape();
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    if a.iter().all(|z| z.norm_sqr() == T::zero()) || m == 0 {
        return ComplexMatrix::identity(n, n);
    }
    let padded = if m < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let d = svd(&padded);
    let rank = d.rank(tol);
    let v = d.v_adjoint.adjoint();
    let mut basis = v.columns(rank, n - rank).into_owned();
    normalize_column_phases(&mut basis, phase_threshold());
    basis
}

/// Matrix exponential by Padé approximation with scaling and squaring.
pub fn matrix_exp<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>, LinalgError> {
    ensure_square(a)?;
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    Ok(a.exp())
}
