use nalgebra::{Complex, ComplexField, DVector};

use super::{eig_normal, ensure_square, symmetric_defect, unitarity_defect, ComplexMatrix, LinalgError, Tolerance};
use crate::scalar::{lit, to_f64, unit_phase, Real};

/// Factorizes a symmetric unitary `A` as `A = Tᵗ T` with `T` unitary.
///
/// `T` is taken to be a square root of `A` whose branch cut points into the
/// widest angular gap of the spectrum. Such a root is a polynomial in `A`,
/// hence symmetric, and `Tᵗ T = T² = A`.
pub fn takagi_symmetric_unitary<T: Real>(
    a: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<ComplexMatrix<T>, LinalgError> {
    let d = ensure_square(a)?;
    if d == 0 {
        return Ok(a.clone());
    }
    let scale = lit::<T>(d as f64).sqrt();
    let sym = symmetric_defect(a);
    if !tol.accepts(sym, scale) {
        return Err(LinalgError::NotSymmetric { residual: to_f64(sym) });
    }
    let uni = unitarity_defect(a);
    if !tol.accepts(uni, scale) {
        return Err(LinalgError::NotUnitary { residual: to_f64(uni) });
    }

    let (values, u) = eig_normal(a, tol)?;
    let cut = widest_gap_direction(&values);
    let reference = cut + T::pi();
    let two = lit::<T>(2.0);
    let roots = DVector::from_iterator(
        d,
        values.iter().map(|z| {
            let offset = (z * unit_phase(-reference)).argument();
            unit_phase((reference + offset) / two)
        }),
    );
    let t = &u * ComplexMatrix::from_diagonal(&roots) * u.adjoint();

    let residual = (a - t.transpose() * &t).norm();
    let bound = tol.bound(scale) * lit::<T>(10.0 * d as f64);
    if residual > bound {
        return Err(LinalgError::FactorizationFailed { residual: to_f64(residual) });
    }
    Ok(t)
}

/// Angle bisecting the largest arc between consecutive eigenvalue phases.
fn widest_gap_direction<T: Real>(values: &[Complex<T>]) -> T {
    let mut angles: Vec<T> = values.iter().map(|z| z.argument()).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let two_pi = T::two_pi();
    let mut best_gap = angles[0] + two_pi - angles[angles.len() - 1];
    let mut best_mid = angles[angles.len() - 1] + best_gap / lit(2.0);
    for w in angles.windows(2) {
        let gap = w[1] - w[0];
        if gap > best_gap {
            best_gap = gap;
            best_mid = w[0] + gap / lit(2.0);
        }
    }
    best_mid
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn check(a: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
        let t = takagi_symmetric_unitary(a, &Tolerance::default()).unwrap();
        assert!((a - t.transpose() * &t).norm() < 1e-12);
        assert!(unitarity_defect(&t) < 1e-12);
        t
    }

    #[test]
    fn one_by_one() {
        let t = check(&dmatrix![c(1.0, 0.0)]);
        assert!((t[(0, 0)].norm_sqr() - 1.0).abs() < 1e-14);
        let t = check(&dmatrix![c(-1.0, 0.0)]);
        assert!((t[(0, 0)] - c(0.0, 1.0)).norm() < 1e-14 || (t[(0, 0)] + c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn full_circle_spectrum() {
        // eigenvalues spread around the circle, including -1
        let a = ComplexMatrix::<f64>::from_diagonal(&nalgebra::dvector![
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(-1.0, 0.0),
            unit_phase(-2.0)
        ]);
        check(&a);
    }

    #[test]
    fn pauli_x_is_symmetric_unitary() {
        check(&dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn rejects_bad_input() {
        let tol = Tolerance::default();
        let not_sym = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(-1.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(takagi_symmetric_unitary(&not_sym, &tol), Err(LinalgError::NotSymmetric { .. })));
        let not_uni = dmatrix![c(2.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(takagi_symmetric_unitary(&not_uni, &tol), Err(LinalgError::NotUnitary { .. })));
    }
}
