//! The environment algebra generated by the partial traces of the gauge
//! operator, its commutant, and the diagonalizing change of noise.

use crate::matrix::{
    block, noise_lift, nullspace, simultaneous_diagonalize, weighted_partial_trace, ComplexMatrix,
    LinalgError, Tolerance,
};
use crate::model::{apply_noise_change, NoiseChange, QleCoefficients};
use crate::scalar::{lit, to_f64, Real};

/// Gauge block of one noise direction after diagonalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction<T: Real> {
    pub s: ComplexMatrix<T>,
    pub is_wiener: bool,
}

#[derive(Debug, Clone)]
pub struct EnvAlgebraReport<T: Real> {
    pub generators: Vec<ComplexMatrix<T>>,
    pub commutative: bool,
    /// Largest generator commutator, relative to the product of norms.
    pub commutator_residual: f64,
    /// Present iff `commutative`. Columns are the new noise directions,
    /// Wiener directions first.
    pub w_diag: Option<NoiseChange<T>>,
    pub directions: Vec<Direction<T>>,
    /// Frobenius norm of the off-diagonal blocks of the conjugated gauge.
    pub offdiag_residual: f64,
    pub commutant_basis: Vec<ComplexMatrix<T>>,
}

impl<T: Real> EnvAlgebraReport<T> {
    pub fn wiener_count(&self) -> usize {
        self.directions.iter().filter(|d| d.is_wiener).count()
    }
}

/// All `𝕊^{kl}` over `0 ≤ k, l < n` (row-major in `(k, l)`), followed by all
/// `(𝕊*)^{kl}` in the same order.
pub fn generators<T: Real>(
    s: &ComplexMatrix<T>,
    n: usize,
    d: usize,
) -> Result<Vec<ComplexMatrix<T>>, LinalgError> {
    let s_adj = s.adjoint();
    let mut out = Vec::with_capacity(2 * n * n);
    for m in [s, &s_adj] {
        for k in 0..n {
            for l in 0..n {
                out.push(weighted_partial_trace(m, k, l, n, d)?);
            }
        }
    }
    Ok(out)
}

/// Largest `‖[A, B]‖ / max(1, ‖A‖‖B‖)` over pairs of the family.
fn worst_commutator<T: Real>(gens: &[ComplexMatrix<T>]) -> T {
    let mut worst = T::zero();
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            let r = (a * b - b * a).norm() / T::one().max(a.norm() * b.norm());
            worst = worst.max(r);
        }
    }
    worst
}

/// Whether every pairwise commutator `[A, B]` has Frobenius norm within
/// `tol` at scale `max(1, ‖A‖‖B‖)`.
pub fn is_commutative<T: Real>(gens: &[ComplexMatrix<T>], tol: &Tolerance<T>) -> bool {
    gens.iter().enumerate().all(|(i, a)| {
        gens[i + 1..].iter().all(|b| {
            let r = (a * b - b * a).norm();
            tol.accepts(r, T::one().max(a.norm() * b.norm()))
        })
    })
}

/// Orthonormal (Hilbert–Schmidt) basis of `{Y : [I ⊗ Y, 𝕊] = [I ⊗ Y, 𝕊*] = 0}`.
pub fn commutant<T: Real>(
    s: &ComplexMatrix<T>,
    n: usize,
    d: usize,
    tol: &Tolerance<T>,
) -> Result<Vec<ComplexMatrix<T>>, LinalgError> {
    let nd = n * d;
    if s.shape() != (nd, nd) {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected {nd}x{nd} gauge, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let s_adj = s.adjoint();
    let rows = 2 * nd * nd;
    let mut map = ComplexMatrix::<T>::zeros(rows, d * d);
    for b in 0..d {
        for a in 0..d {
            let mut unit = ComplexMatrix::<T>::zeros(d, d);
            unit[(a, b)] = nalgebra::Complex::new(T::one(), T::zero());
            let lifted = noise_lift(&unit, n);
            let c1 = &lifted * s - s * &lifted;
            let c2 = &lifted * &s_adj - &s_adj * &lifted;
            let mut col = map.column_mut(a + b * d);
            col.rows_mut(0, nd * nd).copy_from_slice(c1.as_slice());
            col.rows_mut(nd * nd, nd * nd).copy_from_slice(c2.as_slice());
        }
    }
    let kernel = nullspace(&map, tol);
    Ok(kernel
        .column_iter()
        .map(|v| ComplexMatrix::from_column_slice(d, d, v.as_slice()))
        .collect())
}

/// Frobenius test `‖S − I‖ ≤ (abs + rel)·√n` for a direction's gauge block.
pub fn is_wiener_block<T: Real>(s: &ComplexMatrix<T>, tol: &Tolerance<T>) -> bool {
    let n = s.nrows();
    let dev = (s - ComplexMatrix::<T>::identity(n, n)).norm();
    dev <= tol.bound(T::one()) * lit::<T>(n as f64).sqrt()
}

/// Decides commutativity of the environment algebra and, when it holds,
/// finds a noise basis in which `𝕊` is block diagonal, Wiener directions
/// first.
pub fn diagonalize_environment<T: Real>(
    c: &QleCoefficients<T>,
    tol: &Tolerance<T>,
) -> Result<EnvAlgebraReport<T>, LinalgError> {
    let (n, d) = (c.n(), c.d());
    let gens = generators(c.gauge(), n, d)?;
    let commutative = is_commutative(&gens, tol);
    let commutant_basis = commutant(c.gauge(), n, d, tol)?;
    let mut report = EnvAlgebraReport {
        commutator_residual: to_f64(worst_commutator(&gens)),
        generators: gens,
        commutative,
        w_diag: None,
        directions: Vec::new(),
        offdiag_residual: 0.0,
        commutant_basis,
    };
    if !commutative {
        return Ok(report);
    }
    let w = simultaneous_diagonalize(&report.generators, tol)?;
    let lift = noise_lift(&w, n);
    let conjugated = lift.adjoint() * c.gauge() * &lift;
    let blocks: Vec<ComplexMatrix<T>> = (0..d).map(|i| block(&conjugated, i, i, n)).collect();
    let wiener: Vec<bool> = blocks.iter().map(|b| is_wiener_block(b, tol)).collect();
    let order: Vec<usize> =
        (0..d).filter(|&i| wiener[i]).chain((0..d).filter(|&i| !wiener[i])).collect();
    let w_sorted = ComplexMatrix::from_fn(d, d, |r, k| w[(r, order[k])]);

    let mut off = T::zero();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                off += block(&conjugated, i, j, n).norm_squared();
            }
        }
    }
    report.offdiag_residual = to_f64(off.sqrt());
    report.directions =
        order.iter().map(|&i| Direction { s: blocks[i].clone(), is_wiener: wiener[i] }).collect();
    report.w_diag = Some(NoiseChange::new(w_sorted, &tol.scaled(lit(100.0))).map_err(|_| {
        LinalgError::FactorizationFailed { residual: to_f64(crate::matrix::unitarity_defect(&w)) }
    })?);
    Ok(report)
}

/// `c` rewritten in the diagonalizing basis of [`diagonalize_environment`].
pub fn diagonalized<T: Real>(
    c: &QleCoefficients<T>,
    report: &EnvAlgebraReport<T>,
) -> Option<QleCoefficients<T>> {
    report.w_diag.as_ref().map(|w| apply_noise_change(c, w).expect("dimension checked"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, Complex};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    #[test]
    fn identity_gauge_generators() {
        let gens = generators(&ComplexMatrix::<f64>::identity(6, 6), 2, 3).unwrap();
        assert_eq!(gens.len(), 8);
        for (idx, g) in gens.iter().enumerate() {
            let (k, l) = ((idx % 4) / 2, idx % 2);
            let expected = if k == l { ComplexMatrix::identity(3, 3) } else { ComplexMatrix::zeros(3, 3) };
            assert_eq!(g, &expected);
        }
        assert!(is_commutative(&gens, &tol()));
    }

    #[test]
    fn permutation_gauge_generators_are_scalar_multiples() {
        // I_H ⊗ P: diagonal traces equal P, off-diagonal ones vanish
        let p = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(1.0, 0.0), c(0.0, 0.0)];
        let s = noise_lift(&p, 2);
        let gens = generators(&s, 2, 2).unwrap();
        assert_eq!(gens[0], p);
        assert_eq!(gens[1], ComplexMatrix::zeros(2, 2));
        assert_eq!(gens[3], p);
    }

    #[test]
    fn non_commuting_coupling() {
        // d = 2, n = 2 with off-diagonal coupling blocks σ_x and σ_y
        let z = C::new(0.0, 0.0);
        let o = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        let s = dmatrix![
            z, z, z, o;
            z, z, o, z;
            z, -i, z, z;
            i, z, z, z
        ];
        let gens = generators(&s, 2, 2).unwrap();
        assert!(!is_commutative(&gens, &tol()));
    }

    #[test]
    fn commutant_dimensions() {
        assert_eq!(commutant(&ComplexMatrix::<f64>::identity(6, 6), 2, 3, &tol()).unwrap().len(), 9);
        let phase = C::from_polar(1.0, 0.9);
        let s = noise_lift(&dmatrix![c(1.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), phase], 2);
        let basis = commutant(&s, 2, 2, &tol()).unwrap();
        assert_eq!(basis.len(), 2);
        for y in &basis {
            assert!(y[(0, 1)].norm() < 1e-12 && y[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn trivial_gauge_is_all_wiener() {
        let q = QleCoefficients::with_trivial_gauge(
            ComplexMatrix::<f64>::zeros(2, 2),
            vec![ComplexMatrix::zeros(2, 2); 3],
            &tol(),
        )
        .unwrap();
        let r = diagonalize_environment(&q, &tol()).unwrap();
        assert!(r.commutative);
        assert_eq!(r.w_diag.unwrap().matrix(), &ComplexMatrix::identity(3, 3));
        assert!(r.directions.iter().all(|d| d.is_wiener));
    }
}
