use std::cmp::Ordering;

use nalgebra::{Complex, SymmetricEigen};

use super::{
    ensure_square, hermitian_defect, hermitian_part, normality_defect, normalize_column_phases,
    off_diagonal_norm, phase_threshold, skew_hermitian_part, ComplexMatrix, LinalgError,
    Tolerance,
};
use crate::scalar::{lit, to_f64, Real};

const MAX_RANDOMIZATIONS: usize = 3;

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues in ascending
/// order and a unitary whose columns are the matching eigenvectors.
pub fn hermitian_eig<T: Real>(
    a: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<(Vec<T>, ComplexMatrix<T>), LinalgError> {
    ensure_square(a)?;
    let defect = hermitian_defect(a);
    if !tol.accepts(defect, a.norm()) {
        return Err(LinalgError::NotHermitian { residual: to_f64(defect) });
    }
    Ok(sorted_hermitian_eig(&hermitian_part(a)))
}

fn sorted_hermitian_eig<T: Real>(h: &ComplexMatrix<T>) -> (Vec<T>, ComplexMatrix<T>) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), h.clone());
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigen-decomposition `A = U diag(λ) U*` of a normal matrix. Eigenvalues are
/// ordered by real part, then imaginary part.
pub fn eig_normal<T: Real>(
    a: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<(Vec<Complex<T>>, ComplexMatrix<T>), LinalgError> {
    ensure_square(a)?;
    let defect = normality_defect(a);
    let scale = a.norm();
    if !tol.accepts(defect, scale * scale) {
        return Err(LinalgError::NotNormal { residual: to_f64(defect) });
    }
    let u = simultaneous_diagonalize(&[a.clone(), a.adjoint()], tol)?;
    let diag = u.adjoint() * a * &u;
    Ok(((0..a.nrows()).map(|i| diag[(i, i)]).collect(), u))
}

/// A unitary `W` with `W* A W` diagonal for every member of a commuting
/// family of normal matrices.
///
/// Columns are ordered lexicographically by the diagonal entries of the
/// members (in family order, rounded to `abs_eps`), and each column carries
/// the phase convention that its first non-negligible entry is real
/// positive. Degenerate joint eigenspaces are split by random real
/// combinations of the Hermitian and anti-Hermitian parts; if a subspace
/// refuses to split after a few re-draws, `DegeneracyUnresolved` is returned.
pub fn simultaneous_diagonalize<T: Real>(
    family: &[ComplexMatrix<T>],
    tol: &Tolerance<T>,
) -> Result<ComplexMatrix<T>, LinalgError> {
    let n = match family.first() {
        None => return Ok(ComplexMatrix::identity(0, 0)),
        Some(first) => ensure_square(first)?,
    };
    for m in family {
        if m.shape() != (n, n) {
            return Err(LinalgError::DimensionMismatch(format!(
                "family members must all be {n}x{n}, found {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = normality_defect(m);
        let scale = m.norm();
        if !tol.accepts(defect, scale * scale) {
            return Err(LinalgError::NotNormal { residual: to_f64(defect) });
        }
    }
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            let residual = (a * b - b * a).norm();
            if !tol.accepts(residual, T::one().max(a.norm() * b.norm())) {
                return Err(LinalgError::NotCommuting { residual: to_f64(residual) });
            }
        }
    }

    let mut hermitian: Vec<ComplexMatrix<T>> = Vec::new();
    for m in family {
        for part in [hermitian_part(m), skew_hermitian_part(m)] {
            let norm = part.norm();
            if norm > tol.abs_eps && norm > T::zero() {
                hermitian.push(part.unscale(norm));
            }
        }
    }

    let mut rng = SplitMix64::new(0x5eed_d1a6_0000_0001);
    let mut w = ComplexMatrix::<T>::identity(n, n);
    if !hermitian.is_empty() && n > 1 {
        let mut columns = Vec::with_capacity(n);
        refine(&ComplexMatrix::identity(n, n), &hermitian, tol, &mut rng, &mut columns)?;
        w = ComplexMatrix::from_columns(&columns);
    }

    for m in family {
        let d = w.adjoint() * m * &w;
        let off = off_diagonal_norm(&d);
        let bound = tol.bound(m.norm()) * lit::<T>(10.0) * lit::<T>(n.max(1) as f64);
        if off > bound {
            return Err(LinalgError::FactorizationFailed { residual: to_f64(off) });
        }
    }

    let keys: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|c| {
            let col = w.column(c);
            family
                .iter()
                .map(|m| {
                    let z = (col.adjoint() * m * col)[(0, 0)];
                    (round_key(to_f64(z.re), to_f64(tol.abs_eps)), round_key(to_f64(z.im), to_f64(tol.abs_eps)))
                })
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        for (a, b) in keys[i].iter().zip(&keys[j]) {
            let o = a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    });
    let mut sorted = ComplexMatrix::from_fn(n, n, |r, c| w[(r, order[c])]);
    normalize_column_phases(&mut sorted, phase_threshold());
    Ok(sorted)
}

fn round_key(x: f64, eps: f64) -> f64 {
    if eps > 0.0 {
        (x / eps).round()
    } else {
        x
    }
}

/// Splits the subspace spanned by the orthonormal columns of `q` into joint
/// eigenspaces of the (unit-norm, Hermitian) family, pushing the resulting
/// columns onto `out`.
fn refine<T: Real>(
    q: &ComplexMatrix<T>,
    family: &[ComplexMatrix<T>],
    tol: &Tolerance<T>,
    rng: &mut SplitMix64,
    out: &mut Vec<nalgebra::DVector<Complex<T>>>,
) -> Result<(), LinalgError> {
    let k = q.ncols();
    let compressed: Vec<ComplexMatrix<T>> =
        family.iter().map(|h| hermitian_part(&(q.adjoint() * h * q))).collect();
    if k == 1 || compressed.iter().all(|h| is_scalar(h, tol)) {
        out.extend(q.column_iter().map(|c| c.into_owned()));
        return Ok(());
    }

    for _ in 0..MAX_RANDOMIZATIONS {
        let mut combo = ComplexMatrix::<T>::zeros(k, k);
        for h in &compressed {
            combo += h * Complex::new(lit::<T>(rng.next_signed()), T::zero());
        }
        let (values, vectors) = sorted_hermitian_eig(&combo);
        let gap = tol.bound(combo.norm());
        let mut clusters: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=k {
            if i == k || values[i] - values[i - 1] > gap {
                clusters.push((start, i));
                start = i;
            }
        }
        if clusters.len() == 1 {
            continue;
        }
        for (lo, hi) in clusters {
            let sub = q * vectors.columns(lo, hi - lo);
            refine(&sub, family, tol, rng, out)?;
        }
        return Ok(());
    }
    Err(LinalgError::DegeneracyUnresolved { attempts: MAX_RANDOMIZATIONS })
}

fn is_scalar<T: Real>(h: &ComplexMatrix<T>, tol: &Tolerance<T>) -> bool {
    let k = h.nrows();
    let mean = h.trace() / Complex::new(lit::<T>(k as f64), T::zero());
    let dev = (h - ComplexMatrix::<T>::identity(k, k) * mean).norm();
    tol.accepts(dev, T::one())
}

/// Small deterministic generator for the random combinations; keeps the
/// decomposition reproducible across runs and platforms.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[-1, 1)`.
    fn next_signed(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}
