//! Coefficients of a unitary quantum Langevin equation and changes of noise.
//!
//! A unitary equation `dU = Σ L^i_j U da^i_j` on `H ⊗ Γ(L²(R₊; K))` with
//! `dim H = n` and `dim K = d` is determined by the Hamiltonian `H`, the
//! creation coefficients `L⁰_i` and the unitary gauge operator `𝕊`. The
//! remaining coefficients follow from
//!
//! ```text
//! L⁰₀ = −iH − ½ Σ_k (L⁰_k)* L⁰_k
//! L^i_0 = −Σ_j (L⁰_j)* S^i_j
//! L^i_j = S^i_j − δ_ij I
//! ```

use std::fmt;

use nalgebra::Complex;
use thiserror::Error;

use crate::matrix::{
    block, hermitian_defect, hermitian_part, noise_lift, unitarity_defect, ComplexMatrix,
    LinalgError, Tolerance,
};
use crate::scalar::{imag_unit, lit, real, to_f64, Real};

/// The first unitarity condition found violated by [`validate`] or
/// [`QleCoefficients::new`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeViolation {
    GaugeNotUnitary,
    HamiltonianNotSelfAdjoint,
    /// `L^i_0 ≠ −Σ_j (L⁰_j)* S^i_j` for this `i`.
    RowRelation { index: usize },
}

impl fmt::Display for SchemeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeViolation::GaugeNotUnitary => write!(f, "gauge operator is not unitary"),
            SchemeViolation::HamiltonianNotSelfAdjoint => write!(f, "Hamiltonian is not self-adjoint"),
            SchemeViolation::RowRelation { index } => {
                write!(f, "annihilation coefficient {index} violates the row relation")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("not a unitary scheme: {violation} (residual {residual:.3e})")]
    NotUnitaryScheme { violation: SchemeViolation, residual: f64 },
    #[error("noise change is not unitary (residual {residual:.3e})")]
    NoiseChangeNotUnitary { residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Validated coefficients `(H, L⁰, 𝕊)`. `𝕊` uses the grid layout described
/// in [`crate::matrix`]: block `(i, j)` holds `S^j_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QleCoefficients<T: Real> {
    n: usize,
    d: usize,
    hamiltonian: ComplexMatrix<T>,
    l0: Vec<ComplexMatrix<T>>,
    gauge: ComplexMatrix<T>,
}

/// Every coefficient `L^i_j` of the equation.
#[derive(Debug, Clone, PartialEq)]
pub struct FullCoefficients<T: Real> {
    pub n: usize,
    pub d: usize,
    pub l00: ComplexMatrix<T>,
    /// Creation coefficients `L⁰_i`.
    pub l0_col: Vec<ComplexMatrix<T>>,
    /// Annihilation coefficients `L^i_0`.
    pub l0_row: Vec<ComplexMatrix<T>>,
    /// `𝕃 = 𝕊 − I` in grid layout (block `(i, j)` holds `L^j_i`).
    pub lmat: ComplexMatrix<T>,
}

fn check_shapes<T: Real>(
    n: usize,
    d: usize,
    hamiltonian: &ComplexMatrix<T>,
    l0: &[ComplexMatrix<T>],
    gauge: &ComplexMatrix<T>,
) -> Result<(), ModelError> {
    if n == 0 {
        return Err(ModelError::Shape("system dimension must be positive".into()));
    }
    if hamiltonian.shape() != (n, n) {
        return Err(ModelError::Shape(format!(
            "Hamiltonian is {}x{}, expected {n}x{n}",
            hamiltonian.nrows(),
            hamiltonian.ncols()
        )));
    }
    if l0.len() != d {
        return Err(ModelError::Shape(format!("{} creation coefficients for {d} noises", l0.len())));
    }
    for (i, l) in l0.iter().enumerate() {
        if l.shape() != (n, n) {
            return Err(ModelError::Shape(format!(
                "creation coefficient {i} is {}x{}, expected {n}x{n}",
                l.nrows(),
                l.ncols()
            )));
        }
    }
    if gauge.shape() != (n * d, n * d) {
        return Err(ModelError::Shape(format!(
            "gauge operator is {}x{}, expected {}x{}",
            gauge.nrows(),
            gauge.ncols(),
            n * d,
            n * d
        )));
    }
    Ok(())
}

fn check_gauge<T: Real>(gauge: &ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<(), ModelError> {
    let defect = unitarity_defect(gauge);
    if tol.accepts(defect, lit::<T>(gauge.nrows() as f64).sqrt()) {
        Ok(())
    } else {
        Err(ModelError::NotUnitaryScheme {
            violation: SchemeViolation::GaugeNotUnitary,
            residual: to_f64(defect),
        })
    }
}

fn check_hamiltonian<T: Real>(h: &ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<(), ModelError> {
    let defect = hermitian_defect(h);
    if tol.accepts(defect, h.norm()) {
        Ok(())
    } else {
        Err(ModelError::NotUnitaryScheme {
            violation: SchemeViolation::HamiltonianNotSelfAdjoint,
            residual: to_f64(defect),
        })
    }
}

impl<T: Real> QleCoefficients<T> {
    /// Checks shapes, self-adjointness of `H` and unitarity of `𝕊`. `H` is
    /// stored as its exact Hermitian part.
    pub fn new(
        hamiltonian: ComplexMatrix<T>,
        l0: Vec<ComplexMatrix<T>>,
        gauge: ComplexMatrix<T>,
        tol: &Tolerance<T>,
    ) -> Result<Self, ModelError> {
        let n = hamiltonian.nrows();
        let d = l0.len();
        check_shapes(n, d, &hamiltonian, &l0, &gauge)?;
        check_gauge(&gauge, tol)?;
        check_hamiltonian(&hamiltonian, tol)?;
        Ok(Self { n, d, hamiltonian: hermitian_part(&hamiltonian), l0, gauge })
    }

    /// Like [`new`](Self::new) with explicit dimensions, so that `d = 0`
    /// equations keep their system dimension.
    pub fn with_dims(
        n: usize,
        d: usize,
        hamiltonian: ComplexMatrix<T>,
        l0: Vec<ComplexMatrix<T>>,
        gauge: ComplexMatrix<T>,
        tol: &Tolerance<T>,
    ) -> Result<Self, ModelError> {
        check_shapes(n, d, &hamiltonian, &l0, &gauge)?;
        check_gauge(&gauge, tol)?;
        check_hamiltonian(&hamiltonian, tol)?;
        Ok(Self { n, d, hamiltonian: hermitian_part(&hamiltonian), l0, gauge })
    }

    /// `𝕊 = I`, so every direction is a Wiener direction.
    pub fn with_trivial_gauge(
        hamiltonian: ComplexMatrix<T>,
        l0: Vec<ComplexMatrix<T>>,
        tol: &Tolerance<T>,
    ) -> Result<Self, ModelError> {
        let n = hamiltonian.nrows();
        let d = l0.len();
        Self::with_dims(n, d, hamiltonian, l0, ComplexMatrix::identity(n * d, n * d), tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix<T> {
        &self.hamiltonian
    }

    /// Creation coefficients `L⁰_i`.
    pub fn l0(&self) -> &[ComplexMatrix<T>] {
        &self.l0
    }

    /// `𝕊` in grid layout.
    pub fn gauge(&self) -> &ComplexMatrix<T> {
        &self.gauge
    }

    /// `S^i_j`, stored at grid block `(j, i)`.
    pub fn s(&self, i: usize, j: usize) -> ComplexMatrix<T> {
        block(&self.gauge, j, i, self.n)
    }

    /// The same equation with another Hamiltonian.
    pub fn with_hamiltonian(&self, hamiltonian: ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<Self, ModelError> {
        Self::with_dims(self.n, self.d, hamiltonian, self.l0.clone(), self.gauge.clone(), tol)
    }

    /// `L⁰₀ = −iH − ½ Σ (L⁰_k)* L⁰_k`.
    pub fn drift(&self) -> ComplexMatrix<T> {
        let half = real(lit::<T>(0.5));
        let mut l00 = &self.hamiltonian * (-imag_unit::<T>());
        for l in &self.l0 {
            l00 -= l.adjoint() * l * half;
        }
        l00
    }

    /// `L^i_0 = −Σ_j (L⁰_j)* S^i_j`.
    pub fn annihilation(&self, i: usize) -> ComplexMatrix<T> {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for (j, l) in self.l0.iter().enumerate() {
            acc -= l.adjoint() * block(&self.gauge, j, i, self.n);
        }
        acc
    }
}

/// All coefficients `L^i_j` of a validated equation.
pub fn derive_full<T: Real>(c: &QleCoefficients<T>) -> FullCoefficients<T> {
    let nd = c.n * c.d;
    FullCoefficients {
        n: c.n,
        d: c.d,
        l00: c.drift(),
        l0_col: c.l0.clone(),
        l0_row: (0..c.d).map(|i| c.annihilation(i)).collect(),
        lmat: &c.gauge - ComplexMatrix::identity(nd, nd),
    }
}

/// Recognizes a coefficient family as a unitary scheme: rebuilds
/// `𝕊 = 𝕃 + I` and `H = i(L⁰₀ + ½ Σ (L⁰_k)* L⁰_k)` and checks, in this order,
/// unitarity of `𝕊`, self-adjointness of `H` and the row relation for every
/// annihilation coefficient.
pub fn validate<T: Real>(full: &FullCoefficients<T>, tol: &Tolerance<T>) -> Result<QleCoefficients<T>, ModelError> {
    let (n, d) = (full.n, full.d);
    let nd = n * d;
    if full.l0_row.len() != d {
        return Err(ModelError::Shape(format!("{} annihilation coefficients for {d} noises", full.l0_row.len())));
    }
    if full.l0_row.iter().any(|l| l.shape() != (n, n)) {
        return Err(ModelError::Shape("annihilation coefficient of wrong size".into()));
    }
    if full.lmat.shape() != (nd, nd) {
        return Err(ModelError::Shape(format!(
            "gauge coefficients are {}x{}, expected {nd}x{nd}",
            full.lmat.nrows(),
            full.lmat.ncols()
        )));
    }
    if full.l00.shape() != (n, n) {
        return Err(ModelError::Shape("drift coefficient of wrong size".into()));
    }
    let gauge = &full.lmat + ComplexMatrix::identity(nd, nd);
    let half = real(lit::<T>(0.5));
    let mut raw_h = full.l00.clone();
    for l in &full.l0_col {
        raw_h += l.adjoint() * l * half;
    }
    let raw_h = raw_h * imag_unit::<T>();
    check_shapes(n, d, &raw_h, &full.l0_col, &gauge)?;
    check_gauge(&gauge, tol)?;
    check_hamiltonian(&raw_h, tol)?;
    let c = QleCoefficients { n, d, hamiltonian: hermitian_part(&raw_h), l0: full.l0_col.clone(), gauge };
    let scale = T::one() + full.l0_col.iter().fold(T::zero(), |acc, l| acc + l.norm());
    for (i, given) in full.l0_row.iter().enumerate() {
        let residual = (given - c.annihilation(i)).norm();
        if !tol.accepts(residual, scale) {
            return Err(ModelError::NotUnitaryScheme {
                violation: SchemeViolation::RowRelation { index: i },
                residual: to_f64(residual),
            });
        }
    }
    Ok(c)
}

/// A unitary change of noise basis `f_i = W e_i` of `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChange<T: Real> {
    w: ComplexMatrix<T>,
}

impl<T: Real> NoiseChange<T> {
    pub fn new(w: ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<Self, ModelError> {
        let defect = unitarity_defect(&w);
        if tol.accepts(defect, lit::<T>(w.nrows() as f64).sqrt()) {
            Ok(Self { w })
        } else {
            Err(ModelError::NoiseChangeNotUnitary { residual: to_f64(defect) })
        }
    }

    pub fn identity(d: usize) -> Self {
        Self { w: ComplexMatrix::identity(d, d) }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.w
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.w
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// The change performing `self` first and `next` second:
    /// `apply(apply(c, self), next) == apply(c, self.then(next))`.
    pub fn then(&self, next: &NoiseChange<T>) -> NoiseChange<T> {
        NoiseChange { w: &self.w * &next.w }
    }

    pub fn inverse(&self) -> NoiseChange<T> {
        NoiseChange { w: self.w.adjoint() }
    }

    /// Block-diagonal change acting as `self` on the first directions and as
    /// `other` on the rest.
    pub fn direct_sum(&self, other: &NoiseChange<T>) -> NoiseChange<T> {
        let (a, b) = (self.dim(), other.dim());
        let mut w = ComplexMatrix::zeros(a + b, a + b);
        w.view_mut((0, 0), (a, a)).copy_from(&self.w);
        w.view_mut((a, a), (b, b)).copy_from(&other.w);
        NoiseChange { w }
    }
}

/// Coefficients of the same equation written in the noise basis `f_i = W e_i`:
/// `L̃⁰ = W* L⁰`, `𝕊̃ = (I ⊗ W)* 𝕊 (I ⊗ W)`, `H` unchanged.
pub fn apply_noise_change<T: Real>(
    c: &QleCoefficients<T>,
    w: &NoiseChange<T>,
) -> Result<QleCoefficients<T>, ModelError> {
    if w.dim() != c.d {
        return Err(ModelError::Shape(format!("noise change is {0}x{0} for {1} noises", w.dim(), c.d)));
    }
    let m = &w.w;
    let l0 = (0..c.d)
        .map(|i| {
            let mut acc = ComplexMatrix::zeros(c.n, c.n);
            for (j, l) in c.l0.iter().enumerate() {
                acc += l * m[(j, i)].conj();
            }
            acc
        })
        .collect();
    let lift = noise_lift(m, c.n);
    let gauge = lift.adjoint() * &c.gauge * &lift;
    Ok(QleCoefficients { n: c.n, d: c.d, hamiltonian: c.hamiltonian.clone(), l0, gauge })
}

/// Diagonal noise change with the given unit-modulus entries.
pub(crate) fn phase_change<T: Real>(phases: &[Complex<T>]) -> NoiseChange<T> {
    NoiseChange { w: ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(phases)) }
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

    fn emission() -> ComplexMatrix<f64> {
        dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, 0.0)]
    }

    #[test]
    fn static_evolution() {
        let q = QleCoefficients::with_trivial_gauge(ComplexMatrix::zeros(2, 2), vec![ComplexMatrix::zeros(2, 2)], &tol())
            .unwrap();
        let f = derive_full(&q);
        assert_eq!(f.l00, ComplexMatrix::zeros(2, 2));
        assert_eq!(f.l0_row, vec![ComplexMatrix::zeros(2, 2)]);
        assert_eq!(f.lmat, ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn spontaneous_emission_coefficients() {
        let v = emission();
        let q = QleCoefficients::with_trivial_gauge(ComplexMatrix::zeros(2, 2), vec![v.clone()], &tol()).unwrap();
        let f = derive_full(&q);
        assert_eq!(f.l00, dmatrix![c(0.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(-0.5, 0.0)]);
        assert_eq!(f.l0_row[0], -v.adjoint());
    }

    #[test]
    fn single_noise_row_is_minus_l_star_s() {
        let l = dmatrix![c(1.0, 2.0), c(0.5, 0.0); c(0.0, -1.0), c(3.0, 0.0)];
        let t = 0.4f64;
        let s = dmatrix![c(t.cos(), 0.0), c(0.0, t.sin()); c(0.0, t.sin()), c(t.cos(), 0.0)];
        let q = QleCoefficients::new(ComplexMatrix::zeros(2, 2), vec![l.clone()], s.clone(), &tol()).unwrap();
        let f = derive_full(&q);
        assert!((&f.l0_row[0] + l.adjoint() * &s).norm() < 1e-14);
        assert!((&f.lmat - (&s - ComplexMatrix::identity(2, 2))).norm() < 1e-15);
    }

    #[test]
    fn validate_round_trip_and_wrong_sign() {
        let v = emission();
        let h = dmatrix![c(1.0, 0.0), c(0.0, 1.0); c(0.0, -1.0), c(-1.0, 0.0)];
        let q = QleCoefficients::with_trivial_gauge(h, vec![v.clone()], &tol()).unwrap();
        let mut f = derive_full(&q);
        let back = validate(&f, &tol()).unwrap();
        assert!((back.hamiltonian() - q.hamiltonian()).norm() < 1e-12);
        f.l0_row[0] = v.adjoint();
        match validate(&f, &tol()) {
            Err(ModelError::NotUnitaryScheme { violation, .. }) => {
                assert_eq!(violation, SchemeViolation::RowRelation { index: 0 })
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn all_zero_family_is_valid() {
        let f = FullCoefficients {
            n: 2,
            d: 2,
            l00: ComplexMatrix::<f64>::zeros(2, 2),
            l0_col: vec![ComplexMatrix::zeros(2, 2); 2],
            l0_row: vec![ComplexMatrix::zeros(2, 2); 2],
            lmat: ComplexMatrix::zeros(4, 4),
        };
        let q = validate(&f, &tol()).unwrap();
        assert_eq!(q.hamiltonian(), &ComplexMatrix::zeros(2, 2));
        assert_eq!(q.gauge(), &ComplexMatrix::identity(4, 4));
    }

    #[test]
    fn validate_names_gauge_first() {
        let f = FullCoefficients {
            n: 1,
            d: 1,
            l00: dmatrix![c(0.0, 0.0)],
            l0_col: vec![dmatrix![c(0.0, 0.0)]],
            l0_row: vec![dmatrix![c(5.0, 0.0)]],
            lmat: dmatrix![c(0.1, 0.0)],
        };
        assert!(matches!(
            validate(&f, &tol()),
            Err(ModelError::NotUnitaryScheme { violation: SchemeViolation::GaugeNotUnitary, .. })
        ));
    }

    #[test]
    fn scalar_noise_change_conjugates() {
        let l = dmatrix![c(1.0, 0.0), c(2.0, 0.0); c(0.0, 1.0), c(0.0, 0.0)];
        let q = QleCoefficients::with_trivial_gauge(ComplexMatrix::zeros(2, 2), vec![l.clone()], &tol()).unwrap();
        let mu = c(0.6, 0.8);
        let w = NoiseChange::new(dmatrix![mu], &tol()).unwrap();
        let out = apply_noise_change(&q, &w).unwrap();
        assert!((&out.l0()[0] - l * mu.conj()).norm() < 1e-15);
        let same = apply_noise_change(&q, &NoiseChange::identity(1)).unwrap();
        assert_eq!(same, q);
    }

    #[test]
    fn composition_order() {
        let l1 = emission();
        let l2 = dmatrix![c(0.0, 1.0), c(0.0, 0.0); c(0.0, 0.0), c(2.0, 0.0)];
        let s = dmatrix![
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0);
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0);
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0);
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)
        ];
        let q = QleCoefficients::new(ComplexMatrix::zeros(2, 2), vec![l1, l2], s, &tol()).unwrap();
        let (a, b) = (0.3f64, 1.1f64);
        let w1 = NoiseChange::new(dmatrix![c(a.cos(), 0.0), c(0.0, a.sin()); c(0.0, a.sin()), c(a.cos(), 0.0)], &tol())
            .unwrap();
        let w2 = NoiseChange::new(dmatrix![c(b.cos(), 0.0), c(-b.sin(), 0.0); c(b.sin(), 0.0), c(b.cos(), 0.0)], &tol())
            .unwrap();
        let direct = apply_noise_change(&q, &w1.then(&w2)).unwrap();
        let stepwise = apply_noise_change(&apply_noise_change(&q, &w1).unwrap(), &w2).unwrap();
        assert!((direct.gauge() - stepwise.gauge()).norm() < 1e-14);
        for (x, y) in direct.l0().iter().zip(stepwise.l0()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_unitary_noise_change() {
        assert!(matches!(
            NoiseChange::new(dmatrix![c(2.0, 0.0)], &tol()),
            Err(ModelError::NoiseChangeNotUnitary { .. })
        ));
    }
}
