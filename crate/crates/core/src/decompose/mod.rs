//! Splitting the noise space into a maximal classical part `Kc` and its
//! purely quantum complement `Kq`.
//!
//! Candidate subspaces must be invariant under the gauge, so their projections
//! lie in the commutant of the gauge's noise factor. The commutant is a direct
//! sum over the minimal projections of its center; on each such block `K_α`
//! the gauge acts either as `S_α ⊗ I` (every subspace of `K_α` is invariant)
//! or with a noncommutative multiplicity part, in which case no nonzero
//! subspace of `K_α` is classical. Blocks of the first kind are analysed
//! exactly when `S_α ≠ I` (the classical directions form the linear subspace
//! whose coefficients lie on the ray `C·(S_α − I)`). The block with `S_α = I`
//! carries Wiener directions, where the classical subspaces are the
//! complexified isotropic subspaces of a presymplectic real space; a maximal
//! one is constructed directly, with a randomized local search as fallback.

mod search;

pub use search::{search_wiener_subspace, SearchOutcome};

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

use crate::algebra::{commutant, is_wiener_block};
use crate::classify::{to_classical_form, ClassicalForm, ClassifyError};
use crate::matrix::{
    block, hermitian_eig, noise_lift, nullspace, simultaneous_diagonalize, svd, ComplexMatrix,
    LinalgError, Tolerance,
};
use crate::model::{apply_noise_change, ModelError, NoiseChange, QleCoefficients};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error("subsystem basis is empty")]
    EmptyBasis,
    #[error("subsystem basis is not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },
    #[error("basis vectors have length {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    /// Maximal over all invariant subspaces.
    Exact,
    /// Sound, maximal in dimension when `wiener.maximal` says so.
    Heuristic,
}

/// Outcome of [`subsystem_test`].
#[derive(Debug, Clone)]
pub struct SubsystemCertificate<T: Real> {
    /// `‖B*B − I‖` for the basis `B`.
    pub orthonormality: f64,
    /// `max(‖[P ⊗ I, 𝕊]‖, ‖[P ⊗ I, 𝕊*]‖)` for the projection `P` onto the span.
    pub gauge_commutator: f64,
    pub invariant: bool,
    /// Classical form of the restricted equation, when it exists.
    pub classical_form: Option<ClassicalForm<T>>,
    /// Why the restricted equation is not classical.
    pub failure: Option<String>,
}

impl<T: Real> SubsystemCertificate<T> {
    pub fn passed(&self) -> bool {
        self.invariant && self.classical_form.is_some()
    }

    /// Largest residual among the checks that ran.
    pub fn max_residual(&self) -> f64 {
        let classical = self.classical_form.as_ref().map_or(0.0, |cf| cf.residuals.max());
        self.orthonormality.max(self.gauge_commutator).max(classical)
    }
}

/// Unitary whose first columns are the orthonormal columns of `basis`.
pub fn complete_basis<T: Real>(basis: &ComplexMatrix<T>, tol: &Tolerance<T>) -> ComplexMatrix<T> {
    let (d, r) = basis.shape();
    if r == 0 {
        return ComplexMatrix::identity(d, d);
    }
    let rest = nullspace(&basis.adjoint(), tol);
    let mut q = ComplexMatrix::zeros(d, d);
    q.columns_mut(0, r).copy_from(basis);
    q.columns_mut(r, rest.ncols().min(d - r)).copy_from(&rest.columns(0, rest.ncols().min(d - r)));
    q
}

fn orthonormality_defect<T: Real>(basis: &ComplexMatrix<T>) -> T {
    let r = basis.ncols();
    (basis.adjoint() * basis - ComplexMatrix::identity(r, r)).norm()
}

fn gauge_commutator<T: Real>(c: &QleCoefficients<T>, basis: &ComplexMatrix<T>) -> T {
    let p = noise_lift(&(basis * basis.adjoint()), c.n());
    let s = c.gauge();
    let s_adj = s.adjoint();
    (&p * s - s * &p).norm().max((&p * &s_adj - &s_adj * &p).norm())
}

/// The equation restricted to the noise directions spanned by `basis`, with
/// `H := 0`. Fails when the span is not invariant under the gauge.
pub fn restrict<T: Real>(
    c: &QleCoefficients<T>,
    basis: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<QleCoefficients<T>, ModelError> {
    let (n, r) = (c.n(), basis.ncols());
    let q = complete_basis(basis, tol);
    let change = NoiseChange::new(q, &tol.scaled(lit(100.0)))?;
    let moved = apply_noise_change(c, &change)?;
    let gauge = moved.gauge().view((0, 0), (r * n, r * n)).into_owned();
    QleCoefficients::with_dims(
        n,
        r,
        ComplexMatrix::zeros(n, n),
        moved.l0()[..r].to_vec(),
        gauge,
        &tol.scaled(lit(10.0)),
    )
}

/// Whether the span of the orthonormal columns of `basis` is a commutative
/// subsystem: invariant under `𝕊` and `𝕊*`, and classical once restricted.
pub fn subsystem_test<T: Real>(
    c: &QleCoefficients<T>,
    basis: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<SubsystemCertificate<T>, DecomposeError> {
    if basis.ncols() == 0 {
        return Err(DecomposeError::EmptyBasis);
    }
    if basis.nrows() != c.d() {
        return Err(DecomposeError::Dimension { expected: c.d(), found: basis.nrows() });
    }
    let ortho = orthonormality_defect(basis);
    if !tol.accepts(ortho, lit::<T>(basis.ncols() as f64).sqrt()) {
        return Err(DecomposeError::NotOrthonormal { residual: to_f64(ortho) });
    }
    let commutator = gauge_commutator(c, basis);
    let invariant = tol.accepts(commutator, lit::<T>((c.n() * c.d()) as f64).sqrt());
    let mut cert = SubsystemCertificate {
        orthonormality: to_f64(ortho),
        gauge_commutator: to_f64(commutator),
        invariant,
        classical_form: None,
        failure: None,
    };
    if !invariant {
        cert.failure = Some("span is not invariant under the gauge".into());
        return Ok(cert);
    }
    let restricted = match restrict(c, basis, tol) {
        Ok(r) => r,
        Err(e) => {
            cert.failure = Some(e.to_string());
            return Ok(cert);
        }
    };
    match to_classical_form(&restricted, tol) {
        Ok(cf) => cert.classical_form = Some(cf),
        Err(ClassifyError::Linalg(e)) => return Err(e.into()),
        Err(e) => cert.failure = Some(e.to_string()),
    }
    Ok(cert)
}

/// Orthonormal bases of the minimal central blocks of the commutant, in a
/// deterministic order. Together they form an orthonormal basis of `K`.
pub fn invariant_block_structure<T: Real>(
    c: &QleCoefficients<T>,
    tol: &Tolerance<T>,
) -> Result<Vec<ComplexMatrix<T>>, DecomposeError> {
    let d = c.d();
    if d == 0 {
        return Ok(Vec::new());
    }
    let comm = commutant(c.gauge(), c.n(), d, tol)?;
    let m = comm.len();
    if m == d * d {
        return Ok(vec![ComplexMatrix::identity(d, d)]);
    }
    // center: combinations Σ a_i B_i commuting with every B_j
    let mut map = ComplexMatrix::<T>::zeros(m * d * d, m);
    for (i, bi) in comm.iter().enumerate() {
        for (j, bj) in comm.iter().enumerate() {
            let k = bi * bj - bj * bi;
            map.view_mut((j * d * d, i), (d * d, 1)).copy_from_slice(k.as_slice());
        }
    }
    let coeffs = nullspace(&map, tol);
    let center: Vec<ComplexMatrix<T>> = coeffs
        .column_iter()
        .map(|a| {
            let mut z = ComplexMatrix::zeros(d, d);
            for (ai, bi) in a.iter().zip(&comm) {
                z += bi * *ai;
            }
            z
        })
        .collect();
    if center.len() <= 1 {
        return Ok(vec![ComplexMatrix::identity(d, d)]);
    }
    let w = simultaneous_diagonalize(&center, tol)?;
    let keys: Vec<Vec<Complex<T>>> = (0..d)
        .map(|j| {
            let col = w.column(j);
            center.iter().map(|z| (col.adjoint() * z * col)[(0, 0)]).collect()
        })
        .collect();
    let threshold = tol.bound(T::one()).sqrt();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..d {
        let found = groups.iter_mut().find(|g| {
            keys[g[0]].iter().zip(&keys[j]).all(|(a, b)| (a - b).norm_sqr().sqrt() <= threshold)
        });
        match found {
            Some(g) => g.push(j),
            None => groups.push(vec![j]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| ComplexMatrix::from_fn(d, g.len(), |r, k| w[(r, g[k])]))
        .collect())
}

/// How the gauge acts on one central block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// `𝕊 = I` on the block.
    Wiener,
    /// `𝕊 = S_α ⊗ I` with `S_α ≠ I`.
    Poisson,
    /// Noncommutative multiplicity: no classical directions.
    Quantum,
}

#[derive(Debug, Clone)]
pub struct BlockReport {
    pub dim: usize,
    pub kind: BlockKind,
    pub classical_dim: usize,
}

/// Classical directions found inside the Wiener block.
#[derive(Debug, Clone)]
pub struct WienerReport {
    pub block_dim: usize,
    /// Largest possible dimension of a classical subspace of the block.
    pub bound: usize,
    pub found: usize,
    /// `found == bound`.
    pub maximal: bool,
    /// Whether the classical subspace of largest dimension is unique.
    pub unique: bool,
    /// `true` when the local search produced the subspace.
    pub searched: bool,
    pub search_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct DecompositionCertificate<T: Real> {
    pub blocks: Vec<BlockReport>,
    pub wiener: Option<WienerReport>,
    /// `‖Q*Q − I‖` for `Q = [Kc | Kq]`.
    pub orthonormality: f64,
    /// Verification of `Kc` (absent when `Kc = {0}`).
    pub classical: Option<SubsystemCertificate<T>>,
    /// `max(‖[P_q ⊗ I, 𝕊]‖, ‖[P_q ⊗ I, 𝕊*]‖)` for the projection onto `Kq`.
    pub quantum_gauge_commutator: f64,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult<T: Real> {
    /// `d × dim Kc`, orthonormal columns.
    pub kc_basis: ComplexMatrix<T>,
    /// `d × dim Kq`, orthonormal columns.
    pub kq_basis: ComplexMatrix<T>,
    /// Classical form of the equation restricted to `Kc` (with `H = 0`); its
    /// noise change acts on the coordinates of `kc_basis`.
    pub classical_part: Option<ClassicalForm<T>>,
    /// Restriction to `Kq` with `H = 0`.
    pub quantum_part: Option<QleCoefficients<T>>,
    pub hamiltonian: ComplexMatrix<T>,
    pub tier: Tier,
    pub certificate: DecompositionCertificate<T>,
}

impl<T: Real> DecompositionResult<T> {
    pub fn kc_dim(&self) -> usize {
        self.kc_basis.ncols()
    }

    pub fn kq_dim(&self) -> usize {
        self.kq_basis.ncols()
    }

    /// Noise basis `[classical directions | Kq basis]`, the classical
    /// directions being those of `classical_part`.
    pub fn noise_change(&self) -> ComplexMatrix<T> {
        let d = self.kc_dim() + self.kq_dim();
        let kc = match &self.classical_part {
            Some(cf) => &self.kc_basis * cf.noise_change.matrix(),
            None => self.kc_basis.clone(),
        };
        let mut w = ComplexMatrix::zeros(d, d);
        w.columns_mut(0, kc.ncols()).copy_from(&kc);
        w.columns_mut(kc.ncols(), self.kq_dim()).copy_from(&self.kq_basis);
        w
    }
}

/// Orthonormal columns `conj(ker M)` where column `j` of `M` is the part of
/// `vec(L_j)` orthogonal to `vec(S − I)`.
fn poisson_classical_directions<T: Real>(
    l0: &[ComplexMatrix<T>],
    s: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> ComplexMatrix<T> {
    let n = s.nrows();
    let diff = s - ComplexMatrix::identity(n, n);
    let dv = nalgebra::DVector::from_column_slice(diff.as_slice());
    let dn = dv.norm_squared();
    let cols: Vec<nalgebra::DVector<Complex<T>>> = l0
        .iter()
        .map(|l| {
            let v = nalgebra::DVector::from_column_slice(l.as_slice());
            let proj = dv.dotc(&v) / Complex::new(dn, T::zero());
            &v - &dv * proj
        })
        .collect();
    let m = ComplexMatrix::from_columns(&cols);
    let scale = T::one().max(l0.iter().fold(T::zero(), |acc, l| acc.max(l.norm())));
    let rel = Tolerance { abs_eps: tol.abs_eps / scale, rel_eps: tol.rel_eps };
    nullspace(&m, &rel).map(|z| z.conj())
}

/// Real nullspace of a real matrix, as orthonormal columns.
fn real_nullspace<T: Real>(a: &DMatrix<T>, tol: &Tolerance<T>) -> DMatrix<T> {
    let (m, n) = a.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m == 0 || a.iter().all(|x| *x == T::zero()) {
        return DMatrix::identity(n, n);
    }
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let s = padded.svd(false, true);
    let vt = s.v_t.expect("requested V");
    let max = s.singular_values.iter().fold(T::zero(), |acc, x| acc.max(*x));
    let cols: Vec<usize> = (0..n).filter(|&i| s.singular_values[i] <= tol.bound(max)).collect();
    DMatrix::from_fn(n, cols.len(), |r, k| vt[(cols[k], r)])
}

/// Hermitian-coefficient directions `V_H = {b : Σ conj(b_j) L_j Hermitian}`
/// as a real basis of `R^{2k}` (real parts then imaginary parts), and the
/// form `ω(x, y) = Im⟨x, y⟩` on it.
fn hermitian_directions<T: Real>(
    l0: &[ComplexMatrix<T>],
    tol: &Tolerance<T>,
) -> (DMatrix<T>, DMatrix<T>) {
    let k = l0.len();
    let n = l0[0].nrows();
    let mut a = DMatrix::<T>::zeros(2 * n * n, 2 * k);
    let i = Complex::new(T::zero(), T::one());
    for (j, l) in l0.iter().enumerate() {
        let x_col = l - l.adjoint();
        let y_col = (l + l.adjoint()) * (-i);
        for (col, m) in [(j, x_col), (k + j, y_col)] {
            for (idx, z) in m.iter().enumerate() {
                a[(idx, col)] = z.re;
                a[(n * n + idx, col)] = z.im;
            }
        }
    }
    let scale = T::one().max(l0.iter().fold(T::zero(), |acc, l| acc.max(l.norm())));
    let rel = Tolerance { abs_eps: tol.abs_eps / scale, rel_eps: tol.rel_eps };
    let basis = real_nullspace(&a, &rel);
    let h = basis.ncols();
    let to_complex = |col: usize| -> nalgebra::DVector<Complex<T>> {
        nalgebra::DVector::from_fn(k, |r, _| Complex::new(basis[(r, col)], basis[(k + r, col)]))
    };
    let vecs: Vec<_> = (0..h).map(to_complex).collect();
    let omega = DMatrix::from_fn(h, h, |p, q| vecs[p].dotc(&vecs[q]).im);
    (basis, omega)
}

/// A maximal classical subspace of a Wiener block, by isotropic
/// construction. Returns the basis (block coordinates), the dimension bound
/// and whether the maximal subspace is unique.
fn isotropic_wiener_subspace<T: Real>(
    l0: &[ComplexMatrix<T>],
    tol: &Tolerance<T>,
) -> Result<(ComplexMatrix<T>, usize, bool), DecomposeError> {
    let k = l0.len();
    let (basis, omega) = hermitian_directions(l0, tol);
    let h = basis.ncols();
    if h == 0 {
        return Ok((ComplexMatrix::zeros(k, 0), 0, true));
    }
    let loose = tol.scaled(lit(1e3));
    // radical of ω, then one vector from each symplectic plane
    let radical = real_nullspace(&omega, &loose);
    let i_omega = omega.map(|x| Complex::new(T::zero(), x));
    let (values, vectors) = hermitian_eig(&i_omega, &tol.scaled(lit(100.0)))?;
    let threshold = loose.bound(T::one().max(omega.norm()));
    let mut picked: Vec<nalgebra::DVector<T>> = radical.column_iter().map(|c| c.into_owned()).collect();
    for (idx, &mu) in values.iter().enumerate() {
        if mu > threshold {
            let z = vectors.column(idx);
            let re = nalgebra::DVector::from_fn(h, |r, _| z[r].re);
            let norm = re.norm();
            if norm > T::zero() {
                picked.push(re / norm);
            }
        }
    }
    let bound = h - (h - radical.ncols()) / 2;
    picked.truncate(bound);
    let real_vectors: Vec<nalgebra::DVector<T>> = picked.iter().map(|p| &basis * p).collect();
    let complex = ComplexMatrix::from_fn(k, real_vectors.len(), |r, c| {
        Complex::new(real_vectors[c][r], real_vectors[c][k + r])
    });
    let unique = radical.ncols() == h;
    Ok((orthonormalize(&complex), bound, unique))
}

/// Closest matrix with orthonormal columns (`A (A*A)^{-1/2}`).
fn orthonormalize<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    if a.ncols() == 0 {
        return a.clone();
    }
    let s = svd(a);
    &s.u * &s.v_adjoint
}

fn concat_columns<T: Real>(d: usize, parts: &[ComplexMatrix<T>]) -> ComplexMatrix<T> {
    let total = parts.iter().map(|p| p.ncols()).sum();
    let mut out = ComplexMatrix::zeros(d, total);
    let mut at = 0;
    for p in parts {
        out.columns_mut(at, p.ncols()).copy_from(p);
        at += p.ncols();
    }
    out
}

/// Splits `K = Kc ⊕ Kq`. `search_budget` bounds the iterations of the local
/// search used when the direct construction in the Wiener block cannot be
/// verified.
pub fn decompose<T: Real>(
    c: &QleCoefficients<T>,
    tol: &Tolerance<T>,
    search_budget: usize,
) -> Result<DecompositionResult<T>, DecomposeError> {
    let (n, d) = (c.n(), c.d());
    let blocks = invariant_block_structure(c, tol)?;
    let mut reports = Vec::with_capacity(blocks.len());
    let mut poisson_parts: Vec<ComplexMatrix<T>> = Vec::new();
    let mut wiener_part: Option<ComplexMatrix<T>> = None;
    let mut wiener_report = None;
    let mut tier = Tier::Exact;

    for b in &blocks {
        let k = b.ncols();
        let change = NoiseChange::new(complete_basis(b, tol), &tol.scaled(lit(100.0)))?;
        let moved = apply_noise_change(c, &change)?;
        let s0 = block(moved.gauge(), 0, 0, n);
        let mut scalar_multiplicity = true;
        for i in 0..k {
            for j in 0..k {
                let blk = block(moved.gauge(), i, j, n);
                let expected = if i == j { s0.clone() } else { ComplexMatrix::zeros(n, n) };
                if !tol.accepts((blk - expected).norm(), lit::<T>(n as f64).sqrt()) {
                    scalar_multiplicity = false;
                }
            }
        }
        let l0 = &moved.l0()[..k];
        if !scalar_multiplicity {
            reports.push(BlockReport { dim: k, kind: BlockKind::Quantum, classical_dim: 0 });
        } else if is_wiener_block(&s0, tol) {
            let (part, report) = wiener_block(c, b, l0, tol, search_budget)?;
            if report.as_ref().is_some() {
                tier = Tier::Heuristic;
            }
            reports.push(BlockReport { dim: k, kind: BlockKind::Wiener, classical_dim: part.ncols() });
            wiener_report = report;
            wiener_part = Some(part);
        } else {
            let local = poisson_classical_directions(l0, &s0, tol);
            let part = b * local;
            reports.push(BlockReport { dim: k, kind: BlockKind::Poisson, classical_dim: part.ncols() });
            poisson_parts.push(part);
        }
    }

    let mut parts = poisson_parts.clone();
    if let Some(w) = &wiener_part {
        parts.push(w.clone());
    }
    let mut kc = concat_columns(d, &parts);
    let mut classical_cert = None;
    if kc.ncols() > 0 {
        let cert = subsystem_test(c, &kc, tol)?;
        if cert.passed() {
            classical_cert = Some(cert);
        } else {
            // keep the exactly characterised Poisson part only
            kc = concat_columns(d, &poisson_parts);
            for r in reports.iter_mut().filter(|r| r.kind == BlockKind::Wiener) {
                r.classical_dim = 0;
            }
            if let Some(w) = wiener_report.as_mut() {
                w.found = 0;
                w.maximal = w.bound == 0;
            }
            if kc.ncols() > 0 {
                let cert = subsystem_test(c, &kc, tol)?;
                if cert.passed() {
                    classical_cert = Some(cert);
                } else {
                    kc = ComplexMatrix::zeros(d, 0);
                }
            }
        }
    }

    let kq = if kc.ncols() == 0 {
        ComplexMatrix::identity(d, d)
    } else {
        let rest = complete_basis(&kc, tol);
        rest.columns(kc.ncols(), d - kc.ncols()).into_owned()
    };
    let full = concat_columns(d, &[kc.clone(), kq.clone()]);
    let orthonormality = orthonormality_defect(&full);
    let quantum_part = if kq.ncols() > 0 { Some(restrict(c, &kq, tol)?) } else { None };
    let quantum_commutator = if kq.ncols() > 0 { to_f64(gauge_commutator(c, &kq)) } else { 0.0 };
    let classical_part = classical_cert.as_ref().and_then(|cert| cert.classical_form.clone());

    Ok(DecompositionResult {
        kc_basis: kc,
        kq_basis: kq,
        classical_part,
        quantum_part,
        hamiltonian: c.hamiltonian().clone(),
        tier,
        certificate: DecompositionCertificate {
            blocks: reports,
            wiener: wiener_report,
            orthonormality: to_f64(orthonormality),
            classical: classical_cert,
            quantum_gauge_commutator: quantum_commutator,
        },
    })
}

/// Classical directions of the Wiener block `b` (columns in `K`
/// coordinates). The report is present when the block needed the
/// construction or search, i.e. when it is neither fully classical nor a
/// single direction.
fn wiener_block<T: Real>(
    c: &QleCoefficients<T>,
    b: &ComplexMatrix<T>,
    l0: &[ComplexMatrix<T>],
    tol: &Tolerance<T>,
    search_budget: usize,
) -> Result<(ComplexMatrix<T>, Option<WienerReport>), DecomposeError> {
    let k = b.ncols();
    let d = c.d();
    let whole = subsystem_test(c, b, tol)?;
    if whole.passed() {
        return Ok((b.clone(), None));
    }
    if k == 1 {
        return Ok((ComplexMatrix::zeros(d, 0), None));
    }
    let (local, bound, unique) = isotropic_wiener_subspace(l0, tol)?;
    let mut report = WienerReport {
        block_dim: k,
        bound,
        found: 0,
        maximal: bound == 0,
        unique,
        searched: false,
        search_iterations: 0,
    };
    if local.ncols() > 0 {
        let candidate = b * &local;
        if subsystem_test(c, &candidate, tol)?.passed() {
            report.found = candidate.ncols();
            report.maximal = report.found == bound;
            return Ok((candidate, Some(report)));
        }
    }
    let target = bound.min(k - 1);
    let mut spent = 0;
    for dim in (1..=target).rev() {
        if spent >= search_budget {
            break;
        }
        let outcome = search_wiener_subspace(l0, dim, search_budget - spent, 0x5eed_0000 + dim as u64, tol);
        spent += outcome.iterations;
        if let Some(local) = outcome.basis {
            let candidate = b * local;
            if subsystem_test(c, &candidate, tol)?.passed() {
                report.found = dim;
                report.maximal = dim == bound;
                report.searched = true;
                report.search_iterations = spent;
                return Ok((candidate, Some(report)));
            }
        }
    }
    report.searched = true;
    report.search_iterations = spent;
    Ok((ComplexMatrix::zeros(d, 0), Some(report)))
}

/// Largest dimension of a classical subspace of a noise space with trivial
/// gauge and creation coefficients `l0`.
pub fn wiener_dimension_bound<T: Real>(l0: &[ComplexMatrix<T>], tol: &Tolerance<T>) -> Result<usize, DecomposeError> {
    Ok(isotropic_wiener_subspace(l0, tol)?.1)
}
