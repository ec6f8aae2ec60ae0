//! Levenberg–Marquardt search for `r` orthonormal noise directions whose
//! restricted creation coefficients have matching Gram matrices.
//!
//! The unknown is a unitary `Q = Q₀ exp(X)` with `X` anti-Hermitian; only its
//! first `r` columns enter the residual. Each accepted step is folded into
//! `Q₀` so the Jacobian is always taken at `X = 0`. Restarts draw `Q₀` from
//! the Haar measure with a seeded generator.

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::classify::gram_vectors;
use crate::matrix::{matrix_exp, ComplexMatrix, Tolerance};
use crate::scalar::{lit, to_f64, Real};

const STEPS_PER_RESTART: usize = 200;

#[derive(Debug, Clone)]
pub struct SearchOutcome<T: Real> {
    /// `k × r` orthonormal columns, when the residual reached the target.
    pub basis: Option<ComplexMatrix<T>>,
    /// Best Gram mismatch seen.
    pub residual: f64,
    pub iterations: usize,
    pub restarts: usize,
}

fn haar<T: Real>(rng: &mut ChaCha8Rng, k: usize) -> ComplexMatrix<T> {
    let g = ComplexMatrix::<T>::from_fn(k, k, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(lit(re), lit(im))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..k {
        let d = r[(j, j)];
        let m = nalgebra::ComplexField::modulus(d);
        if m > T::zero() {
            let phase = d / Complex::new(m, T::zero());
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Anti-Hermitian matrix with `k²` real coordinates.
fn generator<T: Real>(theta: &DVector<T>, k: usize) -> ComplexMatrix<T> {
    let mut x = ComplexMatrix::zeros(k, k);
    let mut at = 0;
    for a in 0..k {
        x[(a, a)] = Complex::new(T::zero(), theta[at]);
        at += 1;
        for b in a + 1..k {
            let z = Complex::new(theta[at], theta[at + 1]);
            at += 2;
            x[(a, b)] = z;
            x[(b, a)] = -z.conj();
        }
    }
    x
}

struct Problem<T: Real> {
    u: ComplexMatrix<T>,
    v: ComplexMatrix<T>,
    r: usize,
}

impl<T: Real> Problem<T> {
    fn residual(&self, q: &ComplexMatrix<T>) -> DVector<T> {
        let q_r = q.columns(0, self.r);
        let ur = q_r.adjoint() * &self.u;
        let vr = q_r.transpose() * &self.v;
        let m = ur.adjoint() * &ur - vr.adjoint() * &vr;
        let len = m.len();
        DVector::from_fn(2 * len, |i, _| if i < len { m[i].re } else { m[i - len].im })
    }
}

/// Looks for `dim` orthonormal directions in `C^k` (`k = l0.len()`) on which
/// the Gram matrices of the creation coefficients agree.
pub fn search_wiener_subspace<T: Real>(
    l0: &[ComplexMatrix<T>],
    dim: usize,
    budget: usize,
    seed: u64,
    tol: &Tolerance<T>,
) -> SearchOutcome<T> {
    let k = l0.len();
    let mut outcome = SearchOutcome { basis: None, residual: f64::INFINITY, iterations: 0, restarts: 0 };
    if dim == 0 || dim > k {
        return outcome;
    }
    let (u, v) = gram_vectors(l0);
    let problem = Problem { u, v, r: dim };
    let target = tol.bound(T::one()) * lit(0.1);
    let step = T::default_epsilon().sqrt();
    let params = k * k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    while outcome.iterations < budget {
        let mut q = haar::<T>(&mut rng, k);
        let mut res = problem.residual(&q);
        let mut damping: T = lit(1e-3);
        let mut local = 0;
        while local < STEPS_PER_RESTART && outcome.iterations < budget {
            let norm = res.norm();
            outcome.residual = outcome.residual.min(to_f64(norm));
            if norm <= target {
                outcome.basis = Some(q.columns(0, dim).into_owned());
                return outcome;
            }
            outcome.iterations += 1;
            local += 1;
            let mut jac = DMatrix::<T>::zeros(res.len(), params);
            for p in 0..params {
                let mut e = DVector::zeros(params);
                e[p] = step;
                let moved = &q * matrix_exp(&generator(&e, k)).expect("square");
                let col = (problem.residual(&moved) - &res) / step;
                jac.set_column(p, &col);
            }
            let jtj = jac.transpose() * &jac;
            let grad = jac.transpose() * &res;
            let mut accepted = false;
            while damping < lit(1e10) {
                let mut lhs = jtj.clone();
                for i in 0..params {
                    lhs[(i, i)] += damping * (T::one() + jtj[(i, i)]);
                }
                let Some(delta) = lhs.lu().solve(&(-&grad)) else {
                    damping *= lit(4.0);
                    continue;
                };
                let trial = &q * matrix_exp(&generator(&delta, k)).expect("square");
                let trial_res = problem.residual(&trial);
                if trial_res.norm() < norm {
                    q = trial;
                    res = trial_res;
                    damping = (damping / lit(3.0)).max(lit(1e-12));
                    accepted = true;
                    break;
                }
                damping *= lit(4.0);
            }
            if !accepted {
                break;
            }
        }
        outcome.restarts += 1;
    }
    outcome
}
