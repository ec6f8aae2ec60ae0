//! Random instances for property tests and benchmarks.

use nalgebra::{Complex, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::{hermitian_part, matrix_exp, ComplexMatrix, Tolerance};
use crate::model::{apply_noise_change, NoiseChange, QleCoefficients};

type CM = ComplexMatrix<f64>;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CM {
    CM::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CM {
    hermitian_part(&random_matrix(rng, n, n))
}

/// Anti-Hermitian matrix `iK`, `K` random Hermitian.
pub fn random_skew_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CM {
    random_hermitian(rng, n) * Complex::i()
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CM {
    let qr = random_matrix(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let z = r[(j, j)];
        let norm = z.norm();
        if norm > 0.0 {
            let phase = z / norm;
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Unitary `exp(iK)` with `K` random Hermitian scaled by `spread`.
pub fn random_unitary_exp<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> CM {
    matrix_exp(&(random_hermitian(rng, n) * Complex::new(0.0, spread))).expect("square")
}

/// `U diag(z) U*` with Haar `U` and Gaussian eigenvalues.
pub fn random_normal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CM {
    let u = haar_unitary(rng, n);
    let d = DVector::from_fn(n, |_, _| gaussian(rng));
    &u * CM::from_diagonal(&d) * u.adjoint()
}

/// Diagonal unitary with uniformly random phases.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CM {
    let d = DVector::from_fn(n, |_, _| {
        let t: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        Complex::from_polar(1.0, t)
    });
    CM::from_diagonal(&d)
}

/// Symmetric unitary `Qᵗ D Q` with `Q` Haar and `D` random diagonal phases.
pub fn random_symmetric_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CM {
    let q = haar_unitary(rng, n);
    q.transpose() * random_phases(rng, n) * &q
}

/// Generic coefficients: Hermitian `H`, Gaussian `L⁰_i`, `𝕊 = exp(iK)`.
pub fn random_coefficients<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> QleCoefficients<f64> {
    let h = random_hermitian(rng, n);
    let l0 = (0..d).map(|_| random_matrix(rng, n, n)).collect();
    let s = random_unitary_exp(rng, n * d, 1.0);
    QleCoefficients::with_dims(n, d, h, l0, s, &Tolerance::default()).expect("valid by construction")
}

/// Data of a classical equation written in its classical basis: Wiener
/// directions first, then Poisson directions (`ρ = 0` means gauge-only).
#[derive(Debug, Clone)]
pub struct ClassicalSample {
    pub hamiltonian: CM,
    pub brownian: Vec<CM>,
    pub poisson: Vec<(f64, CM)>,
}

impl ClassicalSample {
    pub fn d(&self) -> usize {
        self.brownian.len() + self.poisson.len()
    }

    /// Coefficients in the classical basis.
    pub fn coefficients(&self) -> QleCoefficients<f64> {
        let n = self.hamiltonian.nrows();
        let d = self.d();
        let mut l0 = self.brownian.clone();
        let mut gauge = CM::identity(n * d, n * d);
        for (k, (rho, s)) in self.poisson.iter().enumerate() {
            let idx = self.brownian.len() + k;
            l0.push((s - CM::identity(n, n)) * Complex::new(*rho, 0.0));
            gauge.view_mut((idx * n, idx * n), (n, n)).copy_from(s);
        }
        QleCoefficients::with_dims(n, d, self.hamiltonian.clone(), l0, gauge, &Tolerance::default())
            .expect("valid by construction")
    }

    /// The same equation seen through the noise change `w`.
    pub fn scrambled(&self, w: &CM) -> QleCoefficients<f64> {
        let change = NoiseChange::new(w.clone(), &Tolerance::default()).expect("unitary");
        apply_noise_change(&self.coefficients(), &change).expect("matching dimension")
    }
}

/// Random classical data: anti-Hermitian Brownian coefficients, Poisson
/// directions with random `ρ ∈ [0.2, 2]` and distinct random unitary `S_k`.
/// Brownian coefficients are multiplied by random phases so the Wiener
/// sector is classical only up to a noise change.
pub fn random_classical<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    n_brownian: usize,
    n_poisson: usize,
) -> ClassicalSample {
    let brownian = (0..n_brownian)
        .map(|_| {
            let t: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            random_skew_hermitian(rng, n) * Complex::from_polar(1.0, t)
        })
        .collect();
    let poisson = (0..n_poisson)
        .map(|_| {
            let rho = rng.random_range(0.2..2.0);
            (rho, random_unitary_exp(rng, n, 1.0))
        })
        .collect();
    ClassicalSample { hamiltonian: random_hermitian(rng, n), brownian, poisson }
}
