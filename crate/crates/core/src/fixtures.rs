//! Named reference equations on a qubit.

use nalgebra::{dmatrix, Complex};

use crate::matrix::{noise_lift, ComplexMatrix, Tolerance};
use crate::model::QleCoefficients;

type CM = ComplexMatrix<f64>;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

pub fn pauli_x() -> CM {
    dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(1.0, 0.0), c(0.0, 0.0)]
}

pub fn pauli_y() -> CM {
    dmatrix![c(0.0, 0.0), c(0.0, -1.0); c(0.0, 1.0), c(0.0, 0.0)]
}

pub fn pauli_z() -> CM {
    dmatrix![c(1.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(-1.0, 0.0)]
}

/// `|0⟩⟨1|`, the qubit lowering operator.
pub fn lowering() -> CM {
    dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, 0.0)]
}

fn id2() -> CM {
    CM::identity(2, 2)
}

fn build(l0: Vec<CM>, gauge: CM) -> QleCoefficients<f64> {
    QleCoefficients::new(CM::zeros(2, 2), l0, gauge, &Tolerance::default()).expect("fixture is a unitary scheme")
}

/// Spontaneous emission: `L = |0⟩⟨1|`, `S = I`, `H = 0`.
pub fn spontaneous_emission() -> QleCoefficients<f64> {
    build(vec![lowering()], id2())
}

/// Amplitude damping at rate `γ`: `L = √γ |0⟩⟨1|`.
pub fn amplitude_damping(gamma: f64) -> QleCoefficients<f64> {
    build(vec![lowering() * c(gamma.sqrt(), 0.0)], id2())
}

/// `W = [[sin θ, cos θ], [−cos θ, sin θ]]`, the change of noise that splits
/// [`example_4_2`] and [`example_4_3`].
pub fn splitting_change(theta: f64) -> CM {
    let (s, co) = theta.sin_cos();
    dmatrix![c(s, 0.0), c(co, 0.0); c(-co, 0.0), c(s, 0.0)]
}

/// Two noises on a qubit: in the basis given by [`splitting_change`] the
/// first carries spontaneous emission and the second a Poisson noise with
/// `S = σ_x` and `L = λ(σ_x − I)`.
///
/// The gauge operator is `(W ⊗ I) diag(I, σ_x) (W ⊗ I)*`.
pub fn example_4_2(theta: f64, lambda: f64) -> QleCoefficients<f64> {
    let w = splitting_change(theta);
    let (s, co) = theta.sin_cos();
    let poisson = (pauli_x() - id2()) * c(lambda, 0.0);
    let l1 = lowering() * c(s, 0.0) + &poisson * c(co, 0.0);
    let l2 = lowering() * c(-co, 0.0) + &poisson * c(s, 0.0);
    let mut diag = CM::identity(4, 4);
    diag.view_mut((2, 2), (2, 2)).copy_from(&pauli_x());
    let lift = noise_lift(&w, 2);
    build(vec![l1, l2], &lift * diag * lift.adjoint())
}

/// [`example_4_2`]'s creation coefficients with `λ = 1` and `𝕊 = I`.
pub fn example_4_3(theta: f64) -> QleCoefficients<f64> {
    let (s, co) = theta.sin_cos();
    let l1 = dmatrix![c(-co, 0.0), c(co + s, 0.0); c(co, 0.0), c(-co, 0.0)];
    let l2 = dmatrix![c(-s, 0.0), c(s - co, 0.0); c(s, 0.0), c(-s, 0.0)];
    build(vec![l1, l2], CM::identity(4, 4))
}

/// Brownian noise with `L = iσ_x`.
pub fn brownian_d1() -> QleCoefficients<f64> {
    build(vec![pauli_x() * Complex::i()], id2())
}

/// Brownian noise with self-adjoint `L = σ_x`.
pub fn brownian_selfadjoint() -> QleCoefficients<f64> {
    build(vec![pauli_x()], id2())
}

/// Poisson noise with `S = σ_x` and `L = ρ(σ_x − I)`.
pub fn poisson_d1(rho: f64) -> QleCoefficients<f64> {
    build(vec![(pauli_x() - id2()) * c(rho, 0.0)], pauli_x())
}
