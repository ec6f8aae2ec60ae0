use nalgebra::{dmatrix, Complex};
use qle_core::classify::{classify_d1, to_classical_form, D1Verdict};
use qle_core::decompose::decompose;
use qle_core::lindblad::{from_coefficients, semigroup_apply};
use qle_core::matrix::ComplexMatrix;
use qle_core::model::QleCoefficients;
use qle_core::Tolerance;

type C = Complex<f32>;

fn c(re: f32) -> C {
    C::new(re, 0.0)
}

fn tol() -> Tolerance<f32> {
    Tolerance::uniform(1e-5).unwrap()
}

#[test]
fn flip_noise_in_single_precision() {
    let sx: ComplexMatrix<f32> = dmatrix![c(0.0), c(1.0); c(1.0), c(0.0)];
    let l = (&sx - ComplexMatrix::identity(2, 2)) * c(1.5);
    let q = QleCoefficients::new(ComplexMatrix::zeros(2, 2), vec![l.clone()], sx.clone(), &tol()).unwrap();
    match classify_d1(&l, &sx, &tol()) {
        D1Verdict::Poisson { lambda } => assert!((lambda - c(1.5)).norm() < 1e-5),
        other => panic!("{other:?}"),
    }
    let cf = to_classical_form(&q, &tol()).unwrap();
    assert!((cf.poisson[0].rho - 1.5).abs() < 1e-5);
    let sz: ComplexMatrix<f32> = dmatrix![c(1.0), c(0.0); c(0.0), c(-1.0)];
    let g = from_coefficients(&q, &tol()).unwrap();
    let p = semigroup_apply(&g, &sz, 0.5);
    // rate ρ² = 2.25, ℒ(σ_z) = −2ρ²σ_z
    assert!((p[(0, 0)].re - (-2.25f32).exp()).abs() < 1e-5);
}

#[test]
fn emission_in_single_precision() {
    let lowering: ComplexMatrix<f32> = dmatrix![c(0.0), c(1.0); c(0.0), c(0.0)];
    let q = QleCoefficients::with_trivial_gauge(ComplexMatrix::zeros(2, 2), vec![lowering], &tol()).unwrap();
    assert!(to_classical_form(&q, &tol()).is_err());
    assert_eq!(decompose(&q, &tol(), 100).unwrap().kc_dim(), 0);
}
