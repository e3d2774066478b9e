#![allow(dead_code)]

use bosefield::spectral::{decompose, CouplingMatrix, SpectralModel};
use bosefield::ComplexAmplitude;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// AᵀA + shift·I with Gaussian A.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| normal(rng));
    a.transpose() * a + DMatrix::identity(n, n) * shift
}

pub fn random_model(rng: &mut ChaCha8Rng, n: usize) -> SpectralModel {
    decompose(&CouplingMatrix::new(random_spd(rng, n, 0.5)).unwrap()).unwrap()
}

pub fn model(rows: &[Vec<f64>]) -> SpectralModel {
    decompose(&CouplingMatrix::from_rows(rows).unwrap()).unwrap()
}

pub fn coupled_pair() -> SpectralModel {
    model(&[vec![2.0, 1.0], vec![1.0, 2.0]])
}

pub fn diagonal_pair() -> SpectralModel {
    model(&[vec![2.0, 0.0], vec![0.0, 3.0]])
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(rng))
}

pub fn random_amplitude(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> ComplexAmplitude {
    let v = DVector::from_fn(n, |_, _| Complex64::new(normal(rng), normal(rng)));
    let scale = norm / v.norm();
    ComplexAmplitude(v * Complex64::from(scale))
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Unitary factor of the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(normal(rng), normal(rng)));
    g.qr().q()
}

pub fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, c| a.max(c.norm()))
}
