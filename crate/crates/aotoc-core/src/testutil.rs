//! Shared helpers for unit tests.

use crate::tensor::CMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub const ABS_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::two_by_two(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn pauli_y() -> CMatrix {
    CMatrix::two_by_two(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn pauli_z() -> CMatrix {
    CMatrix::two_by_two(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// Square matrix with iid standard-complex-Gaussian entries.
pub fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let data = (0..n * n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    CMatrix::from_vec(n, n, data)
}

/// Random mixture of two or three unitary conjugations: a generic
/// bistochastic channel for property tests.
pub fn random_mixed_unitary_channel<R: Rng>(rng: &mut R) -> crate::channel::QubitChannel {
    let m = 2 + (rng.gen::<u64>() % 2) as usize;
    let mut weights: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.1).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let kraus = weights
        .iter()
        .map(|w| crate::circuit::sample_haar_unitary(2, rng.gen()).scale(c(w.sqrt(), 0.0)))
        .collect();
    crate::channel::QubitChannel::new(kraus).expect("mixture of unitaries is bistochastic")
}
