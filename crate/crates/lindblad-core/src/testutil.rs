//! Small helpers shared by the unit tests.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{fro_norm, CMatrix};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Deterministic Gaussian-entry complex matrix.
pub fn randc_matrix(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((dim, dim), |_| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    })
}

/// Deterministic random density matrix (Hilbert-Schmidt ensemble).
pub fn rand_density(dim: usize, seed: u64) -> CMatrix {
    let g = randc_matrix(dim, seed);
    let rho = g.dot(&crate::matrix::dagger(&g));
    let t = crate::matrix::trace(&rho);
    rho.mapv(|z| z / t)
}

pub fn assert_close(a: &CMatrix, b: &CMatrix, tol: f64) {
    let diff = fro_norm(&(a - b));
    assert!(
        diff <= tol,
        "matrices differ by {diff:e} (tolerance {tol:e})\nleft:\n{a:.4}\nright:\n{b:.4}"
    );
}
