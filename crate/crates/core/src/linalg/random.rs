//! Seeded random matrices for planted oracles and property tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{orthonormalize, CMatrix, CVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    (0..dim).map(|_| complex_gaussian(rng)).collect()
}

/// Haar-distributed unitary: Gram-Schmidt on the columns of a complex
/// Gaussian matrix (the positive diagonal of the implied `R` fixes phases).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    loop {
        let cols: Vec<CVector> = (0..dim).map(|_| gaussian_vector(rng, dim)).collect();
        let basis = orthonormalize(&cols, 1e-6);
        if basis.len() == dim {
            return CMatrix::from_columns(&basis);
        }
    }
}

/// Real orthogonal matrix (Gram-Schmidt on a real Gaussian matrix).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    loop {
        let cols: Vec<CVector> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
                    .collect()
            })
            .collect();
        let basis = orthonormalize(&cols, 1e-6);
        if basis.len() == dim {
            return CMatrix::from_columns(&basis);
        }
    }
}
