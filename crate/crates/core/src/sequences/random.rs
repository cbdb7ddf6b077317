//! Seeded random sequences for tests and experiments.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::TruncatedSequence;
use crate::numerics::{DenseMatrix, C64};

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Standard complex Gaussian vector.
pub fn gaussian_vector(d: usize, rng: &mut impl Rng) -> DVector<C64> {
    DVector::from_fn(d, |_, _| gaussian(rng))
}

/// `d x n` standard complex Gaussian matrix.
pub fn gaussian_matrix(d: usize, n: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::trusted(DMatrix::from_fn(d, n, |_, _| gaussian(rng)))
}

/// `n` Gaussian vectors in `C^d`.
pub fn gaussian_sequence(d: usize, n: usize, rng: &mut impl Rng) -> TruncatedSequence {
    TruncatedSequence::new(gaussian_matrix(d, n, rng))
}

/// `n` independent unit vectors in `C^d`.
pub fn unit_vectors(d: usize, n: usize, rng: &mut impl Rng) -> TruncatedSequence {
    let mut m = gaussian_matrix(d, n, rng).into_inner();
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        col /= C64::new(norm, 0.0);
    }
    TruncatedSequence::new(DenseMatrix::trusted(m))
}

/// Haar-like random unitary (QR of a Gaussian matrix with phase fix).
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> DenseMatrix {
    let qr = gaussian_matrix(d, d, rng).into_inner().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    DenseMatrix::trusted(q)
}

/// Matrix with orthonormal rows (`k x d`, `k <= d`).
pub fn random_coisometry(k: usize, d: usize, rng: &mut impl Rng) -> DenseMatrix {
    let u = random_unitary(d, rng);
    DenseMatrix::trusted(u.inner().rows(0, k).into_owned())
}
