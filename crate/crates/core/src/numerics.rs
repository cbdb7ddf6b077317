//! Dense complex spectral kernels.
//!
//! Eigen- and singular-value decompositions are delegated to `nalgebra`; this
//! module fixes the conventions every other module relies on: eigenvalues
//! ascending, singular values descending, stable ordering on ties, and
//! pseudo-inverse handling of the numerical kernel.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// A complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<C64>);

impl DenseMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(DenseMatrix(m))
    }

    /// Wraps a matrix produced by this crate's own arithmetic on finite data.
    pub(crate) fn trusted(m: DMatrix<C64>) -> Self {
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        DenseMatrix(m)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(dim: usize, columns: &[DVector<C64>]) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} in a {dim}-dimensional space",
                bad.len()
            )));
        }
        Self::from_fn(dim, columns.len(), |i, j| columns[j][i])
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix(self.0.adjoint())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// `max |M - M*|` for square matrices.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.0.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_square(&self) -> bool {
        self.0.nrows() == self.0.ncols()
    }
}

impl Deref for DenseMatrix {
    type Target = DMatrix<C64>;

    fn deref(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl From<DenseMatrix> for DMatrix<C64> {
    fn from(m: DenseMatrix) -> Self {
        m.0
    }
}

/// Thresholds for numerical rank and Hermitian symmetry.
///
/// `rank_tol` is relative to the largest eigen/singular value of the matrix
/// under consideration; `sym_tol` is measured against `max(1, max|M_ij|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTolerance {
    pub rank_tol: f64,
    pub sym_tol: f64,
}

impl SpectralTolerance {
    pub fn new(rank_tol: f64, sym_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && rank_tol.is_finite()) {
            return Err(Error::InvalidTolerance(format!("rank_tol must be > 0, got {rank_tol}")));
        }
        if !(sym_tol > 0.0 && sym_tol.is_finite()) {
            return Err(Error::InvalidTolerance(format!("sym_tol must be > 0, got {sym_tol}")));
        }
        Ok(SpectralTolerance { rank_tol, sym_tol })
    }

    fn rank_cutoff(&self, scale: f64) -> f64 {
        self.rank_tol * scale
    }
}

impl Default for SpectralTolerance {
    fn default() -> Self {
        SpectralTolerance { rank_tol: 1e-10, sym_tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: DenseMatrix,
}

#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    /// `rows x k` with orthonormal columns.
    pub u: DenseMatrix,
    /// `cols x k` with orthonormal columns; `M = U diag(s) V*`.
    pub v: DenseMatrix,
}

fn require_square(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn check_hermitian(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<()> {
    require_square(m)?;
    let defect = m.hermitian_defect();
    let allowed = tol.sym_tol * m.max_abs().max(1.0);
    if defect > allowed {
        return Err(Error::NotHermitian { asymmetry: defect, tol: allowed });
    }
    Ok(())
}

/// Replaces `M` by `(M + M*)/2`.
pub fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(
        n,
        n,
        |i, j| {
            if i == j {
                C64::new(m[(i, i)].re, 0.0)
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        },
    )
}

/// Permutation that sorts `keys` by `cmp`, ties kept in input order.
fn stable_order(keys: &[f64], descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = keys[a].total_cmp(&keys[b]);
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    idx
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<HermitianEigen> {
    check_hermitian(m, tol)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: DenseMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = stable_order(&raw, false);
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors: DenseMatrix::trusted(vectors) })
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<Vec<f64>> {
    check_hermitian(m, tol)?;
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    let mut vals: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Thin SVD with singular values in descending order.
pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::DimensionMismatch(format!("svd of an empty {rows}x{cols} matrix")));
    }
    let dec = m.inner().clone().svd(true, true);
    let raw: Vec<f64> = dec.singular_values.iter().copied().collect();
    let order = stable_order(&raw, true);
    let u_raw = dec.u.expect("u requested");
    let vt_raw = dec.v_t.expect("v_t requested");
    let k = raw.len();
    let u = DMatrix::from_fn(rows, k, |r, c| u_raw[(r, order[c])]);
    let v = DMatrix::from_fn(cols, k, |r, c| vt_raw[(order[c], r)].conj());
    Ok(Svd {
        singular_values: order.iter().map(|&i| raw[i]).collect(),
        u: DenseMatrix::trusted(u),
        v: DenseMatrix::trusted(v),
    })
}

/// Singular values only, descending.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = m.inner().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Applies `f` to the eigenvalues above the numerical kernel, zero on the kernel.
fn psd_function(m: &DenseMatrix, tol: &SpectralTolerance, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
    let eig = eig_hermitian(m, tol)?;
    let n = m.nrows();
    let scale = eig.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cutoff = tol.rank_cutoff(scale);
    if let Some(&lo) = eig.values.first() {
        if lo < -cutoff {
            return Err(Error::NegativeEigenvalue { value: lo, tol: cutoff });
        }
    }
    let v = eig.vectors.inner();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (i, &lambda) in eig.values.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let w = f(lambda);
        let col = v.column(i);
        out += (col * col.adjoint()) * C64::new(w, 0.0);
    }
    Ok(DenseMatrix::trusted(hermitize(&out)))
}

/// Pseudo-inverse square root `sum_{lambda > tol} lambda^{-1/2} v v*`.
pub fn psd_inverse_sqrt(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<DenseMatrix> {
    psd_function(m, tol, |l| 1.0 / l.sqrt())
}

/// Square root of a PSD matrix, with the numerical kernel mapped to zero.
pub fn psd_sqrt(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<DenseMatrix> {
    psd_function(m, tol, f64::sqrt)
}

/// Pseudo-inverse of a PSD matrix via its eigendecomposition.
pub fn psd_pinv(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<DenseMatrix> {
    psd_function(m, tol, |l| 1.0 / l)
}

/// Moore–Penrose pseudo-inverse; singular values `<= rank_tol * s_max` count as zero.
pub fn pinv(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<DenseMatrix> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(DenseMatrix::zeros(cols, rows));
    }
    let dec = svd(m)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_cutoff(smax);
    let mut out = DMatrix::<C64>::zeros(cols, rows);
    for (i, &s) in dec.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let vi = dec.v.column(i);
        let ui = dec.u.column(i);
        out += (vi * ui.adjoint()) * C64::new(1.0 / s, 0.0);
    }
    Ok(DenseMatrix::trusted(out))
}

/// Number of singular values above `rank_tol * s_max`.
pub fn numerical_rank(m: &DenseMatrix, tol: &SpectralTolerance) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol.rank_cutoff(smax)).count()
}

/// Orthonormal basis of the column space of `m`.
pub fn range_basis(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<DenseMatrix> {
    let dec = svd(m)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let r = if smax == 0.0 { 0 } else { dec.singular_values.iter().filter(|&&x| x > tol.rank_cutoff(smax)).count() };
    Ok(DenseMatrix::trusted(dec.u.columns(0, r).into_owned()))
}

/// `max |Q*Q - I|` over entries.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.adjoint().into_inner() * q.inner();
    let k = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Spectral norm of a Hermitian matrix: `max |lambda|`.
pub fn hermitian_norm(m: &DenseMatrix, tol: &SpectralTolerance) -> Result<f64> {
    let vals = eigvals_hermitian(m, tol)?;
    Ok(vals.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
}

/// Operator 2-norm.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, c, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap()
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_element(2, 2, C64::new(f64::NAN, 0.0));
        assert!(matches!(DenseMatrix::new(m), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(SpectralTolerance::new(0.0, 1e-10).is_err());
        assert!(SpectralTolerance::new(1e-10, -1.0).is_err());
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let tol = SpectralTolerance::default();
        let e = eig_hermitian(&DenseMatrix::identity(3), &tol).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert!(orthonormality_defect(&e.vectors) < 1e-12);

        let e = eig_hermitian(&DenseMatrix::from_real_diagonal(&[9.0, 4.0]).unwrap(), &tol).unwrap();
        assert!((e.values[0] - 4.0).abs() < 1e-12 && (e.values[1] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = random_matrix(&mut rng, 5, 5);
        let m = DenseMatrix::new(b.adjoint().into_inner() * b.inner()).unwrap();
        let tol = SpectralTolerance::default();
        let e = eig_hermitian(&m, &tol).unwrap();
        assert!(e.values.iter().all(|&l| l >= -1e-12));
        let v = e.vectors.inner();
        let lam = DMatrix::from_fn(5, 5, |i, j| if i == j { C64::new(e.values[i], 0.0) } else { ZERO });
        let recon = v * lam * v.adjoint();
        assert!(max_diff(&recon, m.inner()) <= 1e-10 * m.max_abs());
        assert!(orthonormality_defect(&e.vectors) < 1e-10);
    }

    #[test]
    fn eig_rejects_non_hermitian_and_rectangular() {
        let tol = SpectralTolerance::default();
        let m = DenseMatrix::from_fn(2, 2, |i, j| C64::new((i * 2 + j) as f64, 0.0)).unwrap();
        assert!(matches!(eig_hermitian(&m, &tol), Err(Error::NotHermitian { .. })));
        assert!(matches!(eig_hermitian(&DenseMatrix::zeros(2, 3), &tol), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn svd_basic_cases() {
        let s = svd(&DenseMatrix::zeros(3, 2)).unwrap();
        assert!(s.singular_values.iter().all(|&x| x == 0.0));

        let s = svd(&DenseMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]).unwrap()).unwrap();
        for (got, want) in s.singular_values.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }

        // rank one u v* with |u| = 2, |v| = 3
        let u = DVector::from_vec(vec![C64::new(2.0, 0.0), ZERO, ZERO]);
        let v = DVector::from_vec(vec![ZERO, C64::new(0.0, 3.0), ZERO, ZERO]);
        let m = DenseMatrix::new(&u * v.adjoint()).unwrap();
        let s = svd(&m).unwrap();
        assert!((s.singular_values[0] - 6.0).abs() < 1e-12);
        assert!(s.singular_values[1..].iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn svd_reconstructs_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(r, c) in &[(6, 3), (3, 6), (5, 5)] {
            let m = random_matrix(&mut rng, r, c);
            let s = svd(&m).unwrap();
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            let k = s.singular_values.len();
            let sig = DMatrix::from_fn(k, k, |i, j| if i == j { C64::new(s.singular_values[i], 0.0) } else { ZERO });
            let recon = s.u.inner() * sig * s.v.adjoint().inner();
            assert!(max_diff(&recon, m.inner()) <= 1e-10 * m.max_abs());
        }
    }

    #[test]
    fn inverse_sqrt_cases() {
        let tol = SpectralTolerance::default();
        let w = psd_inverse_sqrt(&DenseMatrix::from_real_diagonal(&[4.0, 9.0]).unwrap(), &tol).unwrap();
        assert!((w[(0, 0)].re - 0.5).abs() < 1e-14 && (w[(1, 1)].re - 1.0 / 3.0).abs() < 1e-14);
        assert!(w[(0, 1)].norm() < 1e-14);

        let w = psd_inverse_sqrt(&DenseMatrix::identity(4), &tol).unwrap();
        assert!(max_diff(w.inner(), &DMatrix::identity(4, 4)) < 1e-14);

        let tight = SpectralTolerance::new(1e-12, 1e-10).unwrap();
        let w = psd_inverse_sqrt(&DenseMatrix::from_real_diagonal(&[4.0, 0.0]).unwrap(), &tight).unwrap();
        assert!((w[(0, 0)].re - 0.5).abs() < 1e-14);
        assert_eq!(w[(1, 1)], ZERO);
    }

    #[test]
    fn inverse_sqrt_rejects_negative() {
        let tol = SpectralTolerance::default();
        let m = DenseMatrix::from_real_diagonal(&[1.0, -0.5]).unwrap();
        assert!(matches!(psd_inverse_sqrt(&m, &tol), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn inverse_sqrt_squared_is_range_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = SpectralTolerance::default();
        // rank 3 PSD in C^6
        let b = random_matrix(&mut rng, 6, 3);
        let m = DenseMatrix::new(b.inner() * b.adjoint().into_inner()).unwrap();
        let w = psd_inverse_sqrt(&m, &tol).unwrap();
        let p = w.inner() * m.inner() * w.inner();
        let q = range_basis(&m, &tol).unwrap();
        assert_eq!(q.ncols(), 3);
        let proj = q.inner() * q.adjoint().into_inner();
        assert!(max_diff(&p, &proj) < 1e-8);
    }

    #[test]
    fn pinv_cases() {
        let tol = SpectralTolerance::default();
        let p = pinv(&DenseMatrix::from_real_diagonal(&[2.0, 0.0]).unwrap(), &tol).unwrap();
        assert!((p[(0, 0)].re - 0.5).abs() < 1e-14 && p[(1, 1)].norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = svd(&random_matrix(&mut rng, 4, 4)).unwrap().u;
        let p = pinv(&q, &tol).unwrap();
        assert!(max_diff(p.inner(), q.adjoint().inner()) < 1e-10);

        let m = random_matrix(&mut rng, 6, 3);
        let p = pinv(&m, &tol).unwrap();
        let prod = p.inner() * m.inner();
        assert!(max_diff(&prod, &DMatrix::identity(3, 3)) < 1e-8);
    }

    #[test]
    fn pinv_penrose_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tol = SpectralTolerance::default();
        // rank-deficient 5x4
        let a = random_matrix(&mut rng, 5, 2);
        let b = random_matrix(&mut rng, 2, 4);
        let m = a.inner() * b.inner();
        let p = pinv(&DenseMatrix::new(m.clone()).unwrap(), &tol).unwrap().into_inner();
        assert!(max_diff(&(&m * &p * &m), &m) < 1e-8);
        assert!(max_diff(&(&p * &m * &p), &p) < 1e-8);
        let mp = &m * &p;
        let pm = &p * &m;
        assert!(max_diff(&mp, &mp.adjoint()) < 1e-8);
        assert!(max_diff(&pm, &pm.adjoint()) < 1e-8);
    }

    #[test]
    fn shift_moves_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tol = SpectralTolerance::default();
        let b = random_matrix(&mut rng, 4, 4);
        let m = hermitize(b.inner());
        let c = 2.5;
        let shifted = &m + DMatrix::<C64>::identity(4, 4) * C64::new(c, 0.0);
        let a = eigvals_hermitian(&DenseMatrix::new(m).unwrap(), &tol).unwrap();
        let s = eigvals_hermitian(&DenseMatrix::new(shifted).unwrap(), &tol).unwrap();
        for (x, y) in a.iter().zip(&s) {
            assert!((x + c - y).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_values_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_matrix(&mut rng, 5, 4);
        let s = singular_values(&m);
        let perm_rows = [3usize, 0, 4, 1, 2];
        let perm_cols = [2usize, 3, 1, 0];
        let pm = DenseMatrix::from_fn(5, 4, |i, j| m[(perm_rows[i], perm_cols[j])]).unwrap();
        let t = singular_values(&pm);
        for (a, b) in s.iter().zip(&t) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
