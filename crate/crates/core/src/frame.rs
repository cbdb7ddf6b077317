//! Frame-theoretic operators at a fixed truncation.
//!
//! Conventions: the sequence is the `d x N` matrix `F` with columns `f_n`;
//! the analysis matrix is `A = F*` (row `n` is `f_n*`, so `(A f)_n = <f, f_n>`);
//! the frame operator is `S = A* A = F F*`; the Gram matrix is `F* F`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, DenseMatrix, SpectralTolerance, C64};
use crate::sequences::TruncatedSequence;

/// Orthonormality slack accepted for subspace bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Parseval residual accepted by [`build_converter`].
pub const PARSEVAL_TOL: f64 = 1e-8;

/// Analysis operator of a truncated sequence, `N x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisMatrix(DenseMatrix);

impl AnalysisMatrix {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    /// Coefficients `<f, f_n>`.
    pub fn apply(&self, f: &DVector<C64>) -> DVector<C64> {
        self.0.inner() * f
    }

    /// The synthesis operator `A*`, i.e. `F`.
    pub fn synthesis(&self) -> DenseMatrix {
        self.0.adjoint()
    }

    /// `A* A`, see [`column_gram`].
    pub fn gram_of_columns(&self) -> DenseMatrix {
        column_gram(&self.0)
    }
}

/// `M* M` with a fixed contraction order: entry `(a, b)` for `a <= b` is
/// `sum_r conj(M[r,a]) M[r,b]` accumulated over `r` ascending, and the lower
/// triangle is its conjugate. The result is exactly Hermitian.
pub fn column_gram(m: &DenseMatrix) -> DenseMatrix {
    let k = m.ncols();
    let cols: Vec<Vec<C64>> = (0..k).map(|j| m.column(j).iter().copied().collect()).collect();
    let upper: Vec<Vec<C64>> = (0..k)
        .into_par_iter()
        .map(|b| {
            (0..=b)
                .map(|a| {
                    let mut acc = C64::new(0.0, 0.0);
                    for (x, y) in cols[a].iter().zip(&cols[b]) {
                        acc += x.conj() * y;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let g = DMatrix::from_fn(k, k, |a, b| {
        if a == b {
            C64::new(upper[b][a].re, 0.0)
        } else if a < b {
            upper[b][a]
        } else {
            upper[a][b].conj()
        }
    });
    DenseMatrix::trusted(g)
}

pub fn analysis_matrix(seq: &TruncatedSequence) -> AnalysisMatrix {
    AnalysisMatrix(seq.matrix().adjoint())
}

/// `S = sum_n f_n f_n*`, computed as `A* A`.
pub fn frame_operator(seq: &TruncatedSequence) -> DenseMatrix {
    analysis_matrix(seq).gram_of_columns()
}

/// Gram matrix `G[n, m] = <f_m, f_n>`.
pub fn gram_matrix(seq: &TruncatedSequence) -> DenseMatrix {
    column_gram(seq.matrix())
}

/// Optimal frame constants over the whole space or a subspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub subspace_dim: usize,
}

fn check_subspace(q: &DenseMatrix, d: usize) -> Result<()> {
    if q.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "subspace basis has {} rows, ambient dimension is {d}",
            q.nrows()
        )));
    }
    if q.ncols() == 0 {
        return Err(Error::DimensionMismatch("subspace basis has no columns".into()));
    }
    let dev = numerics::orthonormality_defect(q);
    if dev > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation: dev });
    }
    Ok(())
}

/// Extreme eigenvalues of `S`, or of the compression `Q* S Q` when a subspace is given.
pub fn frame_bounds(
    seq: &TruncatedSequence,
    subspace: Option<&DenseMatrix>,
    tol: &SpectralTolerance,
) -> Result<FrameBounds> {
    let a = analysis_matrix(seq);
    let (compressed, dim) = match subspace {
        None => (a.gram_of_columns(), seq.ambient_dim()),
        Some(q) => {
            check_subspace(q, seq.ambient_dim())?;
            let aq = DenseMatrix::trusted(a.matrix().inner() * q.inner());
            (column_gram(&aq), q.ncols())
        }
    };
    let vals = numerics::eigvals_hermitian(&compressed, tol)?;
    let lower = vals.first().copied().unwrap_or(0.0).max(0.0);
    let upper = vals.last().copied().unwrap_or(0.0).max(lower);
    Ok(FrameBounds { lower, upper, subspace_dim: dim })
}

/// Optimal Bessel bound `lambda_max(S)`.
pub fn bessel_bound(seq: &TruncatedSequence) -> Result<f64> {
    Ok(frame_bounds(seq, None, &SpectralTolerance::default())?.upper)
}

/// `{S^{-1/2} f_n}` with the pseudo-inverse convention on the kernel of `S`.
pub fn canonical_parseval(seq: &TruncatedSequence, tol: &SpectralTolerance) -> Result<TruncatedSequence> {
    let w = numerics::psd_inverse_sqrt(&frame_operator(seq), tol)?;
    seq.map_linear(&w)
}

/// `|| S - P ||` where `P` projects onto the span of the sequence; zero for
/// a Parseval frame of its span.
pub fn parseval_residual(seq: &TruncatedSequence, tol: &SpectralTolerance) -> Result<f64> {
    let s = frame_operator(seq);
    let q = numerics::range_basis(seq.matrix(), tol)?;
    let p = q.inner() * q.adjoint().into_inner();
    let diff = DenseMatrix::trusted(numerics::hermitize(&(s.inner() - p)));
    numerics::hermitian_norm(&diff, tol)
}

/// `sum_n <f, S^+ f_n> f_n`, which equals `f` on the range of `S`.
pub fn canonical_dual_reconstruct(
    seq: &TruncatedSequence,
    f: &DVector<C64>,
    tol: &SpectralTolerance,
) -> Result<DVector<C64>> {
    if f.len() != seq.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a sequence in dimension {}",
            f.len(),
            seq.ambient_dim()
        )));
    }
    let s = frame_operator(seq);
    let s_pinv = numerics::psd_pinv(&s, tol)?;
    let projected = s.inner() * (s_pinv.inner() * f);
    let residual = (f - &projected).norm();
    if residual > PARSEVAL_TOL * f.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::OutOfRange { residual });
    }
    let duals = s_pinv.inner() * seq.matrix().inner();
    let mut out = DVector::<C64>::zeros(f.len());
    for n in 0..seq.count() {
        let coeff = duals.column(n).dotc(f);
        out += seq.matrix().column(n) * coeff;
    }
    Ok(out)
}

/// Parseval-converting operator built from a lower-bounded subspace.
#[derive(Debug, Clone)]
pub struct ConverterResult {
    /// `d x d`, equal to `(T T*)^{1/2}` on `D` and zero on its complement.
    pub b: DenseMatrix,
    /// Orthonormal columns spanning `D`.
    pub target_subspace: DenseMatrix,
    pub parseval_residual: f64,
    pub restricted_bounds: FrameBounds,
    pub rank: usize,
    pub subspace_dim: usize,
    pub ambient_dim: usize,
    /// `rank(B) = dim D`.
    pub surjective_flag: bool,
    /// `rank(B) = d`.
    pub injective_flag: bool,
    pub verified: bool,
}

impl ConverterResult {
    /// The converted sequence `{B f_n}`.
    pub fn apply(&self, seq: &TruncatedSequence) -> Result<TruncatedSequence> {
        seq.map_linear(&self.b)
    }
}

/// Builds `B = (T T*)^{1/2}` for `T` the inverse of the analysis operator
/// restricted to `D = range(q)`, and checks that `{B f_n}` is Parseval on its span.
pub fn build_converter(seq: &TruncatedSequence, q: &DenseMatrix, tol: &SpectralTolerance) -> Result<ConverterResult> {
    let d = seq.ambient_dim();
    check_subspace(q, d)?;
    let k = q.ncols();

    let a_d = DenseMatrix::trusted(analysis_matrix(seq).matrix().inner() * q.inner());
    let restricted = column_gram(&a_d);
    let vals = numerics::eigvals_hermitian(&restricted, tol)?;
    let lower = vals.first().copied().unwrap_or(0.0).max(0.0);
    let upper = vals.last().copied().unwrap_or(0.0).max(lower);
    let floor = tol.rank_tol * upper.max(f64::MIN_POSITIVE);
    if lower <= floor {
        return Err(Error::LowerBoundTooSmall { lower, tol: floor });
    }

    // T: coefficient space -> D, in the coordinates of q
    let t = numerics::pinv(&a_d, tol)?;
    let tt = DenseMatrix::trusted(numerics::hermitize(&(t.inner() * t.adjoint().into_inner())));
    let root = numerics::psd_sqrt(&tt, tol)?;
    let b = DenseMatrix::trusted(numerics::hermitize(&(q.inner() * root.inner() * q.adjoint().into_inner())));

    let converted = seq.map_linear(&b)?;
    let residual = parseval_residual(&converted, tol)?;
    let b_vals = numerics::eigvals_hermitian(&b, tol)?;
    let bmax = b_vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let rank = b_vals.iter().filter(|&&v| v > tol.rank_tol * bmax).count();

    Ok(ConverterResult {
        b,
        target_subspace: q.clone(),
        parseval_residual: residual,
        restricted_bounds: FrameBounds { lower, upper, subspace_dim: k },
        rank,
        subspace_dim: k,
        ambient_dim: d,
        surjective_flag: rank == k,
        injective_flag: rank == d,
        verified: residual <= PARSEVAL_TOL,
    })
}
