use nalgebra::DMatrix;

use super::{TruncatedSequence, WeightFormula};
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, C64};

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidSpec(format!("generators need d >= 2, got {d}")));
    }
    Ok(())
}

/// `{w(n) e_n}` for `n = 0..d-1`. Zero weights give zero vectors, which are kept.
pub fn gen_weighted_basis(weight: &WeightFormula, d: usize) -> Result<TruncatedSequence> {
    require_dim(d)?;
    let weights = (0..d).map(|n| weight.eval(n)).collect::<Result<Vec<_>>>()?;
    Ok(TruncatedSequence::new(DenseMatrix::from_real_diagonal(&weights)?))
}

/// Number of vectors in the first `d` blocks: `1 + d(d-1)/2`.
pub fn block_count(d: usize) -> usize {
    1 + d * (d - 1) / 2
}

/// Block index of every position in the block enumeration.
fn block_layout(d: usize) -> Vec<usize> {
    let mut layout = Vec::with_capacity(block_count(d));
    layout.push(0);
    for k in 1..d {
        layout.extend(std::iter::repeat_n(k, k));
    }
    layout
}

/// Parseval frame `{e_0, e_1, e_2/sqrt2, e_2/sqrt2, e_3/sqrt3 (x3), ...}` in `C^d`.
pub fn gen_parseval_blocks(d: usize) -> Result<TruncatedSequence> {
    require_dim(d)?;
    let layout = block_layout(d);
    let m = DMatrix::from_fn(d, layout.len(), |i, n| {
        let k = layout[n];
        if i == k {
            C64::new(1.0 / (k.max(1) as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(TruncatedSequence::new(DenseMatrix::trusted(m)))
}

/// Weights aligned with [`gen_parseval_blocks`]: block `k` carries `sqrt k`
/// once followed by `1/sqrt k` repeated `k - 1` times.
pub fn gen_block_weights(d: usize) -> Result<Vec<f64>> {
    require_dim(d)?;
    let layout = block_layout(d);
    let mut weights = Vec::with_capacity(layout.len());
    let mut prev = usize::MAX;
    for &k in &layout {
        let kf = k.max(1) as f64;
        weights.push(if k != prev { kf.sqrt() } else { 1.0 / kf.sqrt() });
        prev = k;
    }
    Ok(weights)
}

/// `{a_n e_n}` in the `N`-dimensional coordinate space, `a = gen_block_weights(d)`.
pub fn gen_weighted_std_basis_from_blocks(d: usize) -> Result<TruncatedSequence> {
    let a = gen_block_weights(d)?;
    Ok(TruncatedSequence::new(DenseMatrix::from_real_diagonal(&a)?))
}

/// `{a_n g_n}` in `C^d`.
pub fn gen_block_weighted_parseval(d: usize) -> Result<TruncatedSequence> {
    let a = gen_block_weights(d)?;
    let g = gen_parseval_blocks(d)?;
    let m = DMatrix::from_fn(d, a.len(), |i, n| g.matrix()[(i, n)] * a[n]);
    Ok(TruncatedSequence::new(DenseMatrix::trusted(m)))
}

/// Orthonormal basis of `{a in C^d : sum a_k = 0}` (Helmert columns).
///
/// Column `j` is `(e_0 + ... + e_j - (j+1) e_{j+1}) / sqrt((j+1)(j+2))`, so
/// the first columns do not depend on `d` and bases at successive `d` nest.
pub fn gen_zero_sum_subspace_basis(d: usize) -> Result<DenseMatrix> {
    require_dim(d)?;
    let m = DMatrix::from_fn(d, d - 1, |k, j| {
        let scale = (((j + 1) * (j + 2)) as f64).sqrt();
        let v = if k <= j {
            1.0 / scale
        } else if k == j + 1 {
            -((j + 1) as f64) / scale
        } else {
            0.0
        };
        C64::new(v, 0.0)
    });
    Ok(DenseMatrix::trusted(m))
}

/// Round-robin interleaving: first vector of each part, then second, and so on.
pub fn gen_union(parts: &[TruncatedSequence]) -> Result<TruncatedSequence> {
    let first = parts.first().ok_or_else(|| Error::InvalidSpec("union needs at least one part".into()))?;
    let d = first.ambient_dim();
    if let Some(bad) = parts.iter().find(|p| p.ambient_dim() != d) {
        return Err(Error::DimensionMismatch(format!(
            "union of sequences in dimensions {d} and {}",
            bad.ambient_dim()
        )));
    }
    let longest = parts.iter().map(TruncatedSequence::count).max().unwrap_or(0);
    let mut columns = Vec::new();
    for n in 0..longest {
        for p in parts.iter().filter(|p| n < p.count()) {
            columns.push(p.vector(n));
        }
    }
    TruncatedSequence::from_columns(d, &columns)
}

/// `base_n + scale * delta_n`.
pub fn gen_perturbed(base: &TruncatedSequence, delta: &TruncatedSequence, scale: f64) -> Result<TruncatedSequence> {
    if base.ambient_dim() != delta.ambient_dim() || base.count() != delta.count() {
        return Err(Error::DimensionMismatch(format!(
            "perturbing a {}x{} sequence by a {}x{} one",
            base.ambient_dim(),
            base.count(),
            delta.ambient_dim(),
            delta.count()
        )));
    }
    let m = base.matrix().inner() + delta.matrix().inner() * C64::new(scale, 0.0);
    Ok(TruncatedSequence::new(DenseMatrix::new(m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame;
    use crate::sequences::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const S2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn weighted_basis_examples() {
        let s = gen_weighted_basis(&WeightFormula::N, 3).unwrap();
        assert_eq!(s.norms(), vec![0.0, 1.0, 2.0]);
        assert_eq!(s.matrix()[(2, 2)], C64::new(2.0, 0.0));

        let s = gen_weighted_basis(&WeightFormula::Constant(1.0), 3).unwrap();
        assert_eq!(s.matrix().inner(), &DMatrix::identity(3, 3));

        let s = gen_weighted_basis(&WeightFormula::InvNPlusOne, 4).unwrap();
        let want = [1.0, 0.5, 1.0 / 3.0, 0.25];
        for (g, w) in s.norms().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert!(gen_weighted_basis(&WeightFormula::N, 1).is_err());
    }

    #[test]
    fn parseval_blocks_examples() {
        let s = gen_parseval_blocks(3).unwrap();
        assert_eq!(s.count(), 4);
        let want = [(0, 1.0), (1, 1.0), (2, 1.0 / S2), (2, 1.0 / S2)];
        for (n, (row, v)) in want.iter().enumerate() {
            assert!((s.matrix()[(*row, n)].re - v).abs() < 1e-15);
            assert!((s.vector(n).norm() - v).abs() < 1e-15);
        }
        let s = gen_parseval_blocks(2).unwrap();
        assert_eq!(s.matrix().inner(), &DMatrix::identity(2, 2));
        assert_eq!(gen_parseval_blocks(10).unwrap().count(), block_count(10));
    }

    #[test]
    fn parseval_blocks_frame_operator_by_direct_summation() {
        let s = gen_parseval_blocks(4).unwrap();
        let mut sum = DMatrix::<C64>::zeros(4, 4);
        for n in 0..s.count() {
            let v = s.vector(n);
            sum += &v * v.adjoint();
        }
        assert!((sum - DMatrix::<C64>::identity(4, 4)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn parseval_blocks_reproduce_norms_of_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = gen_parseval_blocks(12).unwrap();
        for _ in 0..100 {
            let f = random::gaussian_vector(12, &mut rng);
            let energy: f64 = (0..s.count()).map(|n| f.dotc(&s.vector(n)).norm_sqr()).sum();
            assert!((energy - f.norm_squared()).abs() < 1e-10 * f.norm_squared().max(1.0));
        }
    }

    #[test]
    fn block_weight_examples() {
        let w = gen_block_weights(3).unwrap();
        let want = [1.0, 1.0, S2, 1.0 / S2];
        assert_eq!(w.len(), 4);
        for (g, e) in w.iter().zip(want) {
            assert!((g - e).abs() < 1e-15);
        }
        let s3 = 3f64.sqrt();
        let w = gen_block_weights(4).unwrap();
        let want = [1.0, 1.0, S2, 1.0 / S2, s3, 1.0 / s3, 1.0 / s3];
        for (g, e) in w.iter().zip(want) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn weight_times_norm_per_block() {
        let d = 9;
        let w = gen_block_weights(d).unwrap();
        let g = gen_parseval_blocks(d).unwrap();
        let layout = block_layout(d);
        for (n, &k) in layout.iter().enumerate() {
            let first_in_block = n == 0 || layout[n - 1] != k;
            let want = if first_in_block { 1.0 } else { 1.0 / k as f64 };
            assert!((w[n] * g.vector(n).norm() - want).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn weighted_std_basis_examples() {
        let s = gen_weighted_std_basis_from_blocks(3).unwrap();
        assert_eq!((s.ambient_dim(), s.count()), (4, 4));
        assert!((s.matrix()[(2, 2)].re - S2).abs() < 1e-15);
        assert!((s.matrix()[(3, 3)].re - 1.0 / S2).abs() < 1e-15);
        assert_eq!(s.norms(), gen_block_weights(3).unwrap());
    }

    #[test]
    fn few_block_weights_lie_in_a_bounded_band() {
        // a_n takes values sqrt k and 1/sqrt k; only k <= 4 fall in [1/2, 2]
        let w = gen_block_weights(16).unwrap();
        let in_band: usize = w.iter().filter(|&&a| (0.5..=2.0).contains(&a)).count();
        let by_enumeration: usize = (0..16usize)
            .map(|k| match k {
                0 | 1 => 1,
                _ => {
                    let head = usize::from((0.5..=2.0).contains(&(k as f64).sqrt()));
                    let tail = if (0.5..=2.0).contains(&(1.0 / (k as f64).sqrt())) { k - 1 } else { 0 };
                    head + tail
                }
            })
            .sum();
        assert_eq!(in_band, by_enumeration);
        // 1, 1, sqrt2, 1/sqrt2, sqrt3, 1/sqrt3 x2, 2, 1/2 x3
        assert_eq!(in_band, 11);
        let wide = gen_block_weights(64).unwrap();
        assert_eq!(wide.iter().filter(|&&a| (0.5..=2.0).contains(&a)).count(), in_band);
    }

    #[test]
    fn zero_sum_basis_examples() {
        let q = gen_zero_sum_subspace_basis(2).unwrap();
        assert_eq!(q.ncols(), 1);
        assert!((q[(0, 0)].re - 1.0 / S2).abs() < 1e-15 && (q[(1, 0)].re + 1.0 / S2).abs() < 1e-15);

        let q = gen_zero_sum_subspace_basis(4).unwrap();
        assert_eq!(q.ncols(), 3);
        for j in 0..3 {
            let s: C64 = q.column(j).iter().sum();
            assert!(s.norm() < 1e-12);
        }
        assert!(crate::numerics::orthonormality_defect(&q) < 1e-12);
    }

    #[test]
    fn zero_sum_span_contains_dense_approximants() {
        // a^j = e_j - (1/r) on r other coordinates lies in the span, |e_j - a^j|^2 = 1/r
        let d = 7;
        let r = d - 1;
        let q = gen_zero_sum_subspace_basis(d).unwrap();
        let proj = q.inner() * q.adjoint().into_inner();
        for j in 0..d {
            let mut a = nalgebra::DVector::from_element(d, C64::new(-1.0 / r as f64, 0.0));
            a[j] = C64::new(1.0, 0.0);
            let back = &proj * &a;
            assert!((&back - &a).norm() < 1e-12);
            let mut e = nalgebra::DVector::zeros(d);
            e[j] = C64::new(1.0, 0.0);
            assert!(((&e - &a).norm_squared() - 1.0 / r as f64).abs() < 1e-12);
            let dist = (&e - &proj * &e).norm();
            assert!(dist <= 1.0 / (r as f64).sqrt() + 1e-12);
        }
    }

    #[test]
    fn union_round_robin_norms() {
        let a = gen_weighted_basis(&WeightFormula::NPlusOne, 3).unwrap();
        let b = gen_weighted_basis(&WeightFormula::InvNPlusOne, 3).unwrap();
        let u = gen_union(&[a, b]).unwrap();
        let want = [1.0, 1.0, 2.0, 0.5, 3.0, 1.0 / 3.0];
        for (g, w) in u.norms().iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn union_rejects_mixed_dimensions() {
        let a = gen_weighted_basis(&WeightFormula::N, 3).unwrap();
        let b = gen_weighted_basis(&WeightFormula::N, 4).unwrap();
        assert!(matches!(gen_union(&[a, b]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn perturbation_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = gen_weighted_basis(&WeightFormula::Constant(1.0), 6).unwrap();
        let delta = random::unit_vectors(6, 6, &mut rng);
        let same = gen_perturbed(&base, &delta, 0.0).unwrap();
        assert_eq!(same.matrix(), base.matrix());

        let s = 0.3;
        let p = gen_perturbed(&base, &delta, s).unwrap();
        let diff = gen_perturbed(&base, &p, -1.0).unwrap();
        let bd = frame::bessel_bound(&diff).unwrap();
        let bdelta = frame::bessel_bound(&delta).unwrap();
        assert!((bd - s * s * bdelta).abs() < 1e-10);
    }

    #[test]
    fn generators_are_bit_reproducible() {
        assert_eq!(gen_parseval_blocks(17).unwrap(), gen_parseval_blocks(17).unwrap());
        assert_eq!(gen_weighted_std_basis_from_blocks(9).unwrap(), gen_weighted_std_basis_from_blocks(9).unwrap());
    }
}
