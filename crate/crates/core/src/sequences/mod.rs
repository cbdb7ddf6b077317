//! Sequence specifications and their finite truncations.
//!
//! A [`SequenceSpec`] describes an infinite sequence declaratively; calling
//! [`SequenceSpec::truncate`] at a [`LadderLevel`] yields the finite window
//! `f_0, ..., f_{N-1}` in a `d`-dimensional space. Vectors are stored as the
//! columns of a `d x N` matrix.

mod generators;
mod ladder;
pub mod random;

pub use generators::{
    block_count, gen_block_weighted_parseval, gen_block_weights, gen_parseval_blocks, gen_perturbed, gen_union,
    gen_weighted_basis, gen_weighted_std_basis_from_blocks, gen_zero_sum_subspace_basis,
};
pub use ladder::{LadderLevel, LadderSchedule};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, ExponentialWindow, MeasureRef, Realization};
use crate::numerics::{DenseMatrix, C64};

/// Weight map `n -> w(n)` from a fixed catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", content = "value", rename_all = "snake_case")]
pub enum WeightFormula {
    /// `w(n) = n`
    N,
    /// `w(n) = n + 1`
    NPlusOne,
    /// `w(n) = 1 / (n + 1)`
    InvNPlusOne,
    Constant(f64),
    /// Explicit values; indices past the end repeat the last entry.
    Table(Vec<f64>),
}

impl WeightFormula {
    pub fn eval(&self, n: usize) -> Result<f64> {
        let w = match self {
            WeightFormula::N => n as f64,
            WeightFormula::NPlusOne => (n + 1) as f64,
            WeightFormula::InvNPlusOne => 1.0 / (n + 1) as f64,
            WeightFormula::Constant(c) => *c,
            WeightFormula::Table(t) => match t.get(n).or(t.last()) {
                Some(v) => *v,
                None => return Err(Error::InvalidSpec("empty weight table".into())),
            },
        };
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::BadWeight { index: n, value: w });
        }
        Ok(w)
    }
}

/// Which of the two block-weighted sequences to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BlockTarget {
    /// `{a_n e_n}` in the `N`-dimensional coordinate space.
    #[default]
    Standard,
    /// `{a_n g_n}` with `g_n` the Parseval blocks in `C^d`.
    Parseval,
}

/// Row-major complex matrix as `[re, im]` pairs; columns are the sequence vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitMatrix {
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl ExplicitMatrix {
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        ExplicitMatrix { rows }
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let r = self.rows.len();
        let c = self.rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidSpec("explicit matrix is empty".into()));
        }
        if self.rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidSpec("explicit matrix rows have unequal length".into()));
        }
        DenseMatrix::from_fn(r, c, |i, j| C64::new(self.rows[i][j][0], self.rows[i][j][1]))
            .map_err(|e| Error::InvalidSpec(format!("explicit matrix: {e}")))
    }
}

/// Declarative description of an infinite sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SequenceSpec {
    WeightedBasis {
        weight: WeightFormula,
    },
    ParsevalBlocks {},
    BlockWeightedBasis {
        #[serde(default)]
        target: BlockTarget,
    },
    /// Exponentials `e^{2 pi i n x}` in `L^2(mu)`. At level `d` the window is
    /// `d` consecutive frequencies (starting at 0 when one-sided, centred
    /// otherwise) unless a fixed window is given.
    Exponential {
        measure: MeasureRef,
        #[serde(default)]
        window: Option<ExponentialWindow>,
        #[serde(default)]
        one_sided: bool,
        #[serde(default)]
        realization: Realization,
    },
    Union {
        parts: Vec<SequenceSpec>,
    },
    Perturbed {
        base: Box<SequenceSpec>,
        delta: Box<SequenceSpec>,
        scale: f64,
    },
    Explicit {
        matrix: ExplicitMatrix,
    },
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::WeightedBasis { weight } => {
                if let WeightFormula::Table(t) = weight {
                    if t.is_empty() {
                        return Err(Error::InvalidSpec("empty weight table".into()));
                    }
                    for (i, &v) in t.iter().enumerate() {
                        if !(v.is_finite() && v >= 0.0) {
                            return Err(Error::BadWeight { index: i, value: v });
                        }
                    }
                }
                if let WeightFormula::Constant(c) = weight {
                    if !(c.is_finite() && *c >= 0.0) {
                        return Err(Error::BadWeight { index: 0, value: *c });
                    }
                }
                Ok(())
            }
            SequenceSpec::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidSpec("union needs at least one part".into()));
                }
                parts.iter().try_for_each(SequenceSpec::validate)
            }
            SequenceSpec::Perturbed { base, delta, scale } => {
                if !scale.is_finite() {
                    return Err(Error::InvalidSpec("perturbation scale must be finite".into()));
                }
                base.validate()?;
                delta.validate()
            }
            SequenceSpec::Explicit { matrix } => matrix.to_dense().map(|_| ()),
            SequenceSpec::Exponential { measure, window, .. } => {
                measure.resolve()?;
                if let Some(w) = window {
                    w.validate()?;
                }
                Ok(())
            }
            SequenceSpec::ParsevalBlocks {} | SequenceSpec::BlockWeightedBasis { .. } => Ok(()),
        }
    }

    /// Finite window of the sequence at `level`.
    pub fn truncate(&self, level: LadderLevel) -> Result<TruncatedSequence> {
        let full = self.truncate_natural(level.d)?;
        let natural = full.count();
        let vectors = match level.n {
            None => full.vectors,
            Some(n) if n >= 1 && n <= natural => DenseMatrix::trusted(full.vectors.inner().columns(0, n).into_owned()),
            Some(n) => {
                return Err(Error::InvalidLadder(format!(
                    "level requests N = {n} but the generator yields {natural} vectors at d = {}",
                    level.d
                )))
            }
        };
        Ok(TruncatedSequence { vectors, spec: Some(self.clone()), level })
    }

    fn truncate_natural(&self, d: usize) -> Result<TruncatedSequence> {
        match self {
            SequenceSpec::WeightedBasis { weight } => gen_weighted_basis(weight, d),
            SequenceSpec::ParsevalBlocks {} => gen_parseval_blocks(d),
            SequenceSpec::BlockWeightedBasis { target: BlockTarget::Standard } => gen_weighted_std_basis_from_blocks(d),
            SequenceSpec::BlockWeightedBasis { target: BlockTarget::Parseval } => gen_block_weighted_parseval(d),
            SequenceSpec::Exponential { measure, window, one_sided, realization } => {
                let model = measure.resolve()?;
                let w = match window {
                    Some(w) => *w,
                    None => ExponentialWindow::for_level(d, *one_sided)?,
                };
                measures::exp_system_as_sequence(&model, w, *realization)
            }
            SequenceSpec::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidSpec("union needs at least one part".into()));
                }
                let realized = parts.iter().map(|p| p.truncate_natural(d)).collect::<Result<Vec<_>>>()?;
                gen_union(&realized)
            }
            SequenceSpec::Perturbed { base, delta, scale } => {
                gen_perturbed(&base.truncate_natural(d)?, &delta.truncate_natural(d)?, *scale)
            }
            SequenceSpec::Explicit { matrix } => Ok(TruncatedSequence::new(matrix.to_dense()?)),
        }
        .map(|mut s| {
            s.level = LadderLevel::new(d);
            s
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SequenceSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("sequence spec JSON: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// `N` vectors in a `d`-dimensional complex space, stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSequence {
    vectors: DenseMatrix,
    pub spec: Option<SequenceSpec>,
    pub level: LadderLevel,
}

impl TruncatedSequence {
    /// Wraps the columns of `vectors` as a sequence with no generating spec.
    pub fn new(vectors: DenseMatrix) -> Self {
        let d = vectors.nrows();
        TruncatedSequence { vectors, spec: None, level: LadderLevel::new(d) }
    }

    pub fn from_columns(dim: usize, columns: &[DVector<C64>]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidSpec("sequence needs at least one vector".into()));
        }
        Ok(Self::new(DenseMatrix::from_columns(dim, columns)?))
    }

    /// Attaches an explicit spec carrying the vector data.
    pub fn with_explicit_spec(mut self) -> Self {
        self.spec = Some(SequenceSpec::Explicit { matrix: ExplicitMatrix::from_dense(self.vectors.inner()) });
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn count(&self) -> usize {
        self.vectors.ncols()
    }

    /// The `d x N` synthesis matrix `F` whose columns are the vectors.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.vectors
    }

    pub fn vector(&self, n: usize) -> DVector<C64> {
        self.vectors.column(n).into_owned()
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.count()).map(|n| self.vectors.column(n).norm()).collect()
    }

    /// Applies a linear map to every vector.
    pub fn map_linear(&self, op: &DenseMatrix) -> Result<TruncatedSequence> {
        if op.ncols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator with {} columns applied to vectors of dimension {}",
                op.ncols(),
                self.ambient_dim()
            )));
        }
        Ok(TruncatedSequence {
            vectors: DenseMatrix::trusted(op.inner() * self.vectors.inner()),
            spec: None,
            level: self.level,
        })
    }

    /// Sequence scaled by `c`.
    pub fn scaled(&self, c: f64) -> TruncatedSequence {
        TruncatedSequence {
            vectors: DenseMatrix::trusted(self.vectors.inner() * C64::new(c, 0.0)),
            spec: None,
            level: self.level,
        }
    }

    /// Subsequence at the given indices.
    pub fn select(&self, indices: &[usize]) -> Result<TruncatedSequence> {
        if indices.is_empty() {
            return Err(Error::InvalidSpec("empty subsequence".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.count()) {
            return Err(Error::DimensionMismatch(format!("index {bad} out of {}", self.count())));
        }
        let cols: Vec<DVector<C64>> = indices.iter().map(|&i| self.vector(i)).collect();
        TruncatedSequence::from_columns(self.ambient_dim(), &cols)
    }

    /// Pads every vector with zero coordinates up to dimension `d`.
    pub fn padded(&self, d: usize) -> Result<TruncatedSequence> {
        if d < self.ambient_dim() {
            return Err(Error::DimensionMismatch(format!("cannot pad {} down to {d}", self.ambient_dim())));
        }
        let src = self.vectors.inner();
        let m =
            DMatrix::from_fn(d, self.count(), |i, j| if i < src.nrows() { src[(i, j)] } else { C64::new(0.0, 0.0) });
        Ok(TruncatedSequence { vectors: DenseMatrix::trusted(m), spec: None, level: self.level })
    }
}
