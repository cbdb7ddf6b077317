//! Frame-theoretic classification of vector sequences on finite truncations.
//!
//! A sequence `{f_n}` is described by a [`SequenceSpec`] and realized at the
//! levels of a [`LadderSchedule`]. The crate computes frame operators,
//! Parseval converters, singular-value profiles and the resulting class
//! verdicts, plus exponential systems in `L^2(mu)` for measures on `[0, 1)`
//! and the Kaczmarz reconstruction built on them.
//!
//! Conventions: the vectors of a truncation are the columns of a `d x N`
//! matrix `F`; the analysis matrix is `A = F*`, the frame operator
//! `S = F F*` and the Gram matrix `F* F` with `G[n, m] = <f_m, f_n>`.
//! Inner products are linear in the first slot.

pub mod classify;
pub mod error;
pub mod frame;
pub mod gallery;
pub mod kaczmarz;
pub mod measures;
pub mod numerics;
pub mod sequences;
pub mod verdict;

pub use classify::{
    cfc_verdict, class_flags, ClassificationReport, ClassifyOptions, FnSource, SequenceSource, SigmaProfile,
    WitnessKind,
};
pub use error::{Error, Result};
pub use frame::{build_converter, canonical_parseval, frame_bounds, ConverterResult, FrameBounds};
pub use measures::{CoefficientSpaceElement, ExponentialWindow, MeasureModel, MeasureRef, Realization};
pub use numerics::{DenseMatrix, SpectralTolerance, C64};
pub use sequences::{LadderLevel, LadderSchedule, SequenceSpec, TruncatedSequence, WeightFormula};
pub use verdict::Verdict;
