//! Classification of sequences along a truncation ladder.
//!
//! Every verdict here is evidence read off finite truncations: trajectories
//! of spectral quantities over the last few ladder levels are tested for
//! boundedness, and `sigma_k` of the analysis matrix stands in for the best
//! lower bound on a `k`-dimensional subspace.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, build_converter, PARSEVAL_TOL};
use crate::numerics::{self, eigvals_hermitian, svd, DenseMatrix, SpectralTolerance, C64};
use crate::sequences::{
    gen_parseval_blocks, gen_zero_sum_subspace_basis, LadderLevel, LadderSchedule, SequenceSpec, TruncatedSequence,
};
use crate::verdict::{aitken_limit, bounded_above, bounded_below, loglog_slope, Trend, TrendOptions, Verdict};

pub const DEFAULT_K_MAX: usize = 32;
pub const DEFAULT_TAU: f64 = 1e-3;
pub const DEFAULT_WINDOW: usize = 3;

/// Anything that yields a finite truncation per ladder level.
pub trait SequenceSource: Sync {
    fn realize(&self, level: LadderLevel) -> Result<TruncatedSequence>;

    fn describe(&self) -> String {
        "sequence".into()
    }
}

impl SequenceSource for SequenceSpec {
    fn realize(&self, level: LadderLevel) -> Result<TruncatedSequence> {
        self.truncate(level)
    }

    fn describe(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

/// Adapts a closure into a [`SequenceSource`].
pub struct FnSource<F>(pub F);

impl<F> SequenceSource for FnSource<F>
where
    F: Fn(LadderLevel) -> Result<TruncatedSequence> + Sync,
{
    fn realize(&self, level: LadderLevel) -> Result<TruncatedSequence> {
        (self.0)(level)
    }
}

fn realize_all<S: SequenceSource + ?Sized, T: Send>(
    source: &S,
    levels: &[LadderLevel],
    f: impl Fn(LadderLevel, TruncatedSequence) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    levels.par_iter().map(|&l| source.realize(l).and_then(|s| f(l, s))).collect()
}

fn require_ladder(ladder: &LadderSchedule) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InvalidLadder("ladder has no levels".into()));
    }
    Ok(())
}

/// Leading singular values of the analysis matrix at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaRow {
    pub level: LadderLevel,
    pub ambient_dim: usize,
    pub count: usize,
    /// `sigma_1 >= sigma_2 >= ...`, at most `k_max` entries.
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaProfile {
    pub k_max: usize,
    pub rows: Vec<SigmaRow>,
}

impl SigmaProfile {
    /// `(level_d, level_N, k, sigma_k)` with `k` starting at 1.
    pub fn csv_rows(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.rows.iter().flat_map(|r| r.sigma.iter().enumerate().map(move |(k, &s)| (r.level.d, r.count, k + 1, s)))
    }

    pub fn scaled(&self, c: f64) -> SigmaProfile {
        let rows = self
            .rows
            .iter()
            .map(|r| SigmaRow { sigma: r.sigma.iter().map(|s| s * c).collect(), ..r.clone() })
            .collect();
        SigmaProfile { k_max: self.k_max, rows }
    }
}

/// Top-`k_max` singular values of the analysis matrix at every level.
pub fn sigma_profile<S: SequenceSource + ?Sized>(
    source: &S,
    ladder: &LadderSchedule,
    k_max: usize,
) -> Result<SigmaProfile> {
    require_ladder(ladder)?;
    let rows = realize_all(source, &ladder.levels, |level, seq| {
        let mut sigma = numerics::singular_values(seq.matrix());
        sigma.truncate(k_max);
        Ok(SigmaRow { level, ambient_dim: seq.ambient_dim(), count: seq.count(), sigma })
    })?;
    Ok(SigmaProfile { k_max, rows })
}

/// Verdict on the existence of uniformly lower-bounded large subspaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfcVerdict {
    pub verdict: Verdict,
    /// Range of `k` carrying the verdict: all `k` above `tau` when it holds,
    /// from the first `k` below `tau` when it fails.
    pub k_range: Option<(usize, usize)>,
    /// Fitted exponent `p` in `sigma_k ~ k^p` at the last level.
    pub decay_exponent: Option<f64>,
    /// `sigma_{k_eff}` at the last level.
    pub tail_sigma: f64,
    pub label: String,
}

pub fn cfc_verdict(profile: &SigmaProfile, tau: f64, window: usize) -> CfcVerdict {
    cfc_verdict_with(profile, tau, &TrendOptions { window, ..TrendOptions::default() })
}

pub fn cfc_verdict_with(profile: &SigmaProfile, tau: f64, opts: &TrendOptions) -> CfcVerdict {
    let verdict = |verdict, k_range, decay_exponent, tail_sigma| CfcVerdict {
        verdict,
        k_range,
        decay_exponent,
        tail_sigma,
        label: "EVIDENCE".into(),
    };
    let Some(last) = profile.rows.last() else {
        return verdict(Verdict::Inconclusive, None, None, 0.0);
    };
    let s = &last.sigma;
    let k_eff = s.len();
    let tail_sigma = s.last().copied().unwrap_or(0.0);
    // exponent over the upper half of the k range, where the asymptotics show
    let from = k_eff / 2;
    let (ks, vs): (Vec<f64>, Vec<f64>) = (from..k_eff).filter(|&i| s[i] > 0.0).map(|i| ((i + 1) as f64, s[i])).unzip();
    let decay_exponent = loglog_slope(&ks, &vs);
    if profile.rows.len() < opts.window.max(1) || k_eff == 0 {
        return verdict(Verdict::Inconclusive, None, decay_exponent, tail_sigma);
    }
    let window = &profile.rows[profile.rows.len() - opts.window.max(1)..];
    let hi = tau * (1.0 + opts.tie_rtol);
    let lo = tau * (1.0 - opts.tie_rtol);

    let first = window[0].sigma.get(k_eff - 1).copied().unwrap_or(0.0);
    let rescued = tail_sigma > first * (1.0 + opts.stability_rtol);
    let vanishing = tail_sigma == 0.0 || decay_exponent.is_some_and(|p| p < 0.0);
    let limit = if k_eff >= 4 { aitken_limit(s[k_eff / 4 - 1], s[k_eff / 2 - 1], s[k_eff - 1]) } else { None };
    let extrapolates_below = decay_exponent.is_some_and(|p| p <= -opts.slope) && limit.is_none_or(|l| l < lo);
    if !rescued && vanishing && (tail_sigma < lo || extrapolates_below) {
        let k0 = s.iter().position(|&v| v < lo).map_or(k_eff, |i| i + 1);
        return verdict(Verdict::Fails, Some((k0, k_eff)), decay_exponent, tail_sigma);
    }
    if window.iter().all(|r| !r.sigma.is_empty() && r.sigma.iter().all(|&v| v > hi)) {
        return verdict(Verdict::Holds, Some((1, k_eff)), decay_exponent, tail_sigma);
    }
    verdict(Verdict::Inconclusive, None, decay_exponent, tail_sigma)
}

/// `lambda_min(F* F)`: the optimal Riesz-Fischer constant at this truncation.
pub fn riesz_fischer_margin(seq: &TruncatedSequence, tol: &SpectralTolerance) -> Result<f64> {
    let g = frame::gram_matrix(seq);
    Ok(eigvals_hermitian(&g, tol)?.first().copied().unwrap_or(0.0).max(0.0))
}

/// `max_{n,k} |<f_n, g_k> - delta_{nk}|`.
pub fn biorthogonality_check(f: &TruncatedSequence, g: &TruncatedSequence) -> Result<f64> {
    if f.ambient_dim() != g.ambient_dim() || f.count() != g.count() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} against {}x{}",
            f.ambient_dim(),
            f.count(),
            g.ambient_dim(),
            g.count()
        )));
    }
    // (G* F)[k, n] = <f_n, g_k>
    let p = g.matrix().adjoint().into_inner() * f.matrix().inner();
    let mut worst = 0.0f64;
    for k in 0..p.nrows() {
        for n in 0..p.ncols() {
            let delta = if k == n { 1.0 } else { 0.0 };
            worst = worst.max((p[(k, n)] - C64::new(delta, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// Which subspace to offer the converter at each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Span of the left singular vectors of `F` with `sigma > tau`.
    Singular,
    /// `{a : sum a_k = 0}`.
    ZeroSum,
    /// Range of the analysis operator of the Parseval block frame at `d`
    /// (for sequences living in the block coordinate space).
    BlockRange,
    /// The whole space.
    Full,
}

/// Orthonormal basis of the witness subspace at one level.
pub fn witness_basis(kind: WitnessKind, level: LadderLevel, seq: &TruncatedSequence, tau: f64) -> Result<DenseMatrix> {
    let d = seq.ambient_dim();
    match kind {
        WitnessKind::Full => Ok(DenseMatrix::identity(d)),
        WitnessKind::ZeroSum => gen_zero_sum_subspace_basis(d),
        WitnessKind::BlockRange => {
            let g = gen_parseval_blocks(level.d)?;
            let a = frame::analysis_matrix(&g);
            if a.matrix().nrows() != d {
                return Err(Error::DimensionMismatch(format!(
                    "block range lives in dimension {}, sequence in {d}",
                    a.matrix().nrows()
                )));
            }
            Ok(a.matrix().clone())
        }
        WitnessKind::Singular => {
            let s = svd(seq.matrix())?;
            let keep = s.singular_values.iter().filter(|&&v| v > tau).count();
            if keep == 0 {
                return Err(Error::LowerBoundTooSmall {
                    lower: s.singular_values.first().copied().unwrap_or(0.0),
                    tol: tau,
                });
            }
            DenseMatrix::new(s.u.inner().columns(0, keep).into_owned())
        }
    }
}

/// Converter diagnostics for one witness at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessLevel {
    pub level: LadderLevel,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub lower: f64,
    pub upper: f64,
    pub rank_b: usize,
    pub parseval_residual: f64,
    pub surjective_flag: bool,
    pub injective_flag: bool,
    /// `max_{j < probe} ||P_{D-perp} e_j||^2`.
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub kind: WitnessKind,
    pub levels: Vec<WitnessLevel>,
    pub error: Option<String>,
    pub lower_trend: Option<Trend>,
    pub upper_trend: Option<Trend>,
    pub scfc_pass: bool,
    pub icfc_pass: bool,
}

fn evaluate_witness<S: SequenceSource + ?Sized>(
    source: &S,
    kind: WitnessKind,
    levels: &[LadderLevel],
    opts: &ClassifyOptions,
) -> WitnessCertificate {
    let run = realize_all(source, levels, |level, seq| {
        let q = witness_basis(kind, level, &seq, opts.tau)?;
        let c = build_converter(&seq, &q, &opts.tol)?;
        let probe = opts.probe_coords.min(q.nrows());
        let leakage = (0..probe)
            .map(|j| 1.0 - q.inner().row(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .fold(0.0f64, f64::max)
            .max(0.0);
        Ok(WitnessLevel {
            level,
            ambient_dim: c.ambient_dim,
            subspace_dim: c.subspace_dim,
            lower: c.restricted_bounds.lower,
            upper: c.restricted_bounds.upper,
            rank_b: c.rank,
            parseval_residual: c.parseval_residual,
            surjective_flag: c.surjective_flag && c.verified,
            injective_flag: c.injective_flag && c.verified,
            leakage,
        })
    });
    let levels = match run {
        Ok(l) => l,
        Err(e) => {
            return WitnessCertificate {
                kind,
                levels: vec![],
                error: Some(e.to_string()),
                lower_trend: None,
                upper_trend: None,
                scfc_pass: false,
                icfc_pass: false,
            }
        }
    };
    let trend = opts.trend();
    let xs: Vec<f64> = levels.iter().map(|l| l.level.d as f64).collect();
    let lows: Vec<f64> = levels.iter().map(|l| l.lower).collect();
    let ups: Vec<f64> = levels.iter().map(|l| l.upper).collect();
    let lower_trend = bounded_below(&xs, &lows, opts.tau * opts.tau, &trend);
    let upper_trend = bounded_above(&xs, &ups, &trend);
    let verified = levels.iter().all(|l| l.parseval_residual <= PARSEVAL_TOL);
    let onto = levels.iter().all(|l| l.rank_b == l.subspace_dim);
    let dims_grow = levels.windows(2).all(|w| w[1].subspace_dim > w[0].subspace_dim);
    let scfc_pass = verified && onto && dims_grow && lower_trend.verdict.holds() && upper_trend.verdict.holds();
    let last = levels.last();
    let leak_ok = last.is_some_and(|l| l.leakage <= opts.leakage_tol)
        && levels.windows(2).all(|w| w[1].leakage <= w[0].leakage * (1.0 + opts.stability_rtol) + 1e-15);
    let frac = |l: &WitnessLevel| l.subspace_dim as f64 / l.ambient_dim as f64;
    let dense = last.is_some_and(|l| frac(l) >= 1.0 - opts.leakage_tol)
        && levels.windows(2).all(|w| frac(&w[1]) >= frac(&w[0]) - 1e-15);
    let icfc_pass = verified && onto && leak_ok && dense && lower_trend.verdict.holds();
    WitnessCertificate {
        kind,
        levels,
        error: None,
        lower_trend: Some(lower_trend),
        upper_trend: Some(upper_trend),
        scfc_pass,
        icfc_pass,
    }
}

/// Caller-asserted hypothesis class for the norm criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchauderHypothesis {
    UnconditionalSchauderBasis,
    NormalizedBesselBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub tau: f64,
    pub k_max: usize,
    pub window: usize,
    pub tol: SpectralTolerance,
    pub stability_rtol: f64,
    pub growth_slope: f64,
    pub tie_rtol: f64,
    pub witnesses: Vec<WitnessKind>,
    /// Coordinates `e_0 .. e_{probe-1}` used to test witness density.
    pub probe_coords: usize,
    pub leakage_tol: f64,
    /// Rank deficiency tolerated before a truncation counts as incomplete.
    pub declared_deficiency: usize,
    pub schauder: Option<SchauderHypothesis>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tau: DEFAULT_TAU,
            k_max: DEFAULT_K_MAX,
            window: DEFAULT_WINDOW,
            tol: SpectralTolerance::default(),
            stability_rtol: 1e-6,
            growth_slope: 0.1,
            tie_rtol: 1e-9,
            witnesses: vec![WitnessKind::Singular],
            probe_coords: 8,
            leakage_tol: 0.05,
            declared_deficiency: 0,
            schauder: None,
        }
    }
}

impl ClassifyOptions {
    pub fn trend(&self) -> TrendOptions {
        TrendOptions {
            window: self.window,
            stability_rtol: self.stability_rtol,
            slope: self.growth_slope,
            tie_rtol: self.tie_rtol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.tau) {
            return Err(Error::InvalidTolerance(format!("tau must be > 0, got {}", self.tau)));
        }
        if self.k_max == 0 || self.window == 0 {
            return Err(Error::InvalidTolerance("k_max and window must be at least 1".into()));
        }
        SpectralTolerance::new(self.tol.rank_tol, self.tol.sym_tol)?;
        Ok(())
    }
}

/// Spectral summary of one truncation, all derived from one SVD of `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpectrum {
    pub level: LadderLevel,
    pub ambient_dim: usize,
    pub count: usize,
    /// `lambda_min(S)` on the whole space.
    pub frame_lower: f64,
    /// `lambda_max(S)`.
    pub frame_upper: f64,
    /// `lambda_min(F* F)`.
    pub gram_lower: f64,
    pub rank: usize,
    pub deficiency: usize,
    pub sigma: Vec<f64>,
}

fn level_spectrum(level: LadderLevel, seq: &TruncatedSequence, tol: &SpectralTolerance) -> LevelSpectrum {
    let sigma = numerics::singular_values(seq.matrix());
    let (d, n) = (seq.ambient_dim(), seq.count());
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().filter(|&&s| s > tol.rank_tol * smax).count();
    let last_sq = sigma.last().map_or(0.0, |s| s * s);
    LevelSpectrum {
        level,
        ambient_dim: d,
        count: n,
        frame_lower: if n >= d { last_sq } else { 0.0 },
        frame_upper: smax * smax,
        gram_lower: if n <= d { last_sq } else { 0.0 },
        rank,
        deficiency: d - rank,
        sigma,
    }
}

/// Tail behaviour of `||f_n||` under a caller-asserted hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCriterion {
    pub hypothesis: SchauderHypothesis,
    /// `(level d, min, max)` of the norms over the last quarter of indices.
    pub tail: Vec<(usize, f64, f64)>,
    /// Exponent `p` in `||f_n|| ~ n^p` over the tail of the last level.
    pub fitted_exponent: Option<f64>,
    /// Whether `||f_n|| -> 0`.
    pub norms_vanish: Verdict,
    /// CFC as read from the norms: holds iff the norms do not vanish.
    pub cfc: Verdict,
    /// `inf ||f_n|| > 0` (unconditional bases only).
    pub co: Verdict,
    pub sigma_cfc: Verdict,
    pub agrees_with_sigma_profile: bool,
}

/// Norm criterion: not CFC iff `||f_n|| -> 0` for unconditional Schauder
/// bases and Bessel-normalizable sequences. The hypothesis is not verified.
pub fn schauder_norm_criterion<S: SequenceSource + ?Sized>(
    source: &S,
    ladder: &LadderSchedule,
    hypothesis: Option<SchauderHypothesis>,
    opts: &ClassifyOptions,
) -> Result<NormCriterion> {
    let hypothesis = hypothesis.ok_or(Error::HypothesisNotAsserted)?;
    require_ladder(ladder)?;
    let norms = realize_all(source, &ladder.levels, |l, s| Ok((l.d, s.norms())))?;
    let trend = opts.trend();
    let tail: Vec<(usize, f64, f64)> = norms
        .iter()
        .map(|(d, v)| {
            let t = &v[v.len() - (v.len() / 4).max(1)..];
            (*d, t.iter().cloned().fold(f64::INFINITY, f64::min), t.iter().cloned().fold(0.0, f64::max))
        })
        .collect();
    let last = &norms.last().unwrap().1;
    let start = last.len() - (last.len() / 4).max(2).min(last.len());
    let (ix, iv): (Vec<f64>, Vec<f64>) =
        (start..last.len()).filter(|&i| last[i] > 0.0).map(|i| ((i + 1) as f64, last[i])).unzip();
    let fitted_exponent = loglog_slope(&ix, &iv);
    let xs: Vec<f64> = tail.iter().map(|t| t.0 as f64).collect();
    let mins: Vec<f64> = tail.iter().map(|t| t.1).collect();
    let below = bounded_below(&xs, &mins, opts.tau, &trend);
    let norms_vanish = if below.verdict == Verdict::Fails || fitted_exponent.is_some_and(|p| p <= -opts.growth_slope) {
        Verdict::Holds
    } else if below.verdict == Verdict::Holds {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    let cfc = match norms_vanish {
        Verdict::Holds => Verdict::Fails,
        Verdict::Fails => Verdict::Holds,
        Verdict::Inconclusive => Verdict::Inconclusive,
    };
    let co = match hypothesis {
        SchauderHypothesis::UnconditionalSchauderBasis => {
            let infs: Vec<f64> = norms.iter().map(|(_, v)| v.iter().cloned().fold(f64::INFINITY, f64::min)).collect();
            bounded_below(&xs, &infs, opts.tau, &trend).verdict
        }
        SchauderHypothesis::NormalizedBesselBound => Verdict::Inconclusive,
    };
    let profile = sigma_profile(source, ladder, opts.k_max)?;
    let sigma_cfc = cfc_verdict_with(&profile, opts.tau, &trend).verdict;
    let agrees = cfc == sigma_cfc || cfc == Verdict::Inconclusive || sigma_cfc == Verdict::Inconclusive;
    Ok(NormCriterion {
        hypothesis,
        tail,
        fitted_exponent,
        norms_vanish,
        cfc,
        co,
        sigma_cfc,
        agrees_with_sigma_profile: agrees,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    /// `(level d, lambda_max of the difference frame operator)`.
    pub bessel_bounds: Vec<(usize, f64)>,
    pub sup_bound: f64,
    /// `1 / ||B||^2`.
    pub threshold: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub cfc_of_g: CfcVerdict,
}

/// Stability of CFC under perturbations whose difference sequence has Bessel
/// bound below `1 / ||B||^2`. The test is sufficient only: it never fails.
pub fn perturbation_cfc<F: SequenceSource + ?Sized, G: SequenceSource + ?Sized>(
    f: &F,
    g: &G,
    converter_norm: f64,
    ladder: &LadderSchedule,
    opts: &ClassifyOptions,
) -> Result<PerturbationReport> {
    require_ladder(ladder)?;
    if !(converter_norm > 0.0 && converter_norm.is_finite()) {
        return Err(Error::InvalidTolerance(format!("converter norm must be > 0, got {converter_norm}")));
    }
    let bessel_bounds: Vec<(usize, f64)> = ladder
        .levels
        .par_iter()
        .map(|&l| {
            let (a, b) = (f.realize(l)?, g.realize(l)?);
            if a.ambient_dim() != b.ambient_dim() || a.count() != b.count() {
                return Err(Error::DimensionMismatch(format!("perturbation changes the shape at d = {}", l.d)));
            }
            let diff = DenseMatrix::trusted(b.matrix().inner() - a.matrix().inner());
            let s = numerics::spectral_norm(&diff);
            Ok((l.d, s * s))
        })
        .collect::<Result<_>>()?;
    let sup_bound = bessel_bounds.iter().map(|b| b.1).fold(0.0, f64::max);
    let threshold = 1.0 / (converter_norm * converter_norm);
    let margin = 1e-9 * threshold;
    let verdict = if sup_bound < threshold - margin { Verdict::Holds } else { Verdict::Inconclusive };
    let profile = sigma_profile(g, ladder, opts.k_max)?;
    let cfc_of_g = cfc_verdict_with(&profile, opts.tau, &opts.trend());
    Ok(PerturbationReport { bessel_bounds, sup_bound, threshold, margin, verdict, cfc_of_g })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    SummableEvidence,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTrajectory {
    pub index: usize,
    /// `sum_n |<b_i, f_n>|^2` at each ladder level.
    pub values: Vec<f64>,
    pub slope: Option<f64>,
    pub status: ProbeStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionProbe {
    pub levels: Vec<usize>,
    pub candidates: Vec<CandidateTrajectory>,
}

/// Growth of `sum_n |<b_i, f_n>|^2` for candidate vectors `b_i` supplied per
/// level as orthonormal columns.
pub fn extension_domain_probe<S, C>(
    source: &S,
    ladder: &LadderSchedule,
    candidates: C,
    opts: &ClassifyOptions,
) -> Result<ExtensionProbe>
where
    S: SequenceSource + ?Sized,
    C: Fn(LadderLevel, &TruncatedSequence) -> Result<DenseMatrix> + Sync,
{
    require_ladder(ladder)?;
    let per_level = realize_all(source, &ladder.levels, |level, seq| {
        let b = candidates(level, &seq)?;
        if b.nrows() != seq.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "candidates of dimension {} for a sequence in dimension {}",
                b.nrows(),
                seq.ambient_dim()
            )));
        }
        let dev = numerics::orthonormality_defect(&b);
        if dev > frame::ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
        // rows of B* F hold <f_n, b_i>
        let p = b.adjoint().into_inner() * seq.matrix().inner();
        Ok(p.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>()).collect::<Vec<f64>>())
    })?;
    let m = per_level.iter().map(Vec::len).min().unwrap_or(0);
    let xs: Vec<f64> = ladder.levels.iter().map(|l| l.d as f64).collect();
    let w = opts.window.max(2).min(xs.len());
    let candidates = (0..m)
        .map(|i| {
            let values: Vec<f64> = per_level.iter().map(|v| v[i]).collect();
            let tail = &values[values.len() - w..];
            let slope = loglog_slope(&xs[xs.len() - w..], tail);
            let stable = tail.windows(2).all(|p| p[1] == 0.0 || ((p[1] - p[0]) / p[1]).abs() < 1e-6);
            let growing = tail.windows(2).all(|p| p[1] > p[0]);
            let status = if stable {
                ProbeStatus::SummableEvidence
            } else if growing && slope.is_some_and(|s| s >= opts.growth_slope) {
                ProbeStatus::Divergent
            } else {
                ProbeStatus::Inconclusive
            };
            CandidateTrajectory { index: i, values, slope, status }
        })
        .collect();
    Ok(ExtensionProbe { levels: ladder.levels.iter().map(|l| l.d).collect(), candidates })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub bessel: Verdict,
    pub lower_semi_frame: Verdict,
    pub frame: Verdict,
    pub parseval: Verdict,
    pub riesz: Verdict,
    pub riesz_fischer: Verdict,
    pub cfc: Verdict,
    pub scfc_evidence: Verdict,
    pub icfc_evidence: Verdict,
    pub schauder_norm_criterion: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub levels: Vec<LevelSpectrum>,
    pub bessel: Trend,
    pub lower_semi_frame: Trend,
    pub riesz_fischer: Trend,
    /// Rank deficiency when it is the same nonzero value at every window level.
    pub persistent_deficiency: Option<usize>,
    pub cfc: CfcVerdict,
    pub witnesses: Vec<WitnessCertificate>,
    pub norm_criterion: Option<NormCriterion>,
    pub sigma_profile: SigmaProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub label: String,
    pub source: String,
    pub ladder: LadderSchedule,
    pub flags: ClassFlags,
    pub certificates: Certificates,
    pub options: ClassifyOptions,
}

/// Evaluates every class flag along the ladder.
pub fn class_flags<S: SequenceSource + ?Sized>(
    source: &S,
    ladder: &LadderSchedule,
    opts: &ClassifyOptions,
) -> Result<ClassificationReport> {
    opts.validate()?;
    require_ladder(ladder)?;
    let trend = opts.trend();
    let levels = realize_all(source, &ladder.levels, |l, s| Ok(level_spectrum(l, &s, &opts.tol)))?;
    let xs: Vec<f64> = levels.iter().map(|l| l.level.d as f64).collect();
    let col = |f: fn(&LevelSpectrum) -> f64| levels.iter().map(f).collect::<Vec<f64>>();

    let bessel_t = bounded_above(&xs, &col(|l| l.frame_upper), &trend);
    let lsf_t = bounded_below(&xs, &col(|l| l.frame_lower), opts.tau, &trend);
    let rf_t = bounded_below(&xs, &col(|l| l.gram_lower), opts.tau, &trend);
    let frame = bessel_t.verdict.and(lsf_t.verdict);

    let w = opts.window.min(levels.len());
    let window = &levels[levels.len() - w..];
    let ptol = PARSEVAL_TOL;
    let parseval_bounds =
        window.iter().all(|l| (l.frame_lower - 1.0).abs() <= ptol && (l.frame_upper - 1.0).abs() <= ptol);
    let parseval = if parseval_bounds { frame } else { Verdict::Fails };

    let complete =
        if window.iter().all(|l| l.deficiency <= opts.declared_deficiency) { Verdict::Holds } else { Verdict::Fails };
    let riesz = bessel_t.verdict.and(rf_t.verdict).and(complete);
    let persistent_deficiency = match window.first() {
        Some(f) if f.deficiency > 0 && window.iter().all(|l| l.deficiency == f.deficiency) => Some(f.deficiency),
        _ => None,
    };

    let profile = SigmaProfile {
        k_max: opts.k_max,
        rows: levels
            .iter()
            .map(|l| SigmaRow {
                level: l.level,
                ambient_dim: l.ambient_dim,
                count: l.count,
                sigma: l.sigma.iter().copied().take(opts.k_max).collect(),
            })
            .collect(),
    };
    let cfc = cfc_verdict_with(&profile, opts.tau, &trend);

    let window_levels: Vec<LadderLevel> = window.iter().map(|l| l.level).collect();
    let witnesses: Vec<WitnessCertificate> = if cfc.verdict == Verdict::Fails {
        Vec::new()
    } else {
        opts.witnesses.iter().map(|&k| evaluate_witness(source, k, &window_levels, opts)).collect()
    };
    let from_witnesses = |pass: fn(&WitnessCertificate) -> bool| match cfc.verdict {
        Verdict::Fails => Verdict::Fails,
        _ if witnesses.iter().any(pass) => Verdict::Holds,
        _ => Verdict::Inconclusive,
    };
    let scfc_evidence = from_witnesses(|w| w.scfc_pass);
    let icfc_evidence = from_witnesses(|w| w.icfc_pass);

    let norm_criterion = match opts.schauder {
        Some(h) => Some(schauder_norm_criterion(source, ladder, Some(h), opts)?),
        None => None,
    };
    let schauder_flag = norm_criterion.as_ref().map_or(Verdict::Inconclusive, |n| n.cfc);

    let flags = ClassFlags {
        bessel: bessel_t.verdict,
        lower_semi_frame: lsf_t.verdict,
        frame,
        parseval,
        riesz,
        riesz_fischer: rf_t.verdict,
        cfc: cfc.verdict,
        scfc_evidence,
        icfc_evidence,
        schauder_norm_criterion: schauder_flag,
    };
    Ok(ClassificationReport {
        label: "EVIDENCE".into(),
        source: source.describe(),
        ladder: ladder.clone(),
        flags,
        certificates: Certificates {
            levels,
            bessel: bessel_t,
            lower_semi_frame: lsf_t,
            riesz_fischer: rf_t,
            persistent_deficiency,
            cfc,
            witnesses,
            norm_criterion,
            sigma_profile: profile,
        },
        options: opts.clone(),
    })
}
