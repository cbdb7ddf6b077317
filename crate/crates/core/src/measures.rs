//! Probability measures on `[0, 1)`, their Fourier coefficients, and the
//! exponential system `{e^{2 pi i n x}}` viewed inside `L^2(mu)`.
//!
//! Singular parts are never sampled pointwise: every computation with a
//! Cantor component goes through the Gram matrix `G[n, m] = mu^(n - m)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{eigvals_hermitian, psd_sqrt, DenseMatrix, SpectralTolerance, C64, ONE, ZERO};
use crate::sequences::TruncatedSequence;
use crate::verdict::{bounded_above, bounded_below, TrendOptions, Verdict};

/// Mass normalization accepted when validating a model.
pub const MASS_TOL: f64 = 1e-8;
/// Default bound on the neglected Cantor tail in `mu^(k)`.
pub const CANTOR_TAIL_TOL: f64 = 1e-15;
/// Default largest Gram window.
pub const DEFAULT_MAX_WINDOW: usize = 513;

/// Absolutely continuous part, given by its density on `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    /// `g(x) = a + b x`.
    Affine {
        a: f64,
        b: f64,
    },
    Constant {
        c: f64,
    },
    /// Piecewise constant: `g = gs[i]` on `[xs[i], xs[i+1])`, last cell ends at 1.
    Grid {
        xs: Vec<f64>,
        gs: Vec<f64>,
    },
}

impl Density {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMeasure(m));
        match self {
            Density::Affine { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return bad("affine density has non-finite parameters".into());
                }
                if *a < 0.0 || a + b < 0.0 {
                    return bad(format!("affine density {a} + {b} x is negative on [0,1)"));
                }
            }
            Density::Constant { c } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return bad(format!("constant density {c} must be finite and nonnegative"));
                }
            }
            Density::Grid { xs, gs } => {
                if xs.is_empty() || xs.len() != gs.len() {
                    return bad("grid density needs matching non-empty xs and gs".into());
                }
                if xs[0] != 0.0 {
                    return bad("grid density must start at x = 0".into());
                }
                if xs.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
                    || xs.last().unwrap().partial_cmp(&1.0) != Some(Ordering::Less)
                {
                    return bad("grid cells must be strictly increasing inside [0,1)".into());
                }
                if gs.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
                    return bad("grid density values must be finite and nonnegative".into());
                }
            }
        }
        Ok(())
    }

    fn cells(xs: &[f64]) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..xs.len()).map(move |i| (i, xs[i], if i + 1 < xs.len() { xs[i + 1] } else { 1.0 }))
    }

    pub fn mass(&self) -> f64 {
        match self {
            Density::Affine { a, b } => a + b / 2.0,
            Density::Constant { c } => *c,
            Density::Grid { xs, gs } => Self::cells(xs).map(|(i, l, r)| gs[i] * (r - l)).sum(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Density::Affine { a, b } => a + b * x,
            Density::Constant { c } => *c,
            Density::Grid { xs, gs } => {
                let i = xs.partition_point(|&t| t <= x).saturating_sub(1);
                gs[i]
            }
        }
    }

    /// `(ess inf g, ess sup g)` over `[0, 1)`.
    pub fn ess_range(&self) -> (f64, f64) {
        match self {
            Density::Affine { a, b } => (a.min(a + b), a.max(a + b)),
            Density::Constant { c } => (*c, *c),
            Density::Grid { gs, .. } => {
                (gs.iter().cloned().fold(f64::INFINITY, f64::min), gs.iter().cloned().fold(0.0, f64::max))
            }
        }
    }

    /// `int_0^1 g(x) e^{-2 pi i k x} dx` in closed form.
    pub fn fourier(&self, k: i64) -> C64 {
        if k == 0 {
            return C64::new(self.mass(), 0.0);
        }
        let w = 2.0 * PI * k as f64;
        match self {
            Density::Constant { .. } => ZERO,
            // int x e^{-iwx} over [0,1) = i/w for integer k
            Density::Affine { b, .. } => C64::new(0.0, b / w),
            Density::Grid { xs, gs } => {
                let e = |x: f64| C64::from_polar(1.0, -w * x);
                Self::cells(xs).map(|(i, l, r)| (e(r) - e(l)) * C64::new(0.0, 1.0 / w) * gs[i]).sum()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// Self-similar measure with contraction `ratio`, equal branch weights and
/// translations `digits`, scaled to total mass `mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorPart {
    pub ratio: f64,
    pub digits: Vec<f64>,
    pub mass: f64,
}

impl CantorPart {
    pub fn middle_thirds(mass: f64) -> Self {
        CantorPart { ratio: 1.0 / 3.0, digits: vec![0.0, 2.0 / 3.0], mass }
    }

    fn validate(&self) -> Result<()> {
        let r = self.ratio;
        if !(r > 0.0 && r <= 0.5) {
            return Err(Error::InvalidMeasure(format!("cantor ratio {r} outside (0, 1/2]")));
        }
        if self.digits.is_empty() {
            return Err(Error::InvalidMeasure("cantor part needs at least one digit".into()));
        }
        if self.digits.iter().any(|&d| !(d >= 0.0 && d <= 1.0 - r + 1e-12)) {
            return Err(Error::InvalidMeasure(format!("cantor digits must lie in [0, {}]", 1.0 - r)));
        }
        if !(self.mass.is_finite() && self.mass >= 0.0) {
            return Err(Error::InvalidMeasure(format!("cantor mass {} must be nonnegative", self.mass)));
        }
        Ok(())
    }

    /// Fourier transform of the normalized self-similar measure at `xi`,
    /// together with a bound on the truncation error.
    ///
    /// The product is taken until the remaining factor `mu_c(rho^L xi)` is
    /// within `tail_tol` of `e^{-2 pi i rho^L xi m}`, `m` the mean; the
    /// bound is `(2 pi t)^2 Var / 2` with `Var <= spread^2 / 4`.
    pub fn transform(&self, xi: f64, tail_tol: f64) -> (C64, f64) {
        if xi == 0.0 {
            return (ONE, 0.0);
        }
        let nd = self.digits.len() as f64;
        let r = self.ratio;
        let lo = self.digits.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.digits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spread = (hi - lo) / (1.0 - r);
        let mean = self.digits.iter().sum::<f64>() / nd / (1.0 - r);
        let tail_bound = |t: f64| (2.0 * PI * t * spread).powi(2) / 8.0;
        let mut acc = ONE;
        let mut t = xi;
        for _ in 0..400 {
            if tail_bound(t) <= tail_tol {
                break;
            }
            let s: C64 = self.digits.iter().map(|&d| C64::from_polar(1.0, -2.0 * PI * t * d)).sum();
            acc *= s / nd;
            t *= r;
        }
        let err = tail_bound(t) * acc.norm();
        (acc * C64::from_polar(1.0, -2.0 * PI * t * mean), err)
    }
}

/// Borel probability measure on `[0, 1)`: density + atoms + Cantor part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureModel {
    #[serde(default)]
    pub density: Option<Density>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub cantor: Option<CantorPart>,
}

impl MeasureModel {
    pub fn new(density: Option<Density>, atoms: Vec<Atom>, cantor: Option<CantorPart>) -> Result<Self> {
        let m = MeasureModel { density, atoms, cantor };
        m.validate()?;
        Ok(m)
    }

    pub fn lebesgue() -> Self {
        MeasureModel { density: Some(Density::Constant { c: 1.0 }), atoms: vec![], cantor: None }
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::new(Some(Density::Affine { a, b }), vec![], None)
    }

    pub fn middle_thirds_cantor() -> Self {
        MeasureModel { density: None, atoms: vec![], cantor: Some(CantorPart::middle_thirds(1.0)) }
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(None, vec![Atom { x, w: 1.0 }], None)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = &self.density {
            d.validate()?;
        }
        for a in &self.atoms {
            if !(a.x >= 0.0 && a.x < 1.0) || !(a.w > 0.0 && a.w.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom ({}, {}) needs x in [0,1) and w > 0", a.x, a.w)));
            }
        }
        if let Some(c) = &self.cantor {
            c.validate()?;
        }
        let total = self.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not 1")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: MeasureModel =
            serde_json::from_str(text).map_err(|e| Error::InvalidMeasure(format!("measure JSON: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn density_mass(&self) -> f64 {
        self.density.as_ref().map_or(0.0, Density::mass)
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    pub fn cantor_mass(&self) -> f64 {
        self.cantor.as_ref().map_or(0.0, |c| c.mass)
    }

    /// Mass of the singular part (atoms and Cantor component).
    pub fn singular_mass(&self) -> f64 {
        self.atom_mass() + self.cantor_mass()
    }

    pub fn total_mass(&self) -> f64 {
        self.density_mass() + self.singular_mass()
    }

    pub fn is_density_only(&self) -> bool {
        self.density.is_some() && self.singular_mass() == 0.0
    }

    pub fn is_purely_singular(&self) -> bool {
        self.density_mass() == 0.0
    }

    /// `(ess inf g, ess sup g)` of the absolutely continuous part.
    pub fn density_range(&self) -> (f64, f64) {
        self.density.as_ref().map_or((0.0, 0.0), Density::ess_range)
    }

    /// Fourier coefficient of the absolutely continuous part only.
    pub fn ac_coefficient(&self, k: i64) -> C64 {
        self.density.as_ref().map_or(ZERO, |d| d.fourier(k))
    }

    /// `mu^(k) = int e^{-2 pi i k x} d mu` with the Cantor truncation bound.
    pub fn coefficient_with_bound(&self, k: i64, tail_tol: f64) -> (C64, f64) {
        if k == 0 {
            return (ONE, 0.0);
        }
        let mut v = self.ac_coefficient(k);
        for a in &self.atoms {
            v += C64::from_polar(a.w, -2.0 * PI * k as f64 * a.x);
        }
        let mut err = 0.0;
        if let Some(c) = &self.cantor {
            if c.mass > 0.0 {
                let (z, e) = c.transform(k as f64, tail_tol);
                v += z * c.mass;
                err = e * c.mass;
            }
        }
        (v, err)
    }
}

/// Memoized `mu^(k)`. Reads share the lock; new entries take it exclusively.
#[derive(Debug)]
pub struct FourierCoefficients {
    model: MeasureModel,
    tail_tol: f64,
    max_window: usize,
    cache: RwLock<HashMap<i64, (C64, f64)>>,
}

impl FourierCoefficients {
    pub fn new(model: MeasureModel) -> Self {
        Self::with_options(model, CANTOR_TAIL_TOL, DEFAULT_MAX_WINDOW)
    }

    pub fn with_options(model: MeasureModel, tail_tol: f64, max_window: usize) -> Self {
        FourierCoefficients { model, tail_tol, max_window, cache: RwLock::new(HashMap::new()) }
    }

    pub fn model(&self) -> &MeasureModel {
        &self.model
    }

    fn entry(&self, k: i64) -> (C64, f64) {
        let key = k.abs();
        if let Some(v) = self.cache.read().expect("fourier cache poisoned").get(&key) {
            return *v;
        }
        let v = self.model.coefficient_with_bound(key, self.tail_tol);
        self.cache.write().expect("fourier cache poisoned").insert(key, v);
        v
    }

    /// `mu^(k)`; negative `k` is the exact conjugate of `mu^(-k)`.
    pub fn get(&self, k: i64) -> C64 {
        let (v, _) = self.entry(k);
        if k < 0 {
            v.conj()
        } else {
            v
        }
    }

    /// Bound on the truncation error of `get(k)`.
    pub fn error_bound(&self, k: i64) -> f64 {
        self.entry(k).1
    }

    /// `G[n, m] = <e_m, e_n> = mu^(n - m)` over `window`.
    pub fn gram(&self, window: ExponentialWindow) -> Result<DenseMatrix> {
        window.validate()?;
        let n = window.len();
        if n > self.max_window {
            return Err(Error::InvalidSpec(format!(
                "window of {n} frequencies exceeds the maximum {}",
                self.max_window
            )));
        }
        let diag: Vec<C64> = (0..n as i64).map(|k| self.get(k)).collect();
        let g = DMatrix::from_fn(n, n, |i, j| if i >= j { diag[i - j] } else { diag[j - i].conj() });
        DenseMatrix::new(g)
    }
}

/// Fourier coefficient `mu^(k)` at the default tail tolerance.
pub fn fourier_coefficient(model: &MeasureModel, k: i64) -> C64 {
    model.coefficient_with_bound(k, CANTOR_TAIL_TOL).0
}

/// Gram matrix of the exponentials in `window` inside `L^2(mu)`.
pub fn gram_exponentials(model: &MeasureModel, window: ExponentialWindow) -> Result<DenseMatrix> {
    FourierCoefficients::new(model.clone()).gram(window)
}

/// Inclusive frequency range `n_min..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentialWindow {
    pub n_min: i64,
    pub n_max: i64,
}

impl ExponentialWindow {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        let w = ExponentialWindow { n_min, n_max };
        w.validate()?;
        Ok(w)
    }

    pub fn symmetric(w: i64) -> Result<Self> {
        Self::new(-w, w)
    }

    pub fn one_sided(w: i64) -> Result<Self> {
        Self::new(0, w)
    }

    /// `d` consecutive frequencies: `[0, d-1]` or centred on zero.
    pub fn for_level(d: usize, one_sided: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidLadder("exponential window needs d >= 1".into()));
        }
        let d = d as i64;
        if one_sided {
            Self::new(0, d - 1)
        } else {
            let lo = -(d / 2);
            Self::new(lo, lo + d - 1)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min > self.n_max {
            return Err(Error::InvalidSpec(format!("window [{}, {}] is empty", self.n_min, self.n_max)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_min && n <= self.n_max
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_min) as usize)
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }
}

/// How exponentials become finite vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    /// Midpoint samples weighted by the density (density-only measures).
    Grid { points: usize },
    /// Columns of `G^{1/2}`: an isometric copy of the span of the window.
    #[default]
    CoefficientSpace,
}

/// Named gallery measure or an inline model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureRef {
    Named(String),
    Inline(MeasureModel),
}

impl MeasureRef {
    pub fn resolve(&self) -> Result<MeasureModel> {
        match self {
            MeasureRef::Named(name) => crate::gallery::measure(name),
            MeasureRef::Inline(m) => {
                m.validate()?;
                Ok(m.clone())
            }
        }
    }
}

/// Exponentials of `window` as a finite sequence whose Euclidean Gram
/// matrix reproduces (grid: approximates) the `L^2(mu)` Gram matrix.
pub fn exp_system_as_sequence(
    model: &MeasureModel,
    window: ExponentialWindow,
    realization: Realization,
) -> Result<TruncatedSequence> {
    window.validate()?;
    match realization {
        Realization::Grid { points } => {
            let Some(density) = model.density.as_ref().filter(|_| model.singular_mass() == 0.0) else {
                return Err(Error::UnsupportedRealization("grid realization needs a density-only measure".into()));
            };
            if points == 0 {
                return Err(Error::UnsupportedRealization("grid realization needs at least one point".into()));
            }
            let dx = 1.0 / points as f64;
            let weights: Vec<f64> = (0..points).map(|j| (density.value((j as f64 + 0.5) * dx) * dx).sqrt()).collect();
            let freqs: Vec<i64> = window.frequencies().collect();
            let m = DenseMatrix::from_fn(points, freqs.len(), |j, c| {
                let x = (j as f64 + 0.5) * dx;
                C64::from_polar(weights[j], 2.0 * PI * freqs[c] as f64 * x)
            })?;
            Ok(TruncatedSequence::new(m))
        }
        Realization::CoefficientSpace => {
            let g = FourierCoefficients::new(model.clone()).gram(window)?;
            let root = psd_sqrt(&g, &SpectralTolerance::default())?;
            Ok(TruncatedSequence::new(root))
        }
    }
}

/// `f = sum_n c_n e^{2 pi i n x}` with coefficients over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpaceElement {
    pub window: ExponentialWindow,
    pub coeffs: Vec<C64>,
}

impl CoefficientSpaceElement {
    pub fn new(window: ExponentialWindow, coeffs: Vec<C64>) -> Result<Self> {
        window.validate()?;
        if coeffs.len() != window.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a window of {}",
                coeffs.len(),
                window.len()
            )));
        }
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(CoefficientSpaceElement { window, coeffs })
    }

    pub fn zero(window: ExponentialWindow) -> Self {
        CoefficientSpaceElement { window, coeffs: vec![ZERO; window.len()] }
    }

    /// The single exponential `e^{2 pi i n x}`.
    pub fn exponential(window: ExponentialWindow, n: i64) -> Result<Self> {
        let i = window.index_of(n).ok_or_else(|| Error::DimensionMismatch(format!("frequency {n} outside window")))?;
        let mut e = Self::zero(window);
        e.coeffs[i] = ONE;
        Ok(e)
    }

    pub fn vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.coeffs)
    }

    /// `<self, other>_{L^2(mu)} = other* G self` for the window's Gram `g`.
    pub fn inner(&self, other: &Self, g: &DenseMatrix) -> Result<C64> {
        if self.window != other.window || g.nrows() != self.coeffs.len() || !g.is_square() {
            return Err(Error::DimensionMismatch("coefficient elements over different windows".into()));
        }
        let gs = g.inner() * self.vector();
        Ok(other.coeffs.iter().zip(gs.iter()).map(|(o, v)| o.conj() * v).sum())
    }

    pub fn norm(&self, g: &DenseMatrix) -> Result<f64> {
        Ok(self.inner(self, g)?.re.max(0.0).sqrt())
    }
}

/// One row of the Toeplitz spectral table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramSpectrumRow {
    /// Half-width `W` of the symmetric window `[-W, W]`.
    pub window: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Largest eigenvalue of the Toeplitz matrix of the density alone.
    pub ac_lambda_max: f64,
}

/// Analytic and numeric verdicts for the density criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCriteria {
    pub rf: Verdict,
    pub sco: Verdict,
    pub ico: Verdict,
    pub ess_inf: f64,
    pub ess_sup: f64,
    pub singular_mass: f64,
    pub numeric_rf: Verdict,
    pub numeric_sco: Verdict,
    pub numeric_ico: Verdict,
    pub spectrum: Vec<GramSpectrumRow>,
    /// Analytic and numeric verdicts never contradict (inconclusive allowed).
    pub agree: bool,
}

/// Half-widths used for the numeric cross-check.
pub const CRITERIA_WINDOWS: [usize; 4] = [8, 16, 32, 64];

/// Toeplitz spectra over symmetric windows `[-W, W]`.
pub fn gram_spectrum(model: &MeasureModel, half_widths: &[usize]) -> Result<Vec<GramSpectrumRow>> {
    let fc = FourierCoefficients::new(model.clone());
    let tol = SpectralTolerance::default();
    half_widths
        .iter()
        .map(|&w| {
            let win = ExponentialWindow::symmetric(w as i64)?;
            let ev = eigvals_hermitian(&fc.gram(win)?, &tol)?;
            let n = win.len();
            let ac: Vec<C64> = (0..n as i64).map(|k| model.ac_coefficient(k)).collect();
            let t = DenseMatrix::from_fn(n, n, |i, j| if i >= j { ac[i - j] } else { ac[j - i].conj() })?;
            let ac_ev = eigvals_hermitian(&t, &tol)?;
            Ok(GramSpectrumRow {
                window: w,
                lambda_min: ev[0],
                lambda_max: *ev.last().unwrap(),
                ac_lambda_max: ac_ev.last().copied().unwrap_or(0.0).max(0.0),
            })
        })
        .collect()
}

/// RF / SCO / ICO for the exponential system `{e^{2 pi i n x}}_{n in Z}`.
///
/// Analytic: from the declared density range and singular mass. Numeric:
/// `lambda_min` of the Gram matrix must stay above `tau` along growing
/// windows; SCO additionally needs the density Toeplitz spectrum bounded.
pub fn density_criteria(model: &MeasureModel, tau: f64) -> Result<DensityCriteria> {
    model.validate()?;
    let (ess_inf, ess_sup) = model.density_range();
    let singular_mass = model.singular_mass();
    let from = |b: bool| if b { Verdict::Holds } else { Verdict::Fails };
    let rf = from(ess_inf > 0.0);
    let sco = from(ess_inf > 0.0 && ess_sup.is_finite());
    let ico = from(ess_inf > 0.0 && singular_mass == 0.0);

    let spectrum = gram_spectrum(model, &CRITERIA_WINDOWS)?;
    let xs: Vec<f64> = spectrum.iter().map(|r| (2 * r.window + 1) as f64).collect();
    let lmin: Vec<f64> = spectrum.iter().map(|r| r.lambda_min).collect();
    let acmax: Vec<f64> = spectrum.iter().map(|r| r.ac_lambda_max).collect();
    let opts = TrendOptions { window: CRITERIA_WINDOWS.len(), ..TrendOptions::default() };
    let numeric_rf = bounded_below(&xs, &lmin, tau, &opts).verdict;
    let numeric_sco = numeric_rf.and(bounded_above(&xs, &acmax, &opts).verdict);
    let numeric_ico = numeric_rf.and(from(singular_mass == 0.0));
    let consistent = |a: Verdict, n: Verdict| n == Verdict::Inconclusive || a == n;
    let agree = consistent(rf, numeric_rf) && consistent(sco, numeric_sco) && consistent(ico, numeric_ico);
    Ok(DensityCriteria {
        rf,
        sco,
        ico,
        ess_inf,
        ess_sup,
        singular_mass,
        numeric_rf,
        numeric_sco,
        numeric_ico,
        spectrum,
        agree,
    })
}

/// Partial sums `T(M) = sum_{n=0}^{M} |<f, e_n>|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProbe {
    /// `(M, T(M))` for `M = 0..=n_max`.
    pub rows: Vec<(usize, f64)>,
    /// Relative growth of `T` over the last decade of `M`.
    pub relative_increment: f64,
    pub divergent: bool,
}

/// Growth of the one-sided analysis sums of `f` against `{e_n}_{n >= 0}`.
///
/// `<f, e_n> = sum_m c_m mu^(n - m)`. Mixed measures are rejected unless
/// `allow_mixed` is set.
pub fn singular_divergence_probe(
    model: &MeasureModel,
    f: &CoefficientSpaceElement,
    n_max: usize,
    allow_mixed: bool,
) -> Result<DivergenceProbe> {
    model.validate()?;
    if !allow_mixed && !(model.is_purely_singular() && model.atoms.is_empty()) {
        return Err(Error::InvalidMeasure("divergence probe expects a purely Cantor-type measure".into()));
    }
    let fc = FourierCoefficients::new(model.clone());
    let support: Vec<(i64, C64)> =
        f.window.frequencies().zip(f.coeffs.iter().copied()).filter(|(_, c)| *c != ZERO).collect();
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    for n in 0..=n_max {
        let p: C64 = support.iter().map(|&(m, c)| c * fc.get(n as i64 - m)).sum();
        acc += p.norm_sqr();
        rows.push((n, acc));
    }
    let last = acc;
    let earlier = rows[n_max / 10].1;
    let relative_increment = if last > 0.0 { (last - earlier) / last } else { 0.0 };
    Ok(DivergenceProbe { rows, relative_increment, divergent: relative_increment >= 1e-3 })
}
