//! Kaczmarz iteration for exponentials in `L^2(mu)`, carried out on
//! coefficient vectors with the Gram matrix as inner-product kernel.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{CoefficientSpaceElement, ExponentialWindow, FourierCoefficients, MeasureModel};
use crate::numerics::{DenseMatrix, C64, ONE, ZERO};

/// Tolerance on `||phi|| = 1` for a Kaczmarz step.
pub const UNIT_TOL: f64 = 1e-10;

/// `L^2(mu)` restricted to the span of the exponentials of one window.
#[derive(Debug, Clone)]
pub struct ExponentialSpace {
    window: ExponentialWindow,
    gram: DenseMatrix,
}

impl ExponentialSpace {
    pub fn new(model: &MeasureModel, window: ExponentialWindow) -> Result<Self> {
        Self::from_coefficients(&FourierCoefficients::new(model.clone()), window)
    }

    pub fn from_coefficients(fc: &FourierCoefficients, window: ExponentialWindow) -> Result<Self> {
        Ok(ExponentialSpace { window, gram: fc.gram(window)? })
    }

    pub fn window(&self) -> ExponentialWindow {
        self.window
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    pub fn inner(&self, f: &CoefficientSpaceElement, h: &CoefficientSpaceElement) -> Result<C64> {
        f.inner(h, &self.gram)
    }

    pub fn norm(&self, f: &CoefficientSpaceElement) -> Result<f64> {
        f.norm(&self.gram)
    }

    /// `e^{2 pi i n x}` for a frequency `n` of the window.
    pub fn exponential(&self, n: i64) -> Result<CoefficientSpaceElement> {
        CoefficientSpaceElement::exponential(self.window, n)
    }

    fn check(&self, f: &CoefficientSpaceElement) -> Result<()> {
        if f.window != self.window {
            return Err(Error::DimensionMismatch("element lives on a different window".into()));
        }
        Ok(())
    }

    /// Gaussian coefficients on every frequency of the window.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> CoefficientSpaceElement {
        let coeffs =
            (0..self.dim()).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        CoefficientSpaceElement { window: self.window, coeffs }
    }
}

/// Iterate `x_n` and the raw error history `||f - x_n||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaczmarzState {
    pub step: usize,
    pub x: CoefficientSpaceElement,
    pub errors: Vec<f64>,
}

impl KaczmarzState {
    pub fn start(window: ExponentialWindow) -> Self {
        KaczmarzState { step: 0, x: CoefficientSpaceElement::zero(window), errors: Vec::new() }
    }
}

/// `x <- x + <f - x, phi> phi` for a unit vector `phi`.
pub fn kaczmarz_step(
    space: &ExponentialSpace,
    state: &KaczmarzState,
    f: &CoefficientSpaceElement,
    phi: &CoefficientSpaceElement,
) -> Result<KaczmarzState> {
    space.check(f)?;
    space.check(phi)?;
    space.check(&state.x)?;
    let norm = space.norm(phi)?;
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnitVector { norm });
    }
    let r: Vec<C64> = f.coeffs.iter().zip(&state.x.coeffs).map(|(a, b)| a - b).collect();
    let r = CoefficientSpaceElement { window: space.window, coeffs: r };
    let a = space.inner(&r, phi)?;
    let mut x = state.x.clone();
    for (xi, p) in x.coeffs.iter_mut().zip(&phi.coeffs) {
        *xi += a * p;
    }
    let diff: Vec<C64> = f.coeffs.iter().zip(&x.coeffs).map(|(a, b)| a - b).collect();
    let err = space.norm(&CoefficientSpaceElement { window: space.window, coeffs: diff })?;
    let mut errors = state.errors.clone();
    errors.push(err);
    Ok(KaczmarzState { step: state.step + 1, x, errors })
}

/// Runs steps with `phi = e^{2 pi i n x}` for each frequency in `order`.
pub fn kaczmarz_run(
    space: &ExponentialSpace,
    f: &CoefficientSpaceElement,
    order: impl IntoIterator<Item = i64>,
) -> Result<KaczmarzState> {
    let mut state = KaczmarzState::start(space.window);
    for n in order {
        let phi = space.exponential(n)?;
        state = kaczmarz_step(space, &state, f, &phi)?;
    }
    Ok(state)
}

/// `g_0, ..., g_N` for the exponentials taken in window order.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySequence {
    pub window: ExponentialWindow,
    /// Column `n` holds the coefficients of `g_n`.
    pub vectors: DMatrix<C64>,
}

impl AuxiliarySequence {
    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn vector(&self, n: usize) -> CoefficientSpaceElement {
        CoefficientSpaceElement { window: self.window, coeffs: self.vectors.column(n).iter().copied().collect() }
    }

    /// `<f, g_n>` for every `n`.
    pub fn analysis(&self, space: &ExponentialSpace, f: &CoefficientSpaceElement) -> Result<Vec<C64>> {
        space.check(f)?;
        let gf = space.gram.inner() * f.vector();
        Ok(self.vectors.column_iter().map(|g| g.iter().zip(gf.iter()).map(|(a, b)| a.conj() * b).sum()).collect())
    }
}

/// `g_0 = phi_0`, `g_n = phi_n - sum_{j<n} <phi_n, phi_j> g_j` over the first
/// `n_max + 1` frequencies of the window.
pub fn auxiliary_sequence(space: &ExponentialSpace, n_max: usize) -> Result<AuxiliarySequence> {
    let d = space.dim();
    if n_max >= d {
        return Err(Error::DimensionMismatch(format!(
            "auxiliary sequence up to {n_max} needs more than {d} frequencies"
        )));
    }
    let g = space.gram.inner();
    let mut out = DMatrix::<C64>::zeros(d, n_max + 1);
    for n in 0..=n_max {
        let mut v = DVector::<C64>::zeros(d);
        v[n] = ONE;
        for j in 0..n {
            // <phi_n, phi_j> = G[j, n]
            let c = g[(j, n)];
            if c != ZERO {
                v.axpy(-c, &out.column(j), ONE);
            }
        }
        out.set_column(n, &v);
    }
    Ok(AuxiliarySequence { window: space.window, vectors: out })
}

/// Largest coefficient gap between Kaczmarz iterates and
/// `sum_{i<=n} <f, g_i> phi_i` over `samples` random `f`.
pub fn verify_identity<R: Rng + ?Sized>(
    space: &ExponentialSpace,
    aux: &AuxiliarySequence,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let f = space.random_element(rng);
        let coef = aux.analysis(space, &f)?;
        let mut state = KaczmarzState::start(space.window);
        for n in 0..aux.len() {
            let phi = CoefficientSpaceElement::exponential(space.window, space.window.n_min + n as i64)?;
            state = kaczmarz_step(space, &state, &f, &phi)?;
            let scale = coef.iter().take(n + 1).map(|c| c.norm()).fold(1.0, f64::max);
            for (i, x) in state.x.coeffs.iter().enumerate() {
                let want = if i <= n { coef[i] } else { ZERO };
                worst = worst.max((x - want).norm() / scale);
            }
        }
    }
    Ok(worst)
}

/// Reconstruction error and Parseval defect after `N + 1` terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HerrWeberRow {
    pub n: usize,
    pub residual: f64,
    pub parseval_defect: f64,
}

/// `x_N = sum_{n<=N} <f, g_n> phi_n` and `||f - x_N||`.
pub fn herr_weber_reconstruct(
    space: &ExponentialSpace,
    aux: &AuxiliarySequence,
    f: &CoefficientSpaceElement,
    n: usize,
) -> Result<(CoefficientSpaceElement, f64)> {
    if n >= aux.len() {
        return Err(Error::DimensionMismatch(format!("N = {n} beyond the auxiliary sequence")));
    }
    let coef = aux.analysis(space, f)?;
    let mut x = CoefficientSpaceElement::zero(space.window);
    x.coeffs[..=n].copy_from_slice(&coef[..=n]);
    let r: Vec<C64> = f.coeffs.iter().zip(&x.coeffs).map(|(a, b)| a - b).collect();
    let res = space.norm(&CoefficientSpaceElement { window: space.window, coeffs: r })?;
    Ok((x, res))
}

/// Residual and defect `||f||^2 - sum_{n<=N}|<f, g_n>|^2` at every `N`.
pub fn herr_weber_table(
    space: &ExponentialSpace,
    aux: &AuxiliarySequence,
    f: &CoefficientSpaceElement,
) -> Result<Vec<HerrWeberRow>> {
    let coef = aux.analysis(space, f)?;
    let g = space.gram.inner();
    let fnorm2 = space.inner(f, f)?.re;
    let mut r = f.vector();
    let mut energy = 0.0;
    let mut rows = Vec::with_capacity(coef.len());
    for (n, c) in coef.iter().enumerate() {
        r[n] -= c;
        energy += c.norm_sqr();
        let gr = g * &r;
        let res2: f64 = r.iter().zip(gr.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        rows.push(HerrWeberRow { n, residual: res2.max(0.0).sqrt(), parseval_defect: fnorm2 - energy });
    }
    Ok(rows)
}
