//! Three-valued verdicts and the trend tests used to read asymptotic
//! behaviour off a finite ladder.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Knobs shared by the trajectory tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendOptions {
    /// Number of trailing ladder levels inspected.
    pub window: usize,
    /// Relative change between consecutive levels regarded as "no change".
    pub stability_rtol: f64,
    /// Log-log slope magnitude regarded as genuine growth or decay.
    pub slope: f64,
    /// Relative band around a threshold in which comparisons are ties.
    pub tie_rtol: f64,
}

impl Default for TrendOptions {
    fn default() -> Self {
        TrendOptions { window: 3, stability_rtol: 1e-6, slope: 0.1, tie_rtol: 1e-9 }
    }
}

/// Least-squares slope of `log y` against `log x`. `None` when fewer than two
/// usable points or when some `y` is not positive.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if ys.iter().chain(xs).any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Aitken extrapolation of the limit of `y0, y1, y2` (equally spaced in
/// the ladder's own parametrization). Defined only when the increments have
/// the same sign and shrink. A geometric sequence extrapolates to exactly 0.
pub fn aitken_limit(y0: f64, y1: f64, y2: f64) -> Option<f64> {
    let (d1, d2) = (y1 - y0, y2 - y1);
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
        return None;
    }
    Some(y2 - d2 * d2 / (d2 - d1))
}

/// Outcome of a trajectory test, with the fitted log-log slope when defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub verdict: Verdict,
    pub slope: Option<f64>,
}

fn tail<'a>(xs: &'a [f64], ys: &'a [f64], window: usize) -> (&'a [f64], &'a [f64]) {
    let w = window.max(2).min(ys.len());
    (&xs[xs.len() - w..], &ys[ys.len() - w..])
}

/// Is the trajectory `ys` (indexed by ladder size `xs`) bounded above?
///
/// Holds when it is non-increasing up to `stability_rtol` over the window,
/// fails when it grows with log-log slope at least `slope`.
pub fn bounded_above(xs: &[f64], ys: &[f64], opts: &TrendOptions) -> Trend {
    if ys.is_empty() {
        return Trend { verdict: Verdict::Inconclusive, slope: None };
    }
    let (x, y) = tail(xs, ys, opts.window);
    let slope = loglog_slope(x, y);
    if y.len() < 2 {
        return Trend { verdict: Verdict::Inconclusive, slope };
    }
    let flat = y.windows(2).all(|p| p[1] <= p[0] * (1.0 + opts.stability_rtol) + f64::MIN_POSITIVE);
    let verdict = if flat {
        Verdict::Holds
    } else if slope.is_some_and(|s| s >= opts.slope) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    Trend { verdict, slope }
}

/// Is the trajectory `ys` bounded below by `tau`?
///
/// Fails when the last value is below `tau`. Holds when every value in the
/// window clears `tau` and the trajectory is either steady or converging
/// (extrapolated limit of the last three values still clears `tau`). Values
/// within the tie band around `tau` are inconclusive.
pub fn bounded_below(xs: &[f64], ys: &[f64], tau: f64, opts: &TrendOptions) -> Trend {
    if ys.is_empty() {
        return Trend { verdict: Verdict::Inconclusive, slope: None };
    }
    let (x, y) = tail(xs, ys, opts.window);
    let slope = loglog_slope(x, y);
    let lo = tau * (1.0 - opts.tie_rtol);
    let hi = tau * (1.0 + opts.tie_rtol);
    let last = *y.last().unwrap();
    if last < lo {
        return Trend { verdict: Verdict::Fails, slope };
    }
    if y.len() < 2 || y.iter().any(|&v| v <= hi) {
        return Trend { verdict: Verdict::Inconclusive, slope };
    }
    let steady = y.windows(2).all(|p| p[1] >= p[0] * (1.0 - opts.stability_rtol));
    let converging = match y.len() {
        2 => slope.is_some_and(|s| s > -opts.slope),
        n => aitken_limit(y[n - 3], y[n - 2], y[n - 1]).is_some_and(|l| l > hi),
    };
    let verdict = if steady || converging { Verdict::Holds } else { Verdict::Inconclusive };
    Trend { verdict, slope }
}
