//! Threshold location and transition width of EXIT functions.
//!
//! For a level `δ` the transition runs from `ε_lower` (where `h` reaches `δ`)
//! to `ε_upper` (where it reaches `1 − δ`). For a symmetric monotone set the
//! width is at most `c·ln(1/(2δ))/ln N` for an absolute constant `c`; that
//! constant is not known, so every bound here takes it as an input and the
//! empirical value can be fitted from measured widths.

use num_traits::{Float, ToPrimitive};
use serde::Serialize;

use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::exit::{exit_monte_carlo, ExitCurve, ExitPolynomial, Focus};
use crate::scalar::Scalar;

/// Root-finder tolerance for exact polynomials.
pub const BISECTION_TOL: f64 = 1e-10;

/// Grid points added inside each bracketing interval by
/// [`threshold_monte_carlo`].
pub const REFINE_POINTS: usize = 8;

/// Crossings of one EXIT function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport<T> {
    pub label: String,
    pub blocklength: usize,
    pub delta: T,
    /// `h` reaches `δ`.
    pub eps_lower: Option<T>,
    /// `h` reaches `1/2`.
    pub eps_mid: Option<T>,
    /// `h` reaches `1 − δ`.
    pub eps_upper: Option<T>,
    pub width: Option<T>,
    /// `1 − R`.
    pub capacity: T,
}

impl<T: Float> ThresholdReport<T> {
    fn assemble(label: &str, blocklength: usize, delta: T, capacity: T, lower: Option<T>, mid: Option<T>, upper: Option<T>) -> Self {
        ThresholdReport {
            label: label.to_string(),
            blocklength,
            delta,
            eps_lower: lower,
            eps_mid: mid,
            eps_upper: upper,
            width: lower.zip(upper).map(|(l, u)| u - l),
            capacity,
        }
    }

    /// `|ε_mid − (1 − R)|`.
    pub fn mid_gap(&self) -> Option<T> {
        self.eps_mid.map(|m| (m - self.capacity).abs())
    }
}

fn check_delta<T: Float>(delta: T) -> Result<()> {
    let half = T::from(0.5).expect("0.5 is representable");
    if !(delta > T::zero() && delta < half) {
        return Err(Error::arg(format!(
            "delta = {:?} is not in (0, 1/2)",
            delta.to_f64()
        )));
    }
    Ok(())
}

/// Pool-adjacent-violators fit: the weighted least-squares nondecreasing
/// sequence closest to `values`.
pub fn isotonic_fit<T: Float>(values: &[T], weights: &[T]) -> Vec<T> {
    assert_eq!(values.len(), weights.len(), "values and weights differ in length");
    // blocks of (mean, weight, count)
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (m2, w2, n2) = blocks[blocks.len() - 1];
            let (m1, w1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / w, w, n1 + n2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, n)| std::iter::repeat_n(m, n))
        .collect()
}

/// First `ε` at which the piecewise-linear interpolant of a nondecreasing
/// sequence reaches `level`. `None` when the data never reaches it, or when
/// the first point already exceeds it and does not sit at `ε = 0`.
pub fn crossing<T: Float>(eps: &[T], fitted: &[T], level: T) -> Option<T> {
    let k = fitted.iter().position(|&y| y >= level)?;
    if k == 0 {
        return (fitted[0] == level || eps[0] == T::zero()).then_some(eps[0]);
    }
    let (e0, e1, y0, y1) = (eps[k - 1], eps[k], fitted[k - 1], fitted[k]);
    Some(e0 + (level - y0) / (y1 - y0) * (e1 - e0))
}

/// Index `k` such that the crossing of `level` lies in `(eps[k−1], eps[k]]`.
fn bracket<T: Float>(fitted: &[T], level: T) -> Option<usize> {
    fitted.iter().position(|&y| y >= level).filter(|&k| k > 0)
}

/// Crossings of a Monte Carlo curve after isotonic smoothing.
pub fn estimate_crossings<T: Float>(curve: &ExitCurve<T>, blocklength: usize, capacity: T, delta: T) -> Result<ThresholdReport<T>> {
    check_delta(delta)?;
    if curve.points.is_empty() {
        return Err(Error::InsufficientData("empty EXIT curve".into()));
    }
    let eps = curve.eps();
    let weights: Vec<T> = curve
        .points
        .iter()
        .map(|p| T::from(p.trials).expect("trial count is representable"))
        .collect();
    let fitted = isotonic_fit(&curve.values(), &weights);
    let half = T::from(0.5).expect("0.5 is representable");
    Ok(ThresholdReport::assemble(
        &curve.label,
        blocklength,
        delta,
        capacity,
        crossing(&eps, &fitted, delta),
        crossing(&eps, &fitted, half),
        crossing(&eps, &fitted, T::one() - delta),
    ))
}

/// Least `ε ∈ [0, 1]` with `h(ε) ≥ level`, by bisection on the exact
/// polynomial.
fn exact_crossing<T: Float + Scalar>(p: &ExitPolynomial, level: T) -> Option<T> {
    let (mut lo, mut hi) = (T::zero(), T::one());
    if p.eval(hi) < level {
        return None;
    }
    if p.eval(lo) >= level {
        return Some(lo);
    }
    let two = T::one() + T::one();
    let tol = T::from(BISECTION_TOL).expect("tolerance is representable");
    while hi - lo > tol {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if p.eval(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some((lo + hi) / two)
}

/// Crossings of an exact EXIT polynomial, to [`BISECTION_TOL`].
pub fn estimate_crossings_exact<T: Float + Scalar>(p: &ExitPolynomial, label: &str, capacity: T, delta: T) -> Result<ThresholdReport<T>> {
    check_delta(delta)?;
    if !p.has_monotone_profile() {
        return Err(Error::NotMonotone(format!("{label}: Bernstein coefficients decrease")));
    }
    let half = T::from(0.5).expect("0.5 is representable");
    Ok(ThresholdReport::assemble(
        label,
        p.len(),
        delta,
        capacity,
        exact_crossing(p, delta),
        exact_crossing(p, half),
        exact_crossing(p, T::one() - delta),
    ))
}

/// Monte Carlo curve plus one refinement pass: [`REFINE_POINTS`] extra points
/// are placed evenly inside each interval that brackets a crossing of `δ`,
/// `1/2` or `1 − δ`. Returns the merged curve and its crossings.
pub fn threshold_monte_carlo(
    code: &LinearCode,
    focus: Focus,
    grid: &[f64],
    trials: u64,
    seed: u64,
    delta: f64,
) -> Result<(ExitCurve<f64>, ThresholdReport<f64>)> {
    check_delta(delta)?;
    let capacity = 1.0 - code.rate().to_f64().expect("rate is a small rational");
    let mut curve = exit_monte_carlo(code, focus, grid, trials, seed)?;
    let weights: Vec<f64> = curve.points.iter().map(|p| p.trials as f64).collect();
    let fitted = isotonic_fit(&curve.values(), &weights);
    let eps = curve.eps();
    let mut extra: Vec<f64> = Vec::new();
    for level in [delta, 0.5, 1.0 - delta] {
        if let Some(k) = bracket(&fitted, level) {
            let (a, b) = (eps[k - 1], eps[k]);
            extra.extend((1..=REFINE_POINTS).map(|s| a + (b - a) * s as f64 / (REFINE_POINTS + 1) as f64));
        }
    }
    extra.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    extra.dedup();
    extra.retain(|e| !eps.contains(e));
    if !extra.is_empty() {
        curve.merge(&exit_monte_carlo(code, focus, &extra, trials, seed)?);
    }
    let report = estimate_crossings(&curve, code.len(), capacity, delta)?;
    Ok((curve, report))
}

/// `c·ln(1/(2δ))/ln N`: the width over which a symmetric monotone set of
/// `N` coordinates goes from measure `δ` to `1 − δ`.
pub fn fk_width_bound<T: Float>(blocklength: usize, delta: T, c: T) -> Result<T> {
    let half = T::from(0.5).expect("0.5 is representable");
    if !(delta > T::zero() && delta <= half) {
        return Err(Error::arg("delta must lie in (0, 1/2]"));
    }
    if c.is_nan() || c <= T::zero() {
        return Err(Error::arg("the constant c must be positive"));
    }
    if blocklength < 2 {
        return Err(Error::arg("blocklength must be at least 2"));
    }
    let n = T::from(blocklength).expect("blocklength is representable");
    Ok(c * (T::one() / (delta + delta)).ln() / n.ln())
}

/// Inputs of [`capacity_gap_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams<T> {
    /// The unspecified absolute constant; 1 is an arbitrary default.
    pub c: T,
    pub delta: T,
    /// Rate excess `R_n − R` of the code actually used.
    pub rate_gap: T,
    pub blocklength: usize,
    pub target_rate: T,
}

impl<T: Float> BoundParams<T> {
    pub fn new(c: T, delta: T, rate_gap: T, blocklength: usize, target_rate: T) -> Result<Self> {
        check_delta(delta)?;
        if c.is_nan() || c <= T::zero() {
            return Err(Error::arg("the constant c must be positive"));
        }
        if blocklength < 3 {
            return Err(Error::arg("blocklength must be at least 3"));
        }
        if rate_gap < T::zero() {
            return Err(Error::arg("rate gap must be nonnegative"));
        }
        Ok(BoundParams {
            c,
            delta,
            rate_gap,
            blocklength,
            target_rate,
        })
    }
}

/// `1 − R − δ − δ_n − c·ln(1/(2δ))/ln(N − 1)`: a lower bound on the erasure
/// probability below which every bit error probability is at most `δ`.
pub fn capacity_gap_bound<T: Float>(p: &BoundParams<T>) -> T {
    let n1 = T::from(p.blocklength - 1).expect("blocklength is representable");
    let width = p.c * (T::one() / (p.delta + p.delta)).ln() / n1.ln();
    T::one() - p.target_rate - p.delta - p.rate_gap - width
}

/// Least-squares fit of `width ≈ c·ln(1/(2δ))/ln(N − 1)` through the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantFit<T> {
    pub c: T,
    pub predictors: Vec<T>,
    pub widths: Vec<T>,
    pub residuals: Vec<T>,
}

pub fn fit_constant_c<T: Float>(reports: &[ThresholdReport<T>]) -> Result<ConstantFit<T>> {
    let usable: Vec<&ThresholdReport<T>> = reports.iter().filter(|r| r.width.is_some()).collect();
    let mut lens: Vec<usize> = usable.iter().map(|r| r.blocklength).collect();
    lens.sort_unstable();
    lens.dedup();
    if lens.len() < 2 {
        return Err(Error::InsufficientData(
            "need widths at two or more distinct blocklengths".into(),
        ));
    }
    let delta = usable[0].delta;
    if usable.iter().any(|r| r.delta != delta) {
        return Err(Error::arg("all reports must share the same delta"));
    }
    if usable.iter().any(|r| r.blocklength < 3) {
        return Err(Error::arg("blocklength must be at least 3"));
    }
    let log_term = (T::one() / (delta + delta)).ln();
    let predictors: Vec<T> = usable
        .iter()
        .map(|r| log_term / T::from(r.blocklength - 1).expect("representable").ln())
        .collect();
    let widths: Vec<T> = usable.iter().map(|r| r.width.expect("filtered")).collect();
    let sxx = predictors.iter().fold(T::zero(), |a, &x| a + x * x);
    let sxy = predictors.iter().zip(&widths).fold(T::zero(), |a, (&x, &y)| a + x * y);
    if sxx == T::zero() {
        return Err(Error::InsufficientData("degenerate predictors".into()));
    }
    let c = sxy / sxx;
    let residuals = predictors.iter().zip(&widths).map(|(&x, &y)| y - c * x).collect();
    Ok(ConstantFit {
        c,
        predictors,
        widths,
        residuals,
    })
}
