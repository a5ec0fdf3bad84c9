//! EXIT functions over the BEC.
//!
//! The EXIT function of bit `i` is the probability that bit-MAP decoding of
//! `x_i` from `y_{∼i}` fails. Since failure is a property of the reduced
//! erasure pattern ω alone, `h_i(ε) = Σ_w A_w ε^w (1−ε)^{N−1−w}` where `A_w`
//! counts failing patterns of weight `w`. For small `N` the counts are found
//! by enumerating all `2^(N−1)` patterns; otherwise `h_i` is estimated by
//! Monte Carlo.
//!
//! The average EXIT function integrates to the rate over `[0, 1]`, and its
//! partial integral up to `ε` equals `H(X|Y)/N`. Both identities are checked
//! here in exact rational arithmetic.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{erasures_from_draws, recoverable_from_others, trial_draws, ErasureThreshold, ExtrinsicDecoder};
use crate::codes::{CodeFamily, LinearCode};
use crate::error::{Error, Result};
use crate::gf2::{BitVector, ColumnSpan};
use crate::math::{binomial, binomial_row};
use crate::scalar::Scalar;

/// Largest blocklength handled by exhaustive enumeration.
pub const MAX_EXACT_N: usize = 16;

/// z-score of the two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Which EXIT function is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Focus {
    /// `h_i` for one 0-based position.
    Bit(usize),
    /// `(1/N) Σ_i h_i`.
    Average,
}

impl Focus {
    /// For RM codes every `h_i` is the same function, so the average is
    /// computed from bit 0. Other codes average over all bits.
    pub fn average_for(code: &LinearCode) -> Focus {
        match code.family() {
            CodeFamily::ReedMuller(_) => Focus::Bit(0),
            CodeFamily::General => Focus::Average,
        }
    }

    fn check(&self, len: usize) -> Result<()> {
        match *self {
            Focus::Bit(i) if i >= len => Err(Error::arg(format!("bit index {i} out of range for length {len}"))),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for Focus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Focus::Bit(i) => write!(f, "{i}"),
            Focus::Average => f.write_str("average"),
        }
    }
}

/// Exact EXIT function in Bernstein form.
///
/// For [`Focus::Bit`] the weights are the failing-pattern counts `A_w`. For
/// [`Focus::Average`] they are summed over all `N` bits and the function is
/// divided by `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExitPolynomial {
    len: usize,
    focus: Focus,
    weights: Vec<BigUint>,
}

impl ExitPolynomial {
    pub fn new(len: usize, focus: Focus, weights: Vec<BigUint>) -> Result<Self> {
        if len == 0 || weights.len() != len {
            return Err(Error::arg(format!(
                "EXIT polynomial for blocklength {len} needs {len} weights, got {}",
                weights.len()
            )));
        }
        let scale = BigUint::from(match focus {
            Focus::Bit(_) => 1,
            Focus::Average => len,
        });
        for (w, a) in weights.iter().enumerate() {
            if *a > binomial(len - 1, w) * &scale {
                return Err(Error::arg(format!("weight A_{w} = {a} exceeds the number of patterns")));
            }
        }
        Ok(ExitPolynomial { len, focus, weights })
    }

    /// Blocklength `N`; the polynomial has degree `N − 1`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn focus(&self) -> Focus {
        self.focus
    }

    pub fn weights(&self) -> &[BigUint] {
        &self.weights
    }

    fn divisor(&self) -> usize {
        match self.focus {
            Focus::Bit(_) => 1,
            Focus::Average => self.len,
        }
    }

    /// `h(ε)`.
    pub fn eval<T: Scalar>(&self, eps: T) -> T {
        let m = self.len - 1;
        let one = T::one();
        let q = one.clone() - eps.clone();
        // powers of ε and 1−ε
        let mut pe = Vec::with_capacity(m + 1);
        let mut pq = Vec::with_capacity(m + 1);
        let (mut a, mut b) = (T::one(), T::one());
        for _ in 0..=m {
            pe.push(a.clone());
            pq.push(b.clone());
            a = a * eps.clone();
            b = b * q.clone();
        }
        let mut acc = T::zero();
        for (w, aw) in self.weights.iter().enumerate() {
            if aw.is_zero() {
                continue;
            }
            acc = acc + T::from_biguint(aw) * pe[w].clone() * pq[m - w].clone();
        }
        acc / T::from_usize(self.divisor())
    }

    /// `b_w = A_w / (C(N−1, w) · divisor)`: the Bernstein coefficients of `h`.
    pub fn bernstein_coefficients<T: Scalar>(&self) -> Vec<T> {
        let m = self.len - 1;
        let row = binomial_row(m);
        self.weights
            .iter()
            .zip(&row)
            .map(|(a, c)| T::from_biguint(a) / (T::from_biguint(c) * T::from_usize(self.divisor())))
            .collect()
    }

    /// Whether the Bernstein coefficients are nondecreasing, checked exactly
    /// as `A_{w+1}·C(m,w) ≥ A_w·C(m,w+1)`. This holds for the failure set of
    /// any linear code (an up-set's level densities never decrease) and
    /// implies `h` is nondecreasing on `[0, 1]`.
    pub fn has_monotone_profile(&self) -> bool {
        let row = binomial_row(self.len - 1);
        self.weights
            .windows(2)
            .zip(row.windows(2))
            .all(|(a, c)| &a[1] * &c[0] >= &a[0] * &c[1])
    }

    /// `∫_0^1 h`, exactly: `Σ_w A_w · w!(N−1−w)!/N!`, i.e. `A_w / (N·C(N−1,w))`.
    pub fn area(&self) -> BigRational {
        area_exact(self)
    }

    /// `∫_0^ε h`, exactly, by expanding the Bernstein form into monomials.
    pub fn partial_area(&self, eps: &BigRational) -> BigRational {
        let m = self.len - 1;
        // coefficients of x^j
        let mut mono = vec![BigInt::zero(); m + 1];
        for (w, aw) in self.weights.iter().enumerate() {
            if aw.is_zero() {
                continue;
            }
            let aw = BigInt::from(aw.clone());
            for (k, c) in binomial_row(m - w).into_iter().enumerate() {
                let term = &aw * BigInt::from(c);
                if k % 2 == 0 {
                    mono[w + k] += term;
                } else {
                    mono[w + k] -= term;
                }
            }
        }
        let mut acc = BigRational::zero();
        let mut pow = eps.clone();
        for (j, c) in mono.into_iter().enumerate() {
            acc += BigRational::new(c, BigInt::from(j + 1)) * &pow;
            pow *= eps;
        }
        acc / BigRational::from_integer(BigInt::from(self.divisor()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ExitPolynomialJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: ExitPolynomialJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("EXIT polynomial JSON: {e}")))?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FocusJson {
    Bit(usize),
    Named(String),
}

/// `{"N": .., "i": <index or "average">, "A": ["<big int>", ..]}`
#[derive(Serialize, Deserialize)]
struct ExitPolynomialJson {
    #[serde(rename = "N")]
    n: usize,
    i: FocusJson,
    #[serde(rename = "A")]
    a: Vec<String>,
}

impl From<&ExitPolynomial> for ExitPolynomialJson {
    fn from(p: &ExitPolynomial) -> Self {
        ExitPolynomialJson {
            n: p.len,
            i: match p.focus {
                Focus::Bit(i) => FocusJson::Bit(i),
                Focus::Average => FocusJson::Named("average".into()),
            },
            a: p.weights.iter().map(|w| w.to_string()).collect(),
        }
    }
}

impl TryFrom<ExitPolynomialJson> for ExitPolynomial {
    type Error = Error;

    fn try_from(raw: ExitPolynomialJson) -> Result<Self> {
        let focus = match raw.i {
            FocusJson::Bit(i) => Focus::Bit(i),
            FocusJson::Named(s) if s == "average" => Focus::Average,
            FocusJson::Named(s) => return Err(Error::Parse(format!("unknown focus {s:?}"))),
        };
        let weights = raw
            .a
            .iter()
            .map(|s| s.parse::<BigUint>().map_err(|e| Error::Parse(format!("weight {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        ExitPolynomial::new(raw.n, focus, weights)
    }
}

fn check_exact_cap(code: &LinearCode) -> Result<()> {
    if code.len() > MAX_EXACT_N {
        return Err(Error::Size {
            what: "blocklength N",
            value: code.len(),
            cap: MAX_EXACT_N,
            hint: " for exact enumeration; use the Monte Carlo estimator instead",
        });
    }
    Ok(())
}

/// Failing-pattern counts by weight for bit `i`, over all `2^(N−1)` reduced
/// patterns.
fn failing_counts(code: &LinearCode, i: usize) -> Vec<u64> {
    let len = code.len();
    let m = len - 1;
    let total: u64 = 1 << m;
    let chunk = 1u64 << m.saturating_sub(6).min(10);
    (0..total.div_ceil(chunk))
        .into_par_iter()
        .fold(
            || (ColumnSpan::new(code.dimension()), vec![0u64; len]),
            |(mut span, mut acc), block| {
                for mask in block * chunk..((block + 1) * chunk).min(total) {
                    let omega = BitVector::from_mask(m, mask);
                    let erased = omega.with_inserted(i, true);
                    if !recoverable_from_others(code, i, &erased, &mut span) {
                        acc[mask.count_ones() as usize] += 1;
                    }
                }
                (span, acc)
            },
        )
        .map(|(_, acc)| acc)
        .reduce(|| vec![0u64; len], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
}

/// Exact EXIT polynomial of bit `i` (0-based).
pub fn exit_exact(code: &LinearCode, i: usize) -> Result<ExitPolynomial> {
    check_exact_cap(code)?;
    Focus::Bit(i).check(code.len())?;
    let weights = failing_counts(code, i).into_iter().map(BigUint::from).collect();
    ExitPolynomial::new(code.len(), Focus::Bit(i), weights)
}

/// Exact EXIT polynomials of every bit.
pub fn exit_exact_all(code: &LinearCode) -> Result<Vec<ExitPolynomial>> {
    (0..code.len()).map(|i| exit_exact(code, i)).collect()
}

/// Exact average EXIT polynomial, summed over all bits.
pub fn average_exit_exact(code: &LinearCode) -> Result<ExitPolynomial> {
    check_exact_cap(code)?;
    let mut sum = vec![BigUint::zero(); code.len()];
    for i in 0..code.len() {
        for (s, c) in sum.iter_mut().zip(failing_counts(code, i)) {
            *s += c;
        }
    }
    ExitPolynomial::new(code.len(), Focus::Average, sum)
}

/// `∫_0^1 h`, exactly.
pub fn area_exact(p: &ExitPolynomial) -> BigRational {
    let m = p.len - 1;
    let row = binomial_row(m);
    let mut acc = BigRational::zero();
    for (aw, c) in p.weights.iter().zip(row) {
        if aw.is_zero() {
            continue;
        }
        // ∫ x^w (1−x)^(m−w) dx = 1 / ((m+1)·C(m, w))
        acc += BigRational::new(BigInt::from(aw.clone()), BigInt::from(c * (m + 1)));
    }
    acc / BigRational::from_integer(BigInt::from(p.divisor()))
}

/// `H(X|Y)` in bits for a uniformly chosen codeword sent over BEC(ε):
/// `Σ_patterns μ_ε(pattern)·(K − rank of the unerased generator columns)`.
pub fn conditional_entropy_exact(code: &LinearCode, eps: &BigRational) -> Result<BigRational> {
    check_exact_cap(code)?;
    if eps < &BigRational::zero() || eps > &BigRational::one() {
        return Err(Error::arg(format!("erasure probability {eps} is not in [0, 1]")));
    }
    let len = code.len();
    let k = code.dimension();
    // deficiency summed per erasure weight
    let mut deficiency = vec![0u64; len + 1];
    let mut span = ColumnSpan::new(k);
    for mask in 0u64..(1 << len) {
        span.clear();
        for j in 0..len {
            if mask >> j & 1 == 0 {
                span.insert_words(code.column_words(j));
            }
        }
        deficiency[mask.count_ones() as usize] += (k - span.dim()) as u64;
    }
    let q = BigRational::one() - eps;
    let mut acc = BigRational::zero();
    for (w, d) in deficiency.into_iter().enumerate() {
        if d == 0 {
            continue;
        }
        acc += BigRational::from_integer(d.into()) * num_traits::pow(eps.clone(), w) * num_traits::pow(q.clone(), len - w);
    }
    Ok(acc)
}

/// One line of an [`AreaReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaCheck {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaReport {
    pub label: String,
    pub area: String,
    pub rate: String,
    pub checks: Vec<AreaCheck>,
}

impl AreaReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Partial-integral points checked by [`verify_area_theorem`].
pub fn partial_area_points() -> Vec<BigRational> {
    [(1, 4), (1, 2), (3, 4)]
        .into_iter()
        .map(|(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b)))
        .collect()
}

/// Checks `∫_0^1 h = K/N` and `N·∫_0^ε h = H(X|Y)` at ε ∈ {1/4, 1/2, 3/4}.
pub fn verify_area_theorem(code: &LinearCode) -> Result<AreaReport> {
    let avg = average_exit_exact(code)?;
    let area = area_exact(&avg);
    let rate = code.rate();
    let mut checks = vec![AreaCheck {
        name: "area = K/N".into(),
        lhs: area.to_string(),
        rhs: rate.to_string(),
        pass: area == rate,
    }];
    let n = BigRational::from_integer(BigInt::from(code.len()));
    for eps in partial_area_points() {
        let lhs = avg.partial_area(&eps) * &n;
        let rhs = conditional_entropy_exact(code, &eps)?;
        checks.push(AreaCheck {
            name: format!("N * area(0, {eps}) = H(X|Y)"),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            pass: lhs == rhs,
        });
    }
    Ok(AreaReport {
        label: code.label().to_string(),
        area: area.to_string(),
        rate: rate.to_string(),
        checks,
    })
}

/// One grid point of a Monte Carlo EXIT curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint<T> {
    pub eps: T,
    pub h: T,
    pub half_width: T,
    pub trials: u64,
}

/// Monte Carlo estimate of an EXIT function on a grid of erasure
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitCurve<T> {
    pub label: String,
    pub focus: Focus,
    pub seed: u64,
    pub points: Vec<CurvePoint<T>>,
}

impl<T: Float> ExitCurve<T> {
    pub fn eps(&self) -> Vec<T> {
        self.points.iter().map(|p| p.eps).collect()
    }

    pub fn values(&self) -> Vec<T> {
        self.points.iter().map(|p| p.h).collect()
    }

    /// Adds the points of `other` (same code, focus and seed). Points at an ε
    /// already present are kept from `self`.
    pub fn merge(&mut self, other: &ExitCurve<T>) {
        for p in &other.points {
            if !self.points.iter().any(|q| q.eps == p.eps) {
                self.points.push(*p);
            }
        }
        self.points.sort_by(|a, b| a.eps.partial_cmp(&b.eps).expect("grid values are finite"));
    }

    /// CSV with header `epsilon,h,half_width,trials`; floats carry 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,h,half_width,trials\n");
        for p in &self.points {
            let f = |x: T| x.to_f64().expect("float converts to f64");
            writeln!(out, "{:.16e},{:.16e},{:.16e},{}", f(p.eps), f(p.h), f(p.half_width), p.trials)
                .expect("writing to a String cannot fail");
        }
        out
    }

    /// Parses [`ExitCurve::to_csv`] output.
    pub fn from_csv(text: &str, label: impl Into<String>, focus: Focus, seed: u64) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("epsilon,h,half_width,trials") => {}
            other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
        }
        let num = |s: &str| -> Result<T> {
            let v: f64 = s.parse().map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))?;
            T::from(v).ok_or_else(|| Error::Parse(format!("{v} does not fit the scalar type")))
        };
        let points = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                if f.len() != 4 {
                    return Err(Error::Parse(format!("CSV row {l:?} does not have 4 fields")));
                }
                Ok(CurvePoint {
                    eps: num(f[0])?,
                    h: num(f[1])?,
                    half_width: num(f[2])?,
                    trials: f[3].parse().map_err(|e| Error::Parse(format!("bad trial count {:?}: {e}", f[3])))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExitCurve {
            label: label.into(),
            focus,
            seed,
            points,
        })
    }
}

/// Checks that `grid` is nonempty, inside `[0, 1]` and strictly increasing.
pub fn validate_grid<T: Float>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::arg("empty erasure-probability grid"));
    }
    for (k, &e) in grid.iter().enumerate() {
        if !(e >= T::zero() && e <= T::one()) {
            return Err(Error::arg(format!("grid point {:?} is outside [0, 1]", e.to_f64())));
        }
        if k > 0 && e <= grid[k - 1] {
            return Err(Error::arg("grid is not strictly increasing"));
        }
    }
    Ok(())
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps)
            .map(|k| if k + 1 == steps { hi } else { lo + (hi - lo) * k as f64 / (steps - 1) as f64 })
            .collect(),
    }
}

/// Monte Carlo EXIT curve.
///
/// Trial `t` draws one uniform per position from the stream keyed by
/// `(seed, t)` and is reused at every grid point, so erasure patterns are
/// nested in ε. The estimate is the failure fraction over `trials` trials
/// (and over all bits for [`Focus::Average`]) with a normal-approximation
/// 95% half-width `1.96·sqrt(h(1−h)/trials)`. Counts are summed as
/// integers, so results do not depend on the worker count.
pub fn exit_monte_carlo<T: Float + Send + Sync>(
    code: &LinearCode,
    focus: Focus,
    grid: &[T],
    trials: u64,
    seed: u64,
) -> Result<ExitCurve<T>> {
    if trials == 0 {
        return Err(Error::arg("at least one trial is required"));
    }
    validate_grid(grid)?;
    focus.check(code.len())?;
    let thresholds = grid
        .iter()
        .map(|e| ErasureThreshold::new(e.to_f64().expect("grid value converts to f64")))
        .collect::<Result<Vec<_>>>()?;
    let len = code.len();
    let g = grid.len();

    let counts: Vec<u64> = match focus {
        Focus::Bit(i) => (0..trials)
            .into_par_iter()
            .fold(
                || (ColumnSpan::new(code.dimension()), vec![0u64; g + 1]),
                |(mut span, mut first_fail_hist), t| {
                    let draws = trial_draws(len, seed, t);
                    // failure is monotone along the nested patterns: find the
                    // first failing grid index by bisection
                    let (mut lo, mut hi) = (0usize, g);
                    while lo < hi {
                        let mid = (lo + hi) / 2;
                        let pattern = erasures_from_draws(&draws, thresholds[mid]);
                        if recoverable_from_others(code, i, pattern.erased(), &mut span) {
                            lo = mid + 1;
                        } else {
                            hi = mid;
                        }
                    }
                    first_fail_hist[lo] += 1;
                    (span, first_fail_hist)
                },
            )
            .map(|(_, h)| h)
            .reduce(|| vec![0u64; g + 1], add_counts)
            .iter()
            .take(g)
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect(),
        Focus::Average => (0..trials)
            .into_par_iter()
            .fold(
                || (ExtrinsicDecoder::new(code), vec![0u64; g]),
                |(mut dec, mut acc), t| {
                    let draws = trial_draws(len, seed, t);
                    let mut last: Option<(BitVector, u64)> = None;
                    for (slot, th) in acc.iter_mut().zip(&thresholds) {
                        let pattern = erasures_from_draws(&draws, *th);
                        let failed = match &last {
                            Some((prev, f)) if prev == pattern.erased() => *f,
                            _ => {
                                dec.decode(&pattern);
                                dec.failed_count() as u64
                            }
                        };
                        *slot += failed;
                        last = Some((pattern.erased().clone(), failed));
                    }
                    (dec, acc)
                },
            )
            .map(|(_, acc)| acc)
            .reduce(|| vec![0u64; g], add_counts),
    };

    let denom = match focus {
        Focus::Bit(_) => trials as f64,
        Focus::Average => trials as f64 * len as f64,
    };
    let points = grid
        .iter()
        .zip(counts)
        .map(|(&eps, c)| {
            let h = c as f64 / denom;
            let hw = Z_95 * (h * (1.0 - h) / trials as f64).sqrt();
            CurvePoint {
                eps,
                h: T::from(h).expect("probability fits the scalar type"),
                half_width: T::from(hw).expect("probability fits the scalar type"),
                trials,
            }
        })
        .collect();
    Ok(ExitCurve {
        label: code.label().to_string(),
        focus,
        seed,
        points,
    })
}

fn add_counts(a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter().zip(&b).map(|(x, y)| x + y).collect()
}

/// Largest absolute deviation between a curve and exact values.
pub fn max_abs_deviation(curve: &ExitCurve<f64>, p: &ExitPolynomial) -> f64 {
    curve
        .points
        .iter()
        .map(|pt| (pt.h - p.eval(pt.eps)).abs())
        .fold(0.0, f64::max)
}

/// Fraction of curve points whose interval contains the exact value.
pub fn coverage(curve: &ExitCurve<f64>, p: &ExitPolynomial) -> f64 {
    let inside = curve
        .points
        .iter()
        .filter(|pt| (pt.h - p.eval(pt.eps)).abs() <= pt.half_width + 1e-15)
        .count();
    inside as f64 / curve.points.len() as f64
}

/// Convenience conversion for reporting.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{rm_generator, RmParams};

    #[test]
    fn interval_coverage_over_seeds() {
        let code = rm_generator(RmParams::new(4, 2).unwrap()).unwrap();
        let p = exit_exact(&code, 0).unwrap();
        // the normal interval degenerates where h is within a few 1/trials of 0 or 1
        let grid: Vec<f64> = uniform_grid(0.05, 0.95, 19).into_iter().filter(|&e| (0.05..=0.95).contains(&p.eval(e))).collect();
        let seeds = 100;
        let total: f64 = (0..seeds)
            .map(|s| coverage(&exit_monte_carlo::<f64>(&code, Focus::Bit(0), &grid, 4000, 500 + s).unwrap(), &p))
            .sum();
        let mean = total / seeds as f64;
        // pooled coverage agrees with the nominal 95% up to three standard errors
        let se = (0.95 * 0.05 / (seeds as usize * grid.len()) as f64).sqrt();
        assert!(grid.len() >= 6);
        assert!(mean >= 0.95 - 3.0 * se, "coverage {mean}");
    }
    use crate::gf2::BitMatrix;
    use crate::math::binomial_u64;

    fn rm(n: usize, r: usize) -> LinearCode {
        rm_generator(RmParams::new(n, r).unwrap()).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn closed_forms() {
        for n in 1..=4 {
            let len = 1usize << n;
            let m = len - 1;
            // repetition: fails only when all others are erased
            let mut rep = vec![0u64; len];
            rep[m] = 1;
            assert_eq!(exit_exact(&rm(n, 0), 0).unwrap().weights(), big(&rep).as_slice());
            // single parity check: fails when any other bit is erased
            let spc: Vec<u64> = (0..len).map(|w| if w == 0 { 0 } else { binomial_u64(m, w) }).collect();
            assert_eq!(exit_exact(&rm(n, n - 1), 3 % len).unwrap().weights(), big(&spc).as_slice());
            // full space
            let full: Vec<u64> = (0..len).map(|w| binomial_u64(m, w)).collect();
            assert_eq!(exit_exact(&rm(n, n), len - 1).unwrap().weights(), big(&full).as_slice());
        }
    }

    #[test]
    fn areas_of_closed_forms() {
        for n in 1..=4 {
            let len = 1i64 << n;
            assert_eq!(area_exact(&exit_exact(&rm(n as usize, 0), 0).unwrap()), q(1, len));
            assert_eq!(area_exact(&exit_exact(&rm(n as usize, n as usize - 1), 0).unwrap()), q(len - 1, len));
            assert_eq!(area_exact(&exit_exact(&rm(n as usize, n as usize), 0).unwrap()), q(1, 1));
        }
        assert_eq!(area_exact(&exit_exact(&rm(3, 1), 0).unwrap()), q(1, 2));
    }

    #[test]
    fn evaluation_matches_closed_forms() {
        let rep = exit_exact(&rm(3, 0), 2).unwrap();
        let spc = exit_exact(&rm(3, 2), 2).unwrap();
        for k in 0..=20 {
            let e = k as f64 / 20.0;
            assert!((rep.eval(e) - e.powi(7)).abs() < 1e-14);
            assert!((spc.eval(e) - (1.0 - (1.0 - e).powi(7))).abs() < 1e-14);
            assert!((exit_exact(&rm(2, 2), 0).unwrap().eval(e) - 1.0).abs() < 1e-14);
        }
        let exact: BigRational = spc.eval(q(1, 3));
        assert_eq!(exact, q(1, 1) - num_traits::pow(q(2, 3), 7));
        let f32v: f32 = spc.eval(0.5f32);
        assert!((f32v - (1.0 - 0.5f32.powi(7))).abs() < 1e-6);
    }

    #[test]
    fn polynomial_is_monotone_and_bounded() {
        for (n, r) in [(3, 1), (4, 1), (4, 2), (3, 2)] {
            let p = exit_exact(&rm(n, r), 0).unwrap();
            assert!(p.has_monotone_profile());
            let b: Vec<f64> = p.bernstein_coefficients();
            assert!(b.windows(2).all(|w| w[0] <= w[1]));
            let mut prev = -1.0;
            for k in 0..=1000 {
                let v = p.eval(k as f64 / 1000.0);
                assert!((0.0..=1.0 + 1e-12).contains(&v));
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn partial_area_identity_small() {
        let c = rm(3, 1);
        let avg = average_exit_exact(&c).unwrap();
        let n = q(8, 1);
        assert_eq!(conditional_entropy_exact(&c, &q(0, 1)).unwrap(), q(0, 1));
        assert_eq!(conditional_entropy_exact(&c, &q(1, 1)).unwrap(), q(4, 1));
        let half = q(1, 2);
        assert_eq!(avg.partial_area(&half) * &n, conditional_entropy_exact(&c, &half).unwrap());
        assert_eq!(avg.partial_area(&q(1, 1)), q(1, 2));
        assert_eq!(avg.partial_area(&q(0, 1)), q(0, 1));
    }

    #[test]
    fn area_reports() {
        for (n, r) in [(2, 1), (3, 1)] {
            assert!(verify_area_theorem(&rm(n, r)).unwrap().pass());
        }
        let rep = verify_area_theorem(&rm(4, 2)).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.area, "11/16");
        assert_eq!(rep.checks.len(), 4);
    }

    #[test]
    fn area_holds_for_a_non_symmetric_code() {
        let g = BitMatrix::from_bool_rows(&[vec![true, true, false], vec![false, false, true]]);
        let c = LinearCode::new(g, "toy").unwrap();
        let rep = verify_area_theorem(&c).unwrap();
        assert!(rep.pass(), "{rep:?}");
        assert_eq!(rep.area, "2/3");
        let h0 = exit_exact(&c, 0).unwrap();
        let h2 = exit_exact(&c, 2).unwrap();
        assert_ne!(h0, h2);
        assert_eq!(Focus::average_for(&c), Focus::Average);
        assert_eq!(Focus::average_for(&rm(3, 1)), Focus::Bit(0));
    }

    #[test]
    fn exact_cap() {
        let err = exit_exact(&rm(5, 2), 0).unwrap_err();
        assert!(matches!(err, Error::Size { value: 32, cap: 16, .. }));
        assert!(err.to_string().contains("Monte Carlo"));
        assert!(exit_exact(&rm(3, 1), 8).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = exit_exact(&rm(3, 1), 2).unwrap();
        let v = p.to_json();
        assert_eq!(v["N"], 8);
        assert_eq!(v["i"], 2);
        assert!(v["A"][0].is_string());
        assert_eq!(ExitPolynomial::from_json(&v).unwrap(), p);
        let avg = average_exit_exact(&rm(2, 1)).unwrap();
        let v = avg.to_json();
        assert_eq!(v["i"], "average");
        assert_eq!(ExitPolynomial::from_json(&v).unwrap(), avg);
    }

    #[test]
    fn mc_extremes_and_determinism() {
        let c = rm(4, 2);
        let curve = exit_monte_carlo(&c, Focus::Bit(0), &[0.0, 0.5, 1.0], 500, 9).unwrap();
        assert_eq!(curve.points[0].h, 0.0);
        assert_eq!(curve.points[2].h, 1.0);
        assert_eq!(curve, exit_monte_carlo(&c, Focus::Bit(0), &[0.0, 0.5, 1.0], 500, 9).unwrap());
        let avg = exit_monte_carlo(&c, Focus::Average, &[0.0, 0.5, 1.0], 200, 9).unwrap();
        assert_eq!(avg.points[0].h, 0.0);
        assert_eq!(avg.points[2].h, 1.0);
        assert!(exit_monte_carlo(&c, Focus::Bit(0), &[0.5], 0, 9).is_err());
        assert!(exit_monte_carlo(&c, Focus::Bit(0), &[0.5, 1.5], 10, 9).is_err());
        assert!(exit_monte_carlo(&c, Focus::Bit(0), &[0.5, 0.4], 10, 9).is_err());
        assert!(exit_monte_carlo::<f64>(&c, Focus::Bit(0), &[], 10, 9).is_err());
        assert!(exit_monte_carlo(&c, Focus::Bit(16), &[0.5], 10, 9).is_err());
    }

    #[test]
    fn mc_bisection_matches_direct_evaluation() {
        // Bit focus bisects the grid; check it against decoding every point.
        let c = rm(4, 1);
        let grid = uniform_grid(0.0, 1.0, 21);
        let curve = exit_monte_carlo(&c, Focus::Bit(3), &grid, 300, 4).unwrap();
        for (k, &e) in grid.iter().enumerate() {
            let mut dec = ExtrinsicDecoder::new(&c);
            let fails = (0..300)
                .filter(|&t| {
                    dec.decode(&crate::channel::sample_erasures(16, e, 4, t).unwrap());
                    dec.failed(3)
                })
                .count();
            assert_eq!(curve.points[k].h, fails as f64 / 300.0);
        }
    }

    #[test]
    fn mc_tracks_exact_values() {
        let c = rm(4, 2);
        let exact = exit_exact(&c, 0).unwrap();
        let grid = uniform_grid(0.1, 0.9, 9);
        let curve = exit_monte_carlo(&c, Focus::Bit(0), &grid, 20_000, 1).unwrap();
        assert!(max_abs_deviation(&curve, &exact) < 0.02);
        let avg = exit_monte_carlo(&c, Focus::Average, &grid, 5_000, 1).unwrap();
        assert!(max_abs_deviation(&avg, &exact) < 0.02);
        let f32curve = exit_monte_carlo(&c, Focus::Bit(0), &[0.25f32, 0.5, 0.75], 2_000, 1).unwrap();
        assert_eq!(f32curve.points.len(), 3);
    }

    #[test]
    fn csv_round_trip_and_merge() {
        let c = rm(3, 1);
        let mut a = exit_monte_carlo(&c, Focus::Bit(0), &[0.1, 0.5, 0.9], 100, 3).unwrap();
        let text = a.to_csv();
        assert!(text.starts_with("epsilon,h,half_width,trials\n"));
        let back = ExitCurve::<f64>::from_csv(&text, a.label.clone(), a.focus, a.seed).unwrap();
        assert_eq!(back, a);
        let b = exit_monte_carlo(&c, Focus::Bit(0), &[0.3, 0.5], 100, 3).unwrap();
        a.merge(&b);
        assert_eq!(a.eps(), vec![0.1, 0.3, 0.5, 0.9]);
        let full = exit_monte_carlo(&c, Focus::Bit(0), &[0.1, 0.3, 0.5, 0.9], 100, 3).unwrap();
        assert_eq!(a, full);
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(uniform_grid(0.2, 0.2, 1), vec![0.2]);
        assert!(validate_grid(&uniform_grid(0.0, 1.0, 33)).is_ok());
    }
}
