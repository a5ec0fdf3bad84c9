//! Binary erasure channel sampling and MAP decoding over erasures.
//!
//! Over the BEC the transmitted codeword can be taken to be all-zero: which
//! bits are recoverable depends only on the erasure pattern. A bit is lost
//! exactly when some codeword that is one at that bit is supported inside
//! the erased positions.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, ColumnSpan};

/// Erased positions of a received word (a one marks an erasure), with an
/// optional focus bit for the extrinsic view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    erased: BitVector,
    focus: Option<usize>,
}

impl ErasurePattern {
    pub fn new(erased: BitVector) -> Self {
        ErasurePattern { erased, focus: None }
    }

    pub fn none(len: usize) -> Self {
        Self::new(BitVector::zeros(len))
    }

    pub fn all(len: usize) -> Self {
        Self::new(BitVector::ones(len))
    }

    /// Rebuilds a full pattern from the extrinsic view `omega` of bit `i`.
    /// `focus_erased` fills position `i`, which the view does not carry.
    pub fn from_reduced(i: usize, omega: &BitVector, focus_erased: bool) -> Self {
        ErasurePattern {
            erased: omega.with_inserted(i, focus_erased),
            focus: Some(i),
        }
    }

    pub fn with_focus(mut self, i: usize) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::arg(format!("focus bit {i} out of range for length {}", self.len())));
        }
        self.focus = Some(i);
        Ok(self)
    }

    pub fn focus(&self) -> Option<usize> {
        self.focus
    }

    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    pub fn erased(&self) -> &BitVector {
        &self.erased
    }

    pub fn is_erased(&self, k: usize) -> bool {
        self.erased.get(k)
    }

    pub fn weight(&self) -> usize {
        self.erased.weight()
    }

    /// The length-(N−1) pattern ω seen by the decoder of the focus bit.
    pub fn reduced_view(&self) -> Option<BitVector> {
        self.focus.map(|i| self.erased.without(i))
    }
}

/// Fixed-point erasure threshold: a position is erased iff its 64-bit uniform
/// draw is strictly below `ε·2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ErasureThreshold(u128);

impl ErasureThreshold {
    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::arg(format!("erasure probability {eps} is not in [0, 1]")));
        }
        // 2^64 * eps is exact for the binary exponent shift; floor via cast.
        let t = (eps * 18_446_744_073_709_551_616.0) as u128;
        Ok(ErasureThreshold(t.min(1u128 << 64)))
    }

    #[inline]
    pub fn erases(&self, draw: u64) -> bool {
        (draw as u128) < self.0
    }
}

/// The per-position uniform draws of one trial. Key `(seed, trial)` selects a
/// ChaCha8 stream; position `k` consumes the `k`-th 64-bit word of it, so the
/// result does not depend on how trials are spread over workers.
pub fn trial_draws(len: usize, seed: u64, trial: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..len).map(|_| rng.next_u64()).collect()
}

/// Erasure pattern from precomputed draws.
pub fn erasures_from_draws(draws: &[u64], threshold: ErasureThreshold) -> ErasurePattern {
    let mut words = vec![0u64; draws.len().div_ceil(64)];
    for (k, &d) in draws.iter().enumerate() {
        if threshold.erases(d) {
            words[k / 64] |= 1 << (k % 64);
        }
    }
    ErasurePattern::new(BitVector::from_words(draws.len(), words))
}

/// One BEC(ε) erasure pattern of length `len`, fully determined by
/// `(seed, trial)`. Patterns for the same key are nested in `ε`.
pub fn sample_erasures(len: usize, eps: f64, seed: u64, trial: u64) -> Result<ErasurePattern> {
    let threshold = ErasureThreshold::new(eps)?;
    Ok(erasures_from_draws(&trial_draws(len, seed, trial), threshold))
}

/// Whether the reduced pattern `omega` lies in the failure set of bit `i`:
/// some codeword has a one at `i` and is otherwise supported inside `omega`.
///
/// Decided as: column `i` of the generator is not in the span of the columns
/// at positions `j ≠ i` that `omega` leaves unerased.
pub fn omega_membership(code: &LinearCode, i: usize, omega: &BitVector) -> Result<bool> {
    let n = code.len();
    if i >= n {
        return Err(Error::arg(format!("bit index {i} out of range for length {n}")));
    }
    if omega.len() + 1 != n {
        return Err(Error::arg(format!(
            "reduced pattern has length {}, expected {}",
            omega.len(),
            n - 1
        )));
    }
    let mut span = ColumnSpan::new(code.dimension());
    let erased = omega.with_inserted(i, true);
    Ok(!recoverable_from_others(code, i, &erased, &mut span))
}

/// Whether bit `i` is determined by the unerased positions other than `i`.
/// `erased` is a full-length pattern; its value at `i` is ignored. `span` is
/// scratch space of length `K`.
pub fn recoverable_from_others(code: &LinearCode, i: usize, erased: &BitVector, span: &mut ColumnSpan) -> bool {
    span.clear();
    for j in erased.complement().ones_iter() {
        if j == i {
            continue;
        }
        span.insert_words(code.column_words(j));
        if span.is_full() {
            return true;
        }
    }
    span.contains_words(code.column_words(i))
}

/// Decoder outcome for one position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BitStatus {
    /// Observed directly.
    Known,
    /// Determined by the other observations.
    Recovered,
    /// The posterior is uniform; the decoder outputs an erasure.
    Failed,
}

/// Per-bit results of bit-MAP decoding.
///
/// `extrinsic[i]` decides bit `i` from every output except `y_i`, which is
/// what EXIT functions measure. `ordinary[i]` also uses `y_i` when present.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct DecodeReport {
    pub extrinsic: Vec<BitStatus>,
    pub ordinary: Vec<BitStatus>,
    pub block_success: bool,
}

impl DecodeReport {
    pub fn extrinsic_failures(&self) -> usize {
        self.extrinsic.iter().filter(|s| **s == BitStatus::Failed).count()
    }

    pub fn ordinary_failures(&self) -> usize {
        self.ordinary.iter().filter(|s| **s == BitStatus::Failed).count()
    }
}

/// Gauss-Jordan elimination of the generator on the unerased columns,
/// answering extrinsic and ordinary decodability of every bit at once.
///
/// After reduction on the unerased set `U` with rank `r`:
/// an erased bit is lost iff its column is nonzero in some row `≥ r`;
/// an unerased non-pivot bit is always recoverable from the pivot columns;
/// an unerased pivot bit is extrinsically lost iff its pivot row has no other
/// one inside `U`.
pub struct ExtrinsicDecoder<'a> {
    code: &'a LinearCode,
    work: BitMatrix,
    rank: usize,
    extrinsic_failed: BitVector,
}

impl<'a> ExtrinsicDecoder<'a> {
    pub fn new(code: &'a LinearCode) -> Self {
        ExtrinsicDecoder {
            code,
            work: code.generator().clone(),
            rank: 0,
            extrinsic_failed: BitVector::zeros(code.len()),
        }
    }

    pub fn decode(&mut self, pattern: &ErasurePattern) {
        let code = self.code;
        assert_eq!(pattern.len(), code.len(), "pattern length mismatch");
        let k = code.dimension();
        self.work.clone_from(code.generator());
        let known = pattern.erased().complement();
        let mut pivots: Vec<usize> = Vec::with_capacity(k);
        let mut rank = 0;
        for c in known.ones_iter() {
            let Some(p) = (rank..k).find(|&r| self.work.get(r, c)) else {
                continue;
            };
            self.work.swap_rows(rank, p);
            for r in 0..k {
                if r != rank && self.work.get(r, c) {
                    self.work.xor_row_into(r, rank);
                }
            }
            pivots.push(c);
            rank += 1;
            if rank == k {
                break;
            }
        }
        self.rank = rank;

        let mut lost = vec![0u64; known.words().len()];
        for r in rank..k {
            for (l, w) in lost.iter_mut().zip(self.work.row_words(r)) {
                *l |= w;
            }
        }
        for (l, e) in lost.iter_mut().zip(pattern.erased().words()) {
            *l &= e;
        }
        let mut failed = BitVector::from_words(code.len(), lost);
        for (row, &c) in pivots.iter().enumerate() {
            let support_in_known: u32 = self
                .work
                .row_words(row)
                .iter()
                .zip(known.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            if support_in_known == 1 {
                failed.set(c, true);
            }
        }
        self.extrinsic_failed = failed;
    }

    /// Extrinsic failure of bit `i` for the last decoded pattern.
    #[inline]
    pub fn failed(&self, i: usize) -> bool {
        self.extrinsic_failed.get(i)
    }

    pub fn failed_count(&self) -> usize {
        self.extrinsic_failed.weight()
    }

    pub fn failed_bits(&self) -> &BitVector {
        &self.extrinsic_failed
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn block_success(&self) -> bool {
        self.rank == self.code.dimension()
    }
}

/// Bit-MAP decoding of every position.
pub fn bit_map_decode(code: &LinearCode, pattern: &ErasurePattern) -> DecodeReport {
    let mut dec = ExtrinsicDecoder::new(code);
    dec.decode(pattern);
    let n = code.len();
    let extrinsic: Vec<BitStatus> = (0..n)
        .map(|i| if dec.failed(i) { BitStatus::Failed } else { BitStatus::Recovered })
        .collect();
    let ordinary = (0..n)
        .map(|i| if pattern.is_erased(i) { extrinsic[i] } else { BitStatus::Known })
        .collect();
    DecodeReport {
        extrinsic,
        ordinary,
        block_success: dec.block_success(),
    }
}

/// Block-MAP success: the unerased columns of the generator have rank `K`.
pub fn block_map_decode(code: &LinearCode, pattern: &ErasurePattern) -> bool {
    let mut span = ColumnSpan::new(code.dimension());
    for j in pattern.erased().complement().ones_iter() {
        span.insert_words(code.column_words(j));
        if span.is_full() {
            return true;
        }
    }
    span.is_full()
}

/// Outcome of [`monotonicity_check`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct MonotonicityReport {
    pub label: String,
    pub checks: usize,
    pub attempts: usize,
    pub violations: usize,
}

impl MonotonicityReport {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.checks > 0
    }
}

/// Randomized dominance test of the failure sets: draw a bit `i` and a
/// reduced pattern `ω`; whenever `ω` is a failure pattern, erase a random
/// nonempty set of further positions and confirm the result still fails.
/// Runs until `checks` such comparisons are made (or `64·checks` draws).
pub fn monotonicity_check(code: &LinearCode, checks: usize, seed: u64) -> Result<MonotonicityReport> {
    let n = code.len();
    if n < 2 {
        return Err(Error::arg("monotonicity needs blocklength at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MonotonicityReport {
        label: code.label().to_string(),
        checks: 0,
        attempts: 0,
        violations: 0,
    };
    while report.checks < checks && report.attempts < checks.saturating_mul(64) {
        report.attempts += 1;
        let i = rng.gen_range(0..n);
        let p: f64 = rng.gen_range(0.05..0.95);
        let omega = BitVector::from_bools(&(0..n - 1).map(|_| rng.gen_bool(p)).collect::<Vec<_>>());
        let zeros: Vec<usize> = omega.complement().ones_iter().collect();
        if zeros.is_empty() || !omega_membership(code, i, &omega)? {
            continue;
        }
        let mut larger = omega.clone();
        larger.set(zeros[rng.gen_range(0..zeros.len())], true);
        for &z in &zeros {
            if rng.gen_bool(0.25) {
                larger.set(z, true);
            }
        }
        report.checks += 1;
        if !omega_membership(code, i, &larger)? {
            report.violations += 1;
        }
    }
    Ok(report)
}
