//! Reed–Muller and general binary linear codes.
//!
//! Codeword position `k` (0-based) corresponds to the point of GF(2)^n whose
//! coordinates are the bits of `k`, least-significant bit first. With this
//! convention the generator rows are exactly rows of the Kronecker power
//! [`hadamard_power`](crate::gf2::hadamard_power).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::gf2::{hadamard_row, BitMatrix, BitVector};
use crate::math::binomial_u64;

/// Largest `n` accepted for RM construction.
pub const MAX_RM_N: usize = 24;

/// Largest generator (in bits) that will be allocated.
pub const MAX_GENERATOR_BITS: usize = 1 << 33;

/// Largest dimension for which codewords are enumerated exhaustively.
pub const MAX_ENUMERATION_K: usize = 24;

/// Parameters `(n, r)` of RM(n, r).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RmParams {
    n: usize,
    r: usize,
}

impl RmParams {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r > n {
            return Err(Error::arg(format!("RM order r={r} exceeds n={n}")));
        }
        if n > MAX_RM_N {
            return Err(Error::size("RM n", n, MAX_RM_N));
        }
        Ok(RmParams { n, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn blocklength(&self) -> usize {
        1 << self.n
    }

    /// `K = Σ_{i≤r} C(n, i)`.
    pub fn dimension(&self) -> usize {
        (0..=self.r).map(|i| binomial_u64(self.n, i) as usize).sum()
    }

    /// `d = 2^(n−r)`.
    pub fn min_distance(&self) -> usize {
        1 << (self.n - self.r)
    }

    pub fn rate(&self) -> BigRational {
        rate(*self)
    }
}

impl fmt::Display for RmParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rm:{},{}", self.n, self.r)
    }
}

impl FromStr for RmParams {
    type Err = Error;

    /// Parses `rm:n,r`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("rm:")
            .ok_or_else(|| Error::Parse(format!("code spec {s:?} does not start with \"rm:\"")))?;
        let (n, r) = body
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("code spec {s:?} is not of the form rm:n,r")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad integer {t:?} in {s:?}: {e}")))
        };
        RmParams::new(parse(n)?, parse(r)?)
    }
}

/// Exact rate `K/N` of RM(n, r).
pub fn rate(p: RmParams) -> BigRational {
    BigRational::new(BigInt::from(p.dimension()), BigInt::from(p.blocklength()))
}

/// Where a [`LinearCode`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFamily {
    ReedMuller(RmParams),
    General,
}

/// A binary linear code given by a full-row-rank generator matrix.
#[derive(Clone)]
pub struct LinearCode {
    generator: BitMatrix,
    // transposed generator: row j is column j of the generator
    columns: BitMatrix,
    label: String,
    family: CodeFamily,
}

impl LinearCode {
    /// Wraps a generator matrix, rejecting rank-deficient or empty ones.
    pub fn new(generator: BitMatrix, label: impl Into<String>) -> Result<Self> {
        Self::with_family(generator, label.into(), CodeFamily::General)
    }

    fn with_family(generator: BitMatrix, label: String, family: CodeFamily) -> Result<Self> {
        if generator.rows() == 0 {
            return Err(Error::arg("generator has no rows"));
        }
        let rank = generator.rank();
        if rank != generator.rows() {
            return Err(Error::arg(format!(
                "generator has {} rows but rank {rank}",
                generator.rows()
            )));
        }
        let columns = generator.transpose();
        Ok(LinearCode {
            generator,
            columns,
            label,
            family,
        })
    }

    /// Parses a generator matrix written as one row of `0`/`1` characters per
    /// line. Blank lines and lines starting with `#` are ignored.
    pub fn from_generator_text(text: &str, label: impl Into<String>) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(BitVector::parse)
            .collect::<Result<Vec<_>>>()?;
        let cols = rows.first().map(BitVector::len).unwrap_or(0);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Parse(format!(
                "generator row {} has length {}, expected {cols}",
                bad + 1,
                rows[bad].len()
            )));
        }
        Self::new(BitMatrix::from_rows(cols, &rows), label)
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// Column `j` of the generator, packed as words of length `K`.
    #[inline]
    pub fn column_words(&self, j: usize) -> &[u64] {
        self.columns.row_words(j)
    }

    pub fn column(&self, j: usize) -> BitVector {
        self.columns.row(j)
    }

    /// Blocklength `N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.generator.cols()
    }

    /// Dimension `K`.
    #[inline]
    pub fn dimension(&self) -> usize {
        self.generator.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    pub fn rate(&self) -> BigRational {
        BigRational::new(BigInt::from(self.dimension()), BigInt::from(self.len()))
    }

    /// `u·G`.
    pub fn encode(&self, message: &BitVector) -> BitVector {
        assert_eq!(message.len(), self.dimension(), "message length mismatch");
        let mut c = BitVector::zeros(self.len());
        for r in message.ones_iter() {
            c.xor_assign(&self.generator.row(r));
        }
        c
    }

    /// Exact membership test.
    pub fn contains(&self, word: &BitVector) -> bool {
        if word.len() != self.len() {
            return false;
        }
        let single = BitMatrix::from_rows(self.len(), std::slice::from_ref(word));
        self.generator.stack(&single).rank() == self.dimension()
    }
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearCode")
            .field("label", &self.label)
            .field("n", &self.len())
            .field("k", &self.dimension())
            .finish()
    }
}

/// RM(n, r): the rows of the n-fold Kronecker power of `[[1,0],[1,1]]` whose
/// weight is at least `2^(n−r)`, in ascending row order.
pub fn rm_generator(p: RmParams) -> Result<LinearCode> {
    let len = p.blocklength();
    let k = p.dimension();
    if k.saturating_mul(len) > MAX_GENERATOR_BITS {
        return Err(Error::size("generator bits", k.saturating_mul(len), MAX_GENERATOR_BITS));
    }
    // row weight is 2^popcount(row)
    let min_ones = p.n - p.r;
    let rows: Vec<BitVector> = (0..len)
        .filter(|row| row.count_ones() as usize >= min_ones)
        .map(|row| hadamard_row(p.n, row))
        .collect();
    debug_assert_eq!(rows.len(), k);
    let generator = BitMatrix::from_rows(len, &rows);
    let columns = generator.transpose();
    // Full rank holds by construction: the selected rows of a unit
    // lower-triangular matrix are independent.
    Ok(LinearCode {
        generator,
        columns,
        label: p.to_string(),
        family: CodeFamily::ReedMuller(p),
    })
}

/// Iterator over all `2^K` codewords in Gray-code order.
pub struct Codewords<'a> {
    code: &'a LinearCode,
    current: BitVector,
    step: u64,
    total: u64,
}

impl Iterator for Codewords<'_> {
    type Item = BitVector;

    fn next(&mut self) -> Option<BitVector> {
        if self.step >= self.total {
            return None;
        }
        if self.step > 0 {
            let flip = self.step.trailing_zeros() as usize;
            self.current.xor_assign(&self.code.generator.row(flip));
        }
        self.step += 1;
        Some(self.current.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.step) as usize;
        (left, Some(left))
    }
}

pub fn enumerate_codewords(code: &LinearCode) -> Result<Codewords<'_>> {
    let k = code.dimension();
    if k > MAX_ENUMERATION_K {
        return Err(Error::size("code dimension K", k, MAX_ENUMERATION_K));
    }
    Ok(Codewords {
        code,
        current: BitVector::zeros(code.len()),
        step: 0,
        total: 1u64 << k,
    })
}

/// Minimum weight over nonzero codewords, by exhaustive enumeration.
pub fn min_distance_bruteforce(code: &LinearCode) -> Result<usize> {
    Ok(enumerate_codewords(code)?
        .skip(1)
        .map(|c| c.weight())
        .min()
        .expect("K >= 1 so a nonzero codeword exists"))
}

/// One member of a [`CodeSequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMember {
    pub params: RmParams,
    pub rate: BigRational,
    /// `max(R_n − R, 0)`.
    pub gap: BigRational,
}

/// RM codes of growing length with rates approaching a target from above.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSequence {
    pub target_rate: BigRational,
    pub members: Vec<SequenceMember>,
}

/// For each `n`, the smallest order `r` whose rate reaches `target`.
pub fn sequence_for_rate(target: &BigRational, n_list: &[usize]) -> Result<CodeSequence> {
    let zero = BigRational::from_integer(0.into());
    let one = BigRational::from_integer(1.into());
    if *target <= zero || *target >= one {
        return Err(Error::arg(format!("target rate {target} is not in (0, 1)")));
    }
    let members = n_list
        .iter()
        .map(|&n| {
            let params = (0..=n)
                .map(|r| RmParams::new(n, r))
                .find(|p| p.as_ref().map_or(true, |p| rate(*p) >= *target))
                .expect("rate(n, n) = 1 exceeds any target")?;
            let rate = rate(params);
            let gap = if rate > *target { &rate - target } else { zero.clone() };
            Ok(SequenceMember { params, rate, gap })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CodeSequence {
        target_rate: target.clone(),
        members,
    })
}
