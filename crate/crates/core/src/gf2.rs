//! Bit-packed linear algebra over GF(2).
//!
//! Bits are packed little-endian into `u64` words: bit `k` lives in word
//! `k / 64` at position `k % 64`. Padding bits past the logical length are
//! kept at zero after every mutation, so word-level popcounts and equality
//! are always valid.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Index of the lowest set bit in a word slice.
#[inline]
fn lowest_one(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
}

#[inline]
fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_padding();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            if b {
                v.set(k, true);
            }
        }
        v
    }

    /// Builds a vector of `len` bits from raw little-endian words. Bits past
    /// `len` are discarded.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVector { len, words };
        v.clear_padding();
        v
    }

    /// The low `len` bits of `mask`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= WORD, "from_mask supports at most 64 bits");
        Self::from_words(len, vec![mask])
    }

    /// Parses a string of `0`/`1` characters, position 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        assert!(k < self.len, "bit index {k} out of range for length {}", self.len);
        (self.words[k / WORD] >> (k % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, k: usize, value: bool) {
        assert!(k < self.len, "bit index {k} out of range for length {}", self.len);
        let bit = 1u64 << (k % WORD);
        if value {
            self.words[k / WORD] |= bit;
        } else {
            self.words[k / WORD] &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, k: usize) {
        assert!(k < self.len, "bit index {k} out of range for length {}", self.len);
        self.words[k / WORD] ^= 1u64 << (k % WORD);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch");
        xor_into(&mut self.words, &other.words);
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len, "length mismatch");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        BitVector { len: self.len, words }
    }

    pub fn complement(&self) -> BitVector {
        let mut v = BitVector {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        v.clear_padding();
        v
    }

    /// Component-wise domination `self ≺ other`, i.e. `self_k <= other_k` for
    /// every `k`.
    pub fn is_dominated_by(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Indices of set bits in increasing order.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD + t)
                }
            })
        })
    }

    /// Copy with position `skip` removed; the result has length `len - 1`.
    pub fn without(&self, skip: usize) -> BitVector {
        assert!(skip < self.len);
        let mut out = BitVector::zeros(self.len - 1);
        for k in self.ones_iter() {
            match k.cmp(&skip) {
                std::cmp::Ordering::Less => out.set(k, true),
                std::cmp::Ordering::Greater => out.set(k - 1, true),
                std::cmp::Ordering::Equal => {}
            }
        }
        out
    }

    /// Inverse of [`BitVector::without`]: inserts `value` at position `at`.
    pub fn with_inserted(&self, at: usize, value: bool) -> BitVector {
        assert!(at <= self.len);
        let mut out = BitVector::zeros(self.len + 1);
        for k in self.ones_iter() {
            out.set(if k < at { k } else { k + 1 }, true);
        }
        if value {
            out.set(at, true);
        }
        out
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|k| self.get(k)).collect()
    }

    fn clear_padding(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len {
            f.write_str(if self.get(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Result of [`row_reduce`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowReduction {
    pub reduced: BitMatrix,
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.set(k, k, true);
        }
        m
    }

    /// Stacks row vectors. All rows must share the length `cols`.
    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, v) in rows.iter().enumerate() {
            assert_eq!(v.len(), cols, "row {r} has wrong length");
            m.row_words_mut(r).copy_from_slice(v.words());
        }
        m
    }

    pub fn from_bool_rows(rows: &[Vec<bool>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let vecs: Vec<_> = rows.iter().map(|r| BitVector::from_bools(r)).collect();
        Self::from_rows(cols, &vecs)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) out of range");
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) out of range");
        let bit = 1u64 << (c % WORD);
        let w = &mut self.data[r * self.stride + c / WORD];
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.stride);
        head[lo * self.stride..(lo + 1) * self.stride].swap_with_slice(&mut tail[..self.stride]);
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row_into(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        let s = self.stride;
        if dst < src {
            let (head, tail) = self.data.split_at_mut(src * s);
            xor_into(&mut head[dst * s..(dst + 1) * s], &tail[..s]);
        } else {
            let (head, tail) = self.data.split_at_mut(dst * s);
            xor_into(&mut tail[..s], &head[src * s..(src + 1) * s]);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).ones_iter() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Column `k` of the result is column `perm[k]` of `self`.
    pub fn gather_columns(&self, perm: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, perm.len());
        for r in 0..self.rows {
            for (k, &c) in perm.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, k, true);
                }
            }
        }
        out
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        BitMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        }
    }

    /// `self * v` for a vector of length `cols`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
                & 1;
            if parity == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in self.row(r).ones_iter() {
                let s = out.stride;
                xor_into(&mut out.data[r * s..(r + 1) * s], other.row_words(k));
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        row_reduce(self).rank
    }

    /// Inverse of a square matrix, or `None` if singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = BitMatrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in self.row(r).ones_iter() {
                aug.set(r, c, true);
            }
            aug.set(r, n + r, true);
        }
        let red = row_reduce(&aug).reduced;
        for k in 0..n {
            if !red.get(k, k) {
                return None;
            }
        }
        let mut inv = BitMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                if red.get(r, n + c) {
                    inv.set(r, c, true);
                }
            }
        }
        Some(inv)
    }

    /// True iff every row of `other` lies in the row space of `self` and the
    /// two row spaces have equal dimension.
    pub fn same_row_space(&self, other: &BitMatrix) -> bool {
        if self.cols != other.cols {
            return false;
        }
        let r1 = self.rank();
        r1 == other.rank() && r1 == self.stack(other).rank()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Largest `n` for which [`hadamard_power`] materializes the dense matrix.
/// A `2^n × 2^n` bit matrix at this cap occupies 32 MiB.
pub const MAX_DENSE_HADAMARD_N: usize = 14;

/// Entry `(row, col)` of the n-fold Kronecker power of `[[1,0],[1,1]]`. It is
/// one exactly when the bits of `col` are a subset of the bits of `row`.
#[inline]
pub fn hadamard_entry(row: usize, col: usize) -> bool {
    col & !row == 0
}

/// Row `row` of the n-fold Kronecker power, of length `2^n`, without
/// materializing the full matrix. Its weight is `2^popcount(row)`.
pub fn hadamard_row(n: usize, row: usize) -> BitVector {
    let len = 1usize << n;
    assert!(row < len);
    let mut v = BitVector::zeros(len);
    // enumerate submasks of `row`
    let mut sub = row;
    loop {
        v.set(sub, true);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & row;
    }
    v
}

/// The n-fold Kronecker power of `[[1,0],[1,1]]`.
pub fn hadamard_power(n: usize) -> Result<BitMatrix> {
    hadamard_power_capped(n, MAX_DENSE_HADAMARD_N)
}

pub fn hadamard_power_capped(n: usize, max_n: usize) -> Result<BitMatrix> {
    if n > max_n {
        return Err(Error::size("hadamard power n", n, max_n));
    }
    let len = 1usize << n;
    let rows: Vec<_> = (0..len).map(|r| hadamard_row(n, r)).collect();
    Ok(BitMatrix::from_rows(len, &rows))
}

/// Gauss-Jordan elimination to reduced row-echelon form.
pub fn row_reduce(m: &BitMatrix) -> RowReduction {
    let mut reduced = m.clone();
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for c in 0..m.cols {
        if rank == m.rows {
            break;
        }
        let Some(p) = (rank..m.rows).find(|&r| reduced.get(r, c)) else {
            continue;
        };
        reduced.swap_rows(rank, p);
        for r in 0..m.rows {
            if r != rank && reduced.get(r, c) {
                reduced.xor_row_into(r, rank);
            }
        }
        pivot_cols.push(c);
        rank += 1;
    }
    RowReduction {
        reduced,
        pivot_cols,
        rank,
    }
}

/// Incrementally built span of vectors of a fixed length.
///
/// Each stored basis vector is keyed by its lowest set bit, and no two basis
/// vectors share a key; XOR with a basis vector clears its key and touches
/// only higher bits, so greedy reduction terminates.
#[derive(Clone, Debug)]
pub struct ColumnSpan {
    len: usize,
    stride: usize,
    basis: Vec<u64>,
    key_slot: Vec<Option<usize>>,
    dim: usize,
    scratch: Vec<u64>,
}

impl ColumnSpan {
    pub fn new(len: usize) -> Self {
        let stride = words_for(len).max(1);
        ColumnSpan {
            len,
            stride,
            basis: Vec::new(),
            key_slot: vec![None; len],
            dim: 0,
            scratch: vec![0; stride],
        }
    }

    /// Eliminates on the selected columns of `m`.
    pub fn from_columns(m: &BitMatrix, selected: &[usize]) -> Self {
        let t = m.transpose();
        let mut span = ColumnSpan::new(m.rows());
        for &c in selected {
            span.insert_words(t.row_words(c));
        }
        span
    }

    pub fn clear(&mut self) {
        self.basis.clear();
        self.key_slot.iter_mut().for_each(|s| *s = None);
        self.dim = 0;
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn is_full(&self) -> bool {
        self.dim == self.len
    }

    fn reduce_scratch(&mut self) -> Option<usize> {
        loop {
            let low = lowest_one(&self.scratch)?;
            match self.key_slot[low] {
                Some(slot) => {
                    let s = self.stride;
                    xor_into(&mut self.scratch, &self.basis[slot * s..(slot + 1) * s]);
                }
                None => return Some(low),
            }
        }
    }

    /// Adds a vector given as packed words; returns whether the dimension grew.
    pub fn insert_words(&mut self, v: &[u64]) -> bool {
        self.scratch.copy_from_slice(&v[..self.stride.min(v.len())]);
        match self.reduce_scratch() {
            None => false,
            Some(key) => {
                self.key_slot[key] = Some(self.dim);
                self.basis.extend_from_slice(&self.scratch);
                self.dim += 1;
                true
            }
        }
    }

    pub fn insert(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.len);
        self.insert_words(v.words())
    }

    pub fn contains_words(&mut self, v: &[u64]) -> bool {
        self.scratch.copy_from_slice(&v[..self.stride.min(v.len())]);
        self.reduce_scratch().is_none()
    }

    pub fn contains(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.len);
        self.contains_words(v.words())
    }
}

/// Whether column `target` of `m` is a GF(2) combination of the `selected`
/// columns.
pub fn in_column_span(m: &BitMatrix, selected: &[usize], target: usize) -> Result<bool> {
    if target >= m.cols() {
        return Err(Error::arg(format!("target column {target} out of range ({} columns)", m.cols())));
    }
    if let Some(&bad) = selected.iter().find(|&&c| c >= m.cols()) {
        return Err(Error::arg(format!("selected column {bad} out of range ({} columns)", m.cols())));
    }
    if selected.contains(&target) {
        return Err(Error::arg(format!("target column {target} is among the selected columns")));
    }
    let mut span = ColumnSpan::from_columns(m, selected);
    Ok(span.contains(&m.column(target)))
}
