//! Affine permutations of code coordinates.
//!
//! Position `k` is the point of GF(2)^n with coordinates given by the bits of
//! `k`. An invertible affine map `x ↦ Ax + b` permutes positions, and every
//! such permutation preserves RM(n, r). The affine group is 2-transitive:
//! any ordered pair of distinct positions maps to any other.
//!
//! A codeword permutation `π` acts on words as `(x_{π(0)}, …, x_{π(N−1)})`.
//! When `π(i) = j` it induces a permutation `π̂` of the `N − 1` positions
//! left after removing `i`, which carries the failure set of bit `j` into
//! the failure set of bit `i`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::exit::{exit_exact_all, MAX_EXACT_N};
use crate::gf2::{BitMatrix, BitVector, ColumnSpan};
use crate::channel::omega_membership;

/// A permutation of `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &x in &image {
            if x >= image.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::arg("image is not a permutation"));
            }
        }
        Ok(Permutation { image })
    }

    pub fn identity(len: usize) -> Self {
        Permutation {
            image: (0..len).collect(),
        }
    }

    /// Swaps `a` and `b`.
    pub fn transposition(len: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(len);
        p.image.swap(a, b);
        p
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    #[inline]
    pub fn apply(&self, k: usize) -> usize {
        self.image[k]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `self ∘ other`: `k ↦ self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "size mismatch");
        Permutation {
            image: other.image.iter().map(|&k| self.image[k]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (k, &x) in self.image.iter().enumerate() {
            inv[x] = k;
        }
        Permutation { image: inv }
    }

    /// `(v_{π(0)}, …, v_{π(len−1)})`.
    pub fn permute_bits(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.len(), "size mismatch");
        let mut out = BitVector::zeros(v.len());
        for (k, &src) in self.image.iter().enumerate() {
            if v.get(src) {
                out.set(k, true);
            }
        }
        out
    }

    /// Same action on a word packed into a `u64`.
    pub fn permute_mask(&self, v: u64) -> u64 {
        self.image
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &src)| acc | ((v >> src) & 1) << k)
    }
}

/// The map `x ↦ Ax + b` on GF(2)^n, `n ≤ 63`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePermutation {
    matrix: BitMatrix,
    offset: BitVector,
    row_masks: Vec<u64>,
    offset_mask: u64,
}

impl AffinePermutation {
    pub fn new(matrix: BitMatrix, offset: BitVector) -> Result<Self> {
        let n = matrix.rows();
        if matrix.cols() != n || offset.len() != n {
            return Err(Error::arg("affine map needs an n×n matrix and a length-n offset"));
        }
        if n >= 64 {
            return Err(Error::size("affine dimension n", n, 63));
        }
        if matrix.rank() != n {
            return Err(Error::arg("affine map matrix is singular"));
        }
        let row_masks = (0..n).map(|r| matrix.row_words(r).first().copied().unwrap_or(0)).collect();
        let offset_mask = offset.words().first().copied().unwrap_or(0);
        Ok(AffinePermutation {
            matrix,
            offset,
            row_masks,
            offset_mask,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(BitMatrix::identity(n), BitVector::zeros(n)).expect("identity is invertible")
    }

    pub fn translation(n: usize, by: u64) -> Self {
        Self::new(BitMatrix::identity(n), BitVector::from_mask(n, by)).expect("identity is invertible")
    }

    fn from_masks(n: usize, rows: &[u64], offset: u64) -> Result<Self> {
        let rows: Vec<BitVector> = rows.iter().map(|&m| BitVector::from_mask(n, m)).collect();
        Self::new(BitMatrix::from_rows(n, &rows), BitVector::from_mask(n, offset))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn offset(&self) -> &BitVector {
        &self.offset
    }

    #[inline]
    fn linear(&self, x: u64) -> u64 {
        self.row_masks
            .iter()
            .enumerate()
            .fold(0, |acc, (r, &row)| acc | (((row & x).count_ones() as u64) & 1) << r)
    }

    /// `A·x + b` for a point packed as bits of `x`.
    #[inline]
    pub fn apply_point(&self, x: u64) -> u64 {
        self.linear(x) ^ self.offset_mask
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffinePermutation) -> AffinePermutation {
        let matrix = self.matrix.mul(&other.matrix);
        let offset = BitVector::from_mask(self.dim(), self.apply_point(other.offset_mask));
        Self::new(matrix, offset).expect("product of invertible maps is invertible")
    }

    pub fn inverse(&self) -> AffinePermutation {
        let inv = self.matrix.inverse().expect("matrix is invertible");
        let ainv_b = inv.mul_vec(&self.offset);
        Self::new(inv, ainv_b).expect("inverse is invertible")
    }

    /// A uniformly random element of the affine group.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let full = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
        loop {
            let rows: Vec<u64> = (0..n).map(|_| rng.gen::<u64>() & full).collect();
            if let Ok(ap) = Self::from_masks(n, &rows, rng.gen::<u64>() & full) {
                return ap;
            }
        }
    }

    /// A random affine map fixing the point `fixed`.
    pub fn random_fixing<R: Rng + ?Sized>(n: usize, fixed: u64, rng: &mut R) -> Self {
        let lin = Self::random(n, rng);
        // b = fixed + A·fixed
        let offset = fixed ^ lin.linear(fixed);
        Self::from_masks(n, &lin.row_masks, offset).expect("same linear part")
    }
}

/// The coordinate permutation `k ↦ A·point(k) + b`.
pub fn to_coordinate_permutation(ap: &AffinePermutation) -> Permutation {
    let len = 1u64 << ap.dim();
    Permutation {
        image: (0..len).map(|k| ap.apply_point(k) as usize).collect(),
    }
}

/// Completes `first` to a basis of GF(2)^n with standard basis vectors, in
/// increasing order. Returns the basis as column masks.
fn extend_to_basis(n: usize, first: u64) -> Vec<u64> {
    let mut span = ColumnSpan::new(n);
    let mut basis = Vec::with_capacity(n);
    for v in std::iter::once(first).chain((0..n).map(|k| 1u64 << k)) {
        if basis.len() == n {
            break;
        }
        if span.insert_words(&[v]) {
            basis.push(v);
        }
    }
    basis
}

/// Matrix whose `k`-th column is `columns[k]`.
fn from_columns(n: usize, columns: &[u64]) -> BitMatrix {
    let mut m = BitMatrix::zeros(n, n);
    for (c, &col) in columns.iter().enumerate() {
        for r in 0..n {
            if col >> r & 1 == 1 {
                m.set(r, c, true);
            }
        }
    }
    m
}

/// An affine map sending position `a ↦ c` and `b ↦ d` (0-based) on
/// GF(2)^n. `A` maps `a + b` to `c + d`; both vectors are extended to bases
/// greedily and `A = M_cd · M_ab^{-1}`. Then `offset = c + A·a`.
pub fn two_transitive_witness(n: usize, a: usize, b: usize, c: usize, d: usize) -> Result<AffinePermutation> {
    if n == 0 || n >= 64 {
        return Err(Error::arg(format!("witnesses need 1 ≤ n ≤ 63, got {n}")));
    }
    let len = 1usize << n;
    if [a, b, c, d].iter().any(|&x| x >= len) {
        return Err(Error::arg(format!("position out of range for length {len}")));
    }
    if a == b || c == d {
        return Err(Error::arg("witness pairs must consist of distinct positions"));
    }
    let src = from_columns(n, &extend_to_basis(n, (a ^ b) as u64));
    let dst = from_columns(n, &extend_to_basis(n, (c ^ d) as u64));
    let matrix = dst.mul(&src.inverse().expect("basis matrix is invertible"));
    let linear = AffinePermutation::new(matrix, BitVector::zeros(n))?;
    let offset = (c as u64) ^ linear.apply_point(a as u64);
    AffinePermutation::new(linear.matrix, BitVector::from_mask(n, offset))
}

/// Whether permuting codeword positions by `perm` maps the code onto itself.
pub fn verify_code_closure(code: &LinearCode, perm: &Permutation) -> Result<bool> {
    if perm.len() != code.len() {
        return Err(Error::arg(format!(
            "permutation of size {} applied to a code of length {}",
            perm.len(),
            code.len()
        )));
    }
    let permuted = code.generator().gather_columns(perm.image());
    Ok(code.generator().same_row_space(&permuted))
}

/// `π̂(k) = S_j(π(S_i(k)))` on `0..N−1`, where `S_i` re-inserts position `i`
/// and `S_j` removes position `j`. Requires `π(i) = j`.
pub fn induced_reduced_permutation(perm: &Permutation, i: usize, j: usize) -> Result<Permutation> {
    if i >= perm.len() || j >= perm.len() {
        return Err(Error::arg("position out of range"));
    }
    if perm.apply(i) != j {
        return Err(Error::arg(format!(
            "permutation sends {i} to {}, not {j}",
            perm.apply(i)
        )));
    }
    let splice_in = |k: usize| if k < i { k } else { k + 1 };
    let splice_out = |x: usize| if x < j { x } else { x - 1 };
    Ok(Permutation {
        image: (0..perm.len() - 1).map(|k| splice_out(perm.apply(splice_in(k)))).collect(),
    })
}

/// Membership table of the failure set of bit `i`, indexed by the reduced
/// pattern packed into an integer.
pub fn failure_set_table(code: &LinearCode, i: usize) -> Result<Vec<bool>> {
    if code.len() > MAX_EXACT_N {
        return Err(Error::size("blocklength N", code.len(), MAX_EXACT_N));
    }
    let m = code.len() - 1;
    (0..1u64 << m)
        .map(|mask| omega_membership(code, i, &BitVector::from_mask(m, mask)))
        .collect()
}

/// Whether `π̂` (induced by `perm` with `π(i) = j`) carries the failure set of
/// bit `j` onto the failure set of bit `i`, checked over every pattern in
/// both directions.
pub fn failure_sets_correspond(code: &LinearCode, perm: &Permutation, i: usize, j: usize) -> Result<bool> {
    let hat = induced_reduced_permutation(perm, i, j)?;
    let omega_i = failure_set_table(code, i)?;
    let omega_j = if i == j { omega_i.clone() } else { failure_set_table(code, j)? };
    let forward = (0..omega_j.len() as u64)
        .filter(|&w| omega_j[w as usize])
        .all(|w| omega_i[hat.permute_mask(w) as usize]);
    let inv = hat.inverse();
    let backward = (0..omega_i.len() as u64)
        .filter(|&w| omega_i[w as usize])
        .all(|w| omega_j[inv.permute_mask(w) as usize]);
    Ok(forward && backward)
}

/// Orbit of `start` under the group generated by `generators`.
pub fn orbit(generators: &[Permutation], start: usize) -> Vec<usize> {
    let len = generators.first().map_or(start + 1, Permutation::len);
    let mut seen = vec![false; len];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = g.apply(x);
            if !std::mem::replace(&mut seen[y], true) {
                queue.push_back(y);
            }
        }
    }
    (0..len).filter(|&k| seen[k]).collect()
}

/// Whether every bit has the same exact EXIT polynomial.
pub fn verify_exit_equality(code: &LinearCode) -> Result<bool> {
    let all = exit_exact_all(code)?;
    Ok(all.windows(2).all(|w| w[0].weights() == w[1].weights()))
}

/// Outcome of a randomized symmetry check of an RM code.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub label: String,
    pub quads: usize,
    pub seed: u64,
    pub witness_failures: usize,
    pub closure_failures: usize,
    /// `None` when the blocklength is too large for exhaustive checks.
    pub failure_set_symmetric: Option<bool>,
    pub stabilizer_orbit_full: Option<bool>,
    pub exit_functions_equal: Option<bool>,
    pub pass: bool,
}

/// Random quadruple `(a, b, c, d)` with `a ≠ b`, `c ≠ d` on `0..len`.
pub fn random_quad<R: Rng + ?Sized>(len: usize, rng: &mut R) -> [usize; 4] {
    let pair = |rng: &mut R| loop {
        let (x, y) = (rng.gen_range(0..len), rng.gen_range(0..len));
        if x != y {
            return (x, y);
        }
    };
    let (a, b) = pair(rng);
    let (c, d) = pair(rng);
    [a, b, c, d]
}

/// Checks `quads` random 2-transitivity witnesses against an RM code, and for
/// `N ≤ 16` also the symmetry of the failure set of bit 0 under random
/// stabilizer elements, transitivity of the induced group, and equality of
/// all EXIT functions. All randomness comes from `seed`.
pub fn symmetry_report(code: &LinearCode, n: usize, quads: usize, seed: u64) -> Result<SymmetryReport> {
    let rng = &mut ChaCha8Rng::seed_from_u64(seed);
    let len = code.len();
    if len != 1 << n {
        return Err(Error::arg(format!("code length {len} is not 2^{n}")));
    }
    let mut witness_failures = 0;
    let mut closure_failures = 0;
    if n >= 1 {
        for _ in 0..quads {
            let [a, b, c, d] = random_quad(len, rng);
            let perm = to_coordinate_permutation(&two_transitive_witness(n, a, b, c, d)?);
            if perm.apply(a) != c || perm.apply(b) != d {
                witness_failures += 1;
            }
            if !verify_code_closure(code, &perm)? {
                closure_failures += 1;
            }
        }
    }
    let (mut sym, mut orbit_full, mut equal) = (None, None, None);
    if (2..=MAX_EXACT_N).contains(&len) {
        let stabilizers: Vec<Permutation> = (0..50)
            .map(|_| to_coordinate_permutation(&AffinePermutation::random_fixing(n, 0, rng)))
            .collect();
        let mut ok = true;
        let mut hats = Vec::new();
        for p in &stabilizers {
            ok &= failure_sets_correspond(code, p, 0, 0)?;
            hats.push(induced_reduced_permutation(p, 0, 0)?);
        }
        sym = Some(ok);
        orbit_full = Some(orbit(&hats, 0).len() == len - 1);
        equal = Some(verify_exit_equality(code)?);
    }
    let pass = witness_failures == 0
        && closure_failures == 0
        && sym.unwrap_or(true)
        && orbit_full.unwrap_or(true)
        && equal.unwrap_or(true);
    Ok(SymmetryReport {
        label: code.label().to_string(),
        quads,
        seed,
        witness_failures,
        closure_failures,
        failure_set_symmetric: sym,
        stabilizer_orbit_full: orbit_full,
        exit_functions_equal: equal,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{rm_generator, RmParams};
    use proptest::prelude::*;

    fn rm(n: usize, r: usize) -> LinearCode {
        rm_generator(RmParams::new(n, r).unwrap()).unwrap()
    }

    #[test]
    fn identity_and_translation() {
        assert_eq!(to_coordinate_permutation(&AffinePermutation::identity(3)), Permutation::identity(8));
        // x ↦ x + (1, 0) swaps positions 0↔1 and 2↔3
        let p = to_coordinate_permutation(&AffinePermutation::translation(2, 0b01));
        assert_eq!(p.image(), &[1, 0, 3, 2]);
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut m = BitMatrix::identity(3);
        m.set(2, 2, false);
        assert!(AffinePermutation::new(m, BitVector::zeros(3)).is_err());
        assert!(AffinePermutation::new(BitMatrix::identity(3), BitVector::zeros(2)).is_err());
    }

    #[test]
    fn group_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=6 {
            for _ in 0..20 {
                let g = AffinePermutation::random(n, &mut rng);
                let h = AffinePermutation::random(n, &mut rng);
                let pg = to_coordinate_permutation(&g);
                let ph = to_coordinate_permutation(&h);
                assert_eq!(to_coordinate_permutation(&g.compose(&h)), pg.compose(&ph));
                assert_eq!(to_coordinate_permutation(&g.inverse()), pg.inverse());
                assert_eq!(
                    to_coordinate_permutation(&g.compose(&g.inverse())),
                    Permutation::identity(1 << n)
                );
                assert!(Permutation::new(pg.image().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn witness_examples() {
        let w = two_transitive_witness(2, 0, 1, 1, 0).unwrap();
        let p = to_coordinate_permutation(&w);
        assert_eq!((p.apply(0), p.apply(1)), (1, 0));
        // the translation by 01 is one valid witness; any valid one is accepted
        let t = to_coordinate_permutation(&AffinePermutation::translation(2, 1));
        assert_eq!((t.apply(0), t.apply(1)), (1, 0));

        let same = to_coordinate_permutation(&two_transitive_witness(3, 2, 5, 2, 5).unwrap());
        assert_eq!((same.apply(2), same.apply(5)), (2, 5));

        assert!(two_transitive_witness(2, 1, 1, 0, 2).is_err());
        assert!(two_transitive_witness(2, 0, 1, 3, 3).is_err());
        assert!(two_transitive_witness(2, 0, 4, 1, 2).is_err());
        assert!(two_transitive_witness(0, 0, 0, 0, 0).is_err());
    }

    #[test]
    fn closure_examples() {
        let c = rm(3, 1);
        assert!(verify_code_closure(&c, &Permutation::identity(8)).unwrap());
        let w = to_coordinate_permutation(&two_transitive_witness(3, 0, 1, 6, 3).unwrap());
        assert!(verify_code_closure(&c, &w).unwrap());
        assert!(!verify_code_closure(&c, &Permutation::transposition(8, 0, 1)).unwrap());
        assert!(verify_code_closure(&c, &Permutation::identity(4)).is_err());
    }

    #[test]
    fn induced_permutation_examples() {
        assert_eq!(
            induced_reduced_permutation(&Permutation::identity(5), 2, 2).unwrap(),
            Permutation::identity(4)
        );
        // π = (0 1)(2 3), i = 0, j = 1:
        // k=0 → S_i 1 → π 0 → S_j 0; k=1 → 2 → 3 → 2; k=2 → 3 → 2 → 1
        let p = Permutation::new(vec![1, 0, 3, 2]).unwrap();
        let hat = induced_reduced_permutation(&p, 0, 1).unwrap();
        assert_eq!(hat.image(), &[0, 2, 1]);
        assert!(induced_reduced_permutation(&p, 0, 2).is_err());
    }

    #[test]
    fn stabilizer_preserves_failure_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, r) in [(3, 1), (4, 1)] {
            let c = rm(n, r);
            for i in [0usize, 5] {
                for _ in 0..10 {
                    let ap = AffinePermutation::random_fixing(n, i as u64, &mut rng);
                    let p = to_coordinate_permutation(&ap);
                    assert_eq!(p.apply(i), i);
                    assert!(failure_sets_correspond(&c, &p, i, i).unwrap());
                }
            }
        }
    }

    #[test]
    fn moving_permutations_relate_failure_sets() {
        let c = rm(4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let [i, b, j, d] = random_quad(16, &mut rng);
            let p = to_coordinate_permutation(&two_transitive_witness(4, i, b, j, d).unwrap());
            assert!(failure_sets_correspond(&c, &p, i, j).unwrap());
        }
    }

    #[test]
    fn non_automorphism_breaks_symmetry() {
        let c = rm(3, 1);
        // swapping 1 and 2 fixes 0 but is not an automorphism
        let p = Permutation::transposition(8, 1, 2);
        assert!(!failure_sets_correspond(&c, &p, 0, 0).unwrap());
    }

    #[test]
    fn induced_group_is_transitive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=4 {
            let i = (1usize << n) - 1;
            let hats: Vec<Permutation> = (0..10)
                .map(|_| {
                    let p = to_coordinate_permutation(&AffinePermutation::random_fixing(n, i as u64, &mut rng));
                    induced_reduced_permutation(&p, i, i).unwrap()
                })
                .collect();
            assert_eq!(orbit(&hats, 0).len(), (1 << n) - 1);
        }
    }

    #[test]
    fn exit_equality() {
        assert!(verify_exit_equality(&rm(3, 1)).unwrap());
        assert!(verify_exit_equality(&rm(4, 2)).unwrap());
        let g = BitMatrix::from_bool_rows(&[vec![true, true, false], vec![false, false, true]]);
        assert!(!verify_exit_equality(&LinearCode::new(g, "toy").unwrap()).unwrap());
        assert!(verify_exit_equality(&rm(5, 2)).is_err());
    }

    #[test]
    fn report() {
        let rep = symmetry_report(&rm(3, 1), 3, 100, 5).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.failure_set_symmetric, Some(true));
        let rep = symmetry_report(&rm(5, 2), 5, 50, 5).unwrap();
        assert!(rep.pass);
        assert_eq!(serde_json::to_string(&rep).unwrap(), serde_json::to_string(&symmetry_report(&rm(5, 2), 5, 50, 5).unwrap()).unwrap());
        assert_eq!(rep.failure_set_symmetric, None);
    }

    proptest! {
        #[test]
        fn witnesses_hit_their_targets(n in 1usize..=10, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let len = 1usize << n;
            let [a, b, c, d] = random_quad(len, &mut rng);
            let w = two_transitive_witness(n, a, b, c, d).unwrap();
            prop_assert_eq!(w.apply_point(a as u64), c as u64);
            prop_assert_eq!(w.apply_point(b as u64), d as u64);
        }

        #[test]
        fn permutation_inverse(seed in any::<u64>(), n in 1usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = to_coordinate_permutation(&AffinePermutation::random(n, &mut rng));
            prop_assert_eq!(p.compose(&p.inverse()), Permutation::identity(1 << n));
            let v = BitVector::from_mask(1 << n, rand::Rng::gen::<u64>(&mut rng));
            prop_assert_eq!(p.inverse().permute_bits(&p.permute_bits(&v)), v);
        }
    }
}
