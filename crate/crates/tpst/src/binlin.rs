//! Bit-packed binary (GF(2)) vectors and matrices.
//!
//! Bits are packed into `u64` words, least significant bit first; all
//! arithmetic is defined on the logical bit values, so the packing is not
//! observable in behavior. Unused high bits of the last word are kept zero.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A vector over GF(2). Addition is componentwise XOR.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    /// Builds a vector from 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            v.set(j, b & 1 == 1);
        }
        v
    }

    /// Uniformly random vector drawn from `rng`.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self {
            words: (0..words_for(len)).map(|_| rng.next_u64()).collect(),
            len,
        };
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        debug_assert!(j < self.len);
        let mask = 1u64 << (j % WORD_BITS);
        if value {
            self.words[j / WORD_BITS] |= mask;
        } else {
            self.words[j / WORD_BITS] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Componentwise AND (used for diagonal masking).
    pub fn and(&self, other: &BitVector) -> BitVector {
        debug_assert_eq!(self.len, other.len);
        BitVector {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
            len: self.len,
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    /// Concatenates two vectors.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for (j, b) in self.iter().enumerate() {
            out.set(j, b);
        }
        for (j, b) in other.iter().enumerate() {
            out.set(self.len + j, b);
        }
        out
    }

    /// Lexicographic comparison with bit 0 most significant.
    pub fn cmp_lex(&self, other: &BitVector) -> Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words) {
            // Reversing puts bit 0 in the MSB, so word order equals bit order.
            match a.reverse_bits().cmp(&b.reverse_bits()) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// Hex encoding, most-significant-bit-first: bit 0 is the high bit of the
    /// first nibble; a partial trailing nibble is padded with zeros.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for nib in 0..self.len.div_ceil(4) {
            let mut val = 0u8;
            for k in 0..4 {
                let j = nib * 4 + k;
                if j < self.len && self.get(j) {
                    val |= 8 >> k;
                }
            }
            s.push(char::from_digit(u32::from(val), 16).unwrap());
        }
        s
    }

    /// Inverse of [`BitVector::to_hex`] for a known bit length.
    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        if s.len() != len.div_ceil(4) {
            return Err(Error::DimensionMismatch {
                context: "hex string length",
                expected: len.div_ceil(4),
                got: s.len(),
            });
        }
        let mut v = Self::zeros(len);
        for (nib, c) in s.chars().enumerate() {
            let val = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit `{c}`")))? as u8;
            for k in 0..4 {
                let j = nib * 4 + k;
                let bit = val & (8 >> k) != 0;
                if j < len {
                    v.set(j, bit);
                } else if bit {
                    return Err(Error::Parse("nonzero padding bits in hex row".into()));
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for b in self.iter() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, "]")
    }
}

/// A dense matrix over GF(2), row-major, each row bit-packed.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = words_for(cols);
        Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitVector]) -> Self {
        let cols = rows.first().map_or(0, BitVector::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.row_words_mut(i).copy_from_slice(&r.words);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.row_words(i)[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let mask = 1u64 << (j % WORD_BITS);
        let w = &mut self.row_words_mut(i)[j / WORD_BITS];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector {
            words: self.row_words(i).to_vec(),
            len: self.cols,
        }
    }

    /// Matrix sum (XOR).
    pub fn add(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
        out
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            let w = self.row_words(i);
            for j in 0..self.cols {
                if (w[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1 {
                    out.set(j, i, true);
                }
            }
        }
        out
    }

    /// Product of two matrices; `self.cols` must equal `other.rows`.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let mut acc = vec![0u64; other.words_per_row];
            let w = self.row_words(i);
            for j in 0..self.cols {
                if (w[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1 {
                    for (a, b) in acc.iter_mut().zip(other.row_words(j)) {
                        *a ^= b;
                    }
                }
            }
            out.row_words_mut(i).copy_from_slice(&acc);
        }
        out
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        Reduction::new(self).rank
    }

    /// Basis of the right kernel `{x : self · xᵀ = 0}` as matrix rows.
    ///
    /// Rows of the returned matrix span the dual code of the row space; for a
    /// full-rank k×n generator this yields an (n−k)×n parity-check matrix.
    pub fn nullspace(&self) -> BitMatrix {
        let red = Reduction::new(self);
        let n = self.cols;
        let pivot_of_col: Vec<Option<usize>> = {
            let mut m = vec![None; n];
            for (r, &c) in red.pivot_cols.iter().enumerate() {
                m[c] = Some(r);
            }
            m
        };
        let free_cols: Vec<usize> = (0..n).filter(|&c| pivot_of_col[c].is_none()).collect();
        let mut basis = BitMatrix::zeros(free_cols.len(), n);
        for (bi, &f) in free_cols.iter().enumerate() {
            basis.set(bi, f, true);
            for (r, &p) in red.pivot_cols.iter().enumerate() {
                if red.rref.get(r, f) {
                    basis.set(bi, p, true);
                }
            }
        }
        basis
    }

    /// One hex row per line (see [`BitVector::to_hex`]).
    pub fn to_hex_rows(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            s.push_str(&self.row(i).to_hex());
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                write!(f, "{}", u8::from(self.get(i, j)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Row-reduced echelon form bookkeeping.
struct Reduction {
    rref: BitMatrix,
    pivot_cols: Vec<usize>,
    rank: usize,
}

impl Reduction {
    fn new(m: &BitMatrix) -> Self {
        let mut rref = m.clone();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for col in 0..rref.cols {
            let Some(piv) = (r..rref.rows).find(|&i| rref.get(i, col)) else {
                continue;
            };
            if piv != r {
                for w in 0..rref.words_per_row {
                    rref.data
                        .swap(piv * rref.words_per_row + w, r * rref.words_per_row + w);
                }
            }
            for i in 0..rref.rows {
                if i != r && rref.get(i, col) {
                    for w in 0..rref.words_per_row {
                        let v = rref.data[r * rref.words_per_row + w];
                        rref.data[i * rref.words_per_row + w] ^= v;
                    }
                }
            }
            pivot_cols.push(col);
            r += 1;
            if r == rref.rows {
                break;
            }
        }
        Self {
            rref,
            pivot_cols,
            rank: r,
        }
    }
}

/// Computes `v · M` over GF(2) by folding the rows of `M` selected by `v`.
pub fn mat_vec_mul(v: &BitVector, m: &BitMatrix) -> Result<BitVector> {
    if v.len() != m.rows {
        return Err(Error::DimensionMismatch {
            context: "vector length vs matrix rows",
            expected: m.rows,
            got: v.len(),
        });
    }
    let mut acc = vec![0u64; m.words_per_row];
    for i in 0..m.rows {
        if v.get(i) {
            for (a, b) in acc.iter_mut().zip(m.row_words(i)) {
                *a ^= b;
            }
        }
    }
    Ok(BitVector {
        words: acc,
        len: m.cols,
    })
}

/// Kind of structured random matrix used for the transformation `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// A uniformly random permutation matrix.
    Permutation,
    /// Every entry an independent fair coin flip.
    DenseRandom,
}

impl MatrixKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "permutation" => Ok(Self::Permutation),
            "dense-random" => Ok(Self::DenseRandom),
            other => Err(Error::InvalidParameter {
                name: "r_kind",
                reason: format!("unknown matrix kind `{other}` (permutation | dense-random)"),
            }),
        }
    }
}

/// Samples an n×n transformation matrix; identical `(kind, n, seed)` always
/// yields an identical matrix.
pub fn sample_structured_matrix(n: usize, kind: MatrixKind, seed: u64) -> BitMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    match kind {
        MatrixKind::Permutation => {
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
            }
            let mut m = BitMatrix::zeros(n, n);
            for (i, &p) in perm.iter().enumerate() {
                m.set(i, p, true);
            }
            m
        }
        MatrixKind::DenseRandom => {
            let mut m = BitMatrix::zeros(n, n);
            for i in 0..n {
                let row = BitVector::random(n, &mut rng);
                m.row_words_mut(i).copy_from_slice(&row.words);
            }
            m
        }
    }
}

/// The binary diagonal selection matrix `S = diag{s_0,…,s_{n−1}}`.
///
/// The superposition fraction `alpha` fixes the number of ones at ⌊n·α⌋,
/// spread as uniformly as possible.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMatrix {
    diag: BitVector,
    alpha: f64,
}

impl SelectionMatrix {
    pub fn diag(&self) -> &BitVector {
        &self.diag
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    #[inline]
    pub fn selected(&self, j: usize) -> bool {
        self.diag.get(j)
    }

    /// The full n×n matrix with this diagonal.
    pub fn to_matrix(&self) -> BitMatrix {
        let n = self.diag.len();
        let mut m = BitMatrix::zeros(n, n);
        for j in 0..n {
            if self.diag.get(j) {
                m.set(j, j, true);
            }
        }
        m
    }

    /// Applies the mask: `(v · S)_j = v_j · s_j`.
    pub fn mask(&self, v: &BitVector) -> BitVector {
        v.and(&self.diag)
    }
}

/// Builds the selection matrix with ⌊n·α⌋ ones placed by the floor-counter
/// rule `s_j = 1  iff  ⌊(j+1)·m/n⌋ > ⌊j·m/n⌋`, which spreads them evenly.
pub fn build_selection_matrix(n: usize, alpha: f64) -> Result<SelectionMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("superposition fraction must lie in [0, 1], got {alpha}"),
        });
    }
    // Guard against products like 100·0.29 landing a hair below the integer.
    let m = ((n as f64) * alpha + 1e-9).floor() as usize;
    let m = m.min(n);
    let mut diag = BitVector::zeros(n);
    for j in 0..n {
        if (j + 1) * m / n > j * m / n {
            diag.set(j, true);
        }
    }
    Ok(SelectionMatrix { diag, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn naive_mat_vec(v: &BitVector, m: &BitMatrix) -> BitVector {
        let mut out = BitVector::zeros(m.cols());
        for j in 0..m.cols() {
            let mut bit = false;
            for i in 0..m.rows() {
                bit ^= v.get(i) && m.get(i, j);
            }
            out.set(j, bit);
        }
        out
    }

    #[test]
    fn mat_vec_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let v = BitVector::random(37, &mut rng);
        let id = BitMatrix::identity(37);
        assert_eq!(mat_vec_mul(&v, &id).unwrap(), v);
    }

    #[test]
    fn mat_vec_swap_permutation() {
        let v = BitVector::from_bits(&[1, 0]);
        let mut swap = BitMatrix::zeros(2, 2);
        swap.set(0, 1, true);
        swap.set(1, 0, true);
        assert_eq!(
            mat_vec_mul(&v, &swap).unwrap(),
            BitVector::from_bits(&[0, 1])
        );
    }

    #[test]
    fn mat_vec_matches_naive_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..20 {
            let v = BitVector::random(64, &mut rng);
            let m = {
                let mut m = BitMatrix::zeros(64, 64);
                for i in 0..64 {
                    for j in 0..64 {
                        m.set(i, j, rng.gen_bool(0.5));
                    }
                }
                m
            };
            assert_eq!(mat_vec_mul(&v, &m).unwrap(), naive_mat_vec(&v, &m));
        }
    }

    #[test]
    fn mat_vec_rejects_dimension_mismatch() {
        let v = BitVector::zeros(3);
        let m = BitMatrix::zeros(4, 4);
        let err = mat_vec_mul(&v, &m).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 4, got: 3, .. }));
    }

    #[test]
    fn selection_matrix_examples() {
        let s = build_selection_matrix(64, 1.0).unwrap();
        assert_eq!(s.diag().weight(), 64);
        let s = build_selection_matrix(64, 0.0).unwrap();
        assert!(s.diag().is_zero());
        let s = build_selection_matrix(4, 0.5).unwrap();
        let bits: Vec<u8> = s.diag().iter().map(u8::from).collect();
        assert_eq!(bits, vec![0, 1, 0, 1]);
    }

    #[test]
    fn selection_matrix_rejects_bad_alpha() {
        assert!(build_selection_matrix(8, -0.1).is_err());
        assert!(build_selection_matrix(8, 1.3).is_err());
    }

    #[test]
    fn selection_ones_count_exact_on_grid() {
        // Every n up to 4096 against the exact integer count ⌊n·j/100⌋.
        for n in 1usize..=4096 {
            for j in 0..=100usize {
                let alpha = j as f64 / 100.0;
                let s = build_selection_matrix(n, alpha).unwrap();
                assert_eq!(s.diag().weight(), n * j / 100, "n={n} alpha={alpha}");
            }
        }
    }

    #[test]
    fn permutation_rows_and_cols_sum_to_one() {
        for seed in [0u64, 7, 41] {
            let m = sample_structured_matrix(8, MatrixKind::Permutation, seed);
            let mt = m.transpose();
            for i in 0..8 {
                assert_eq!(m.row(i).weight(), 1);
                assert_eq!(mt.row(i).weight(), 1);
            }
            // M·Mᵀ = I for permutations.
            assert_eq!(m.mul(&mt), BitMatrix::identity(8));
        }
    }

    #[test]
    fn structured_sampling_is_deterministic() {
        for kind in [MatrixKind::Permutation, MatrixKind::DenseRandom] {
            let a = sample_structured_matrix(8, kind, 7);
            let b = sample_structured_matrix(8, kind, 7);
            assert_eq!(a, b);
            let c = sample_structured_matrix(8, kind, 8);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn dense_random_density_concentrates() {
        let m = sample_structured_matrix(64, MatrixKind::DenseRandom, 3);
        let ones: usize = (0..64).map(|i| m.row(i).weight()).sum();
        let frac = ones as f64 / 4096.0;
        assert!((0.4..=0.6).contains(&frac), "fraction of ones {frac}");
    }

    #[test]
    fn nullspace_is_orthogonal_complement() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..10 {
            let rows: Vec<BitVector> = (0..6).map(|_| BitVector::random(16, &mut rng)).collect();
            let g = BitMatrix::from_rows(&rows);
            let h = g.nullspace();
            assert_eq!(g.rank() + h.rows(), 16);
            let prod = g.mul(&h.transpose());
            assert_eq!(prod, BitMatrix::zeros(g.rows(), h.rows()));
            assert_eq!(h.rank(), h.rows());
        }
    }

    #[test]
    fn hex_round_trip() {
        let v = BitVector::from_bits(&[1, 0, 1, 1, 0, 0, 0, 0, 1, 1]);
        let s = v.to_hex();
        assert_eq!(s, "b0c");
        assert_eq!(BitVector::from_hex(&s, 10).unwrap(), v);
        assert!(BitVector::from_hex("b0d", 10).is_err()); // padding bit set
    }

    proptest! {
        #[test]
        fn xor_linearity(seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = BitVector::random(48, &mut rng);
            let b = BitVector::random(48, &mut rng);
            let m = sample_structured_matrix(48, MatrixKind::DenseRandom, seed ^ 0xabcd);
            let lhs = mat_vec_mul(&a.xor(&b), &m).unwrap();
            let rhs = mat_vec_mul(&a, &m).unwrap().xor(&mat_vec_mul(&b, &m).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mul_associativity(seed in 0u64..200) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let v = BitVector::random(24, &mut rng);
            let m = sample_structured_matrix(24, MatrixKind::DenseRandom, seed.wrapping_mul(3));
            let n = sample_structured_matrix(24, MatrixKind::DenseRandom, seed.wrapping_mul(5));
            let lhs = mat_vec_mul(&mat_vec_mul(&v, &m).unwrap(), &n).unwrap();
            let rhs = mat_vec_mul(&v, &m.mul(&n)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
