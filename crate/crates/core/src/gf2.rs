//! GF(2) vectors and matrices, and the fast polar transforms.
//!
//! `BitVector` is word-packed (bit `i` lives in word `i / 64`, position
//! `i % 64`). The transforms work on whole words with XOR butterflies.
//! `Gf2Matrix` is a plain dense row-major matrix used for linear solving
//! and as the reference path in tests.

use std::fmt;

use crate::error::{invalid, Error, Result};

const WORD: usize = 64;

/// Masks selecting bit positions whose `h`-bit is clear, for `h = 1, 2, 4, ..., 32`.
const LOW_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Fixed-length vector over GF(2), packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
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

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        v.clear_tail();
        v
    }

    /// Builds a vector from 0/1 values; any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        v
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut v = Self::zeros(0);
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Unit vector with a single one at 0-based position `pos`.
    pub fn unit(len: usize, pos: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(pos, true);
        v
    }

    /// Takes the low `len` bits of `value`, bit `i` of the integer going to position `i`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.clear_tail();
        }
        v
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
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// In-place XOR with a vector of the same length.
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the AND with `other`.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// 0-based positions of the ones.
    pub fn ones_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    pub fn slice(&self, start: usize, end: usize) -> BitVector {
        assert!(start <= end && end <= self.len);
        BitVector::from_bools((start..end).map(|i| self.get(i)))
    }

    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        for b in other.iter() {
            out.push(b);
        }
        out
    }

    /// Copy with length changed to `len`, zero-filled or truncated.
    pub fn resized(&self, len: usize) -> BitVector {
        let mut out = BitVector::zeros(len);
        let keep = len.min(self.len);
        let full = keep / WORD;
        out.words[..full].copy_from_slice(&self.words[..full]);
        let r = keep % WORD;
        if r != 0 {
            out.words[full] = self.words[full] & ((1u64 << r) - 1);
        }
        out
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    /// `0`/`1` ASCII rendering, position 0 first.
    pub fn to_binary_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_binary_str(s: &str) -> Result<Self> {
        let mut v = BitVector::zeros(0);
        for c in s.trim().chars() {
            match c {
                '0' => v.push(false),
                '1' => v.push(true),
                '_' | ' ' => {}
                other => return Err(Error::Parse(format!("invalid binary digit {other:?}"))),
            }
        }
        Ok(v)
    }

    /// Hex rendering: position 0 is the most significant bit, left-padded with
    /// zeros up to a multiple of four bits.
    pub fn to_hex(&self) -> String {
        let pad = (4 - self.len % 4) % 4;
        let mut bits = vec![false; pad];
        bits.extend(self.iter());
        bits.chunks(4)
            .map(|c| {
                let nib = c.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
                char::from_digit(nib, 16).unwrap()
            })
            .collect()
    }

    /// Inverse of [`to_hex`](Self::to_hex) for a vector of `len` bits. Pad bits
    /// beyond `len` must be zero.
    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        let s = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(s);
        let mut bits = Vec::with_capacity(s.len() * 4);
        for c in s.chars().filter(|c| *c != '_') {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
            for k in (0..4).rev() {
                bits.push((nib >> k) & 1 == 1);
            }
        }
        if bits.len() < len {
            let mut padded = vec![false; len - bits.len()];
            padded.extend(bits);
            bits = padded;
        }
        let extra = bits.len() - len;
        if bits[..extra].iter().any(|&b| b) {
            return Err(Error::Parse(format!(
                "hex value {s} does not fit in {len} bits"
            )));
        }
        Ok(BitVector::from_bools(bits[extra..].iter().copied()))
    }

    /// Accepts either a `0`/`1` string of exactly `len` characters or a hex
    /// string (optionally `0x`-prefixed).
    pub fn parse(s: &str, len: usize) -> Result<Self> {
        let t = s.trim();
        let is_binary = !t.starts_with("0x")
            && t.chars().filter(|c| *c != '_').count() == len
            && t.chars().all(|c| c == '0' || c == '1' || c == '_');
        if is_binary {
            Self::from_binary_str(t)
        } else {
            Self::from_hex(t, len)
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_binary_string())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({})", self.to_binary_string())
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        BitVector::from_bools(iter)
    }
}

fn check_pow2(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!("length {n} is not a power of two")));
    }
    Ok(())
}

/// In-place `x <- x * G_N` on packed words holding `n` bits.
pub(crate) fn forward_butterfly(words: &mut [u64], n: usize) {
    let mut h = 1usize;
    while h < n && h < WORD {
        let m = LOW_MASKS[h.trailing_zeros() as usize];
        for w in words.iter_mut() {
            *w ^= (*w >> h) & m;
        }
        h <<= 1;
    }
    while h < n {
        let hw = h / WORD;
        for base in (0..words.len()).step_by(2 * hw) {
            for j in base..base + hw {
                words[j] ^= words[j + hw];
            }
        }
        h <<= 1;
    }
}

/// In-place `x <- x * G_N^T` on packed words holding `n` bits.
pub(crate) fn transpose_butterfly(words: &mut [u64], n: usize) {
    let mut h = 1usize;
    while h < n && h < WORD {
        let m = LOW_MASKS[h.trailing_zeros() as usize];
        for w in words.iter_mut() {
            *w ^= (*w & m) << h;
        }
        h <<= 1;
    }
    while h < n {
        let hw = h / WORD;
        for base in (0..words.len()).step_by(2 * hw) {
            for j in base..base + hw {
                words[j + hw] ^= words[j];
            }
        }
        h <<= 1;
    }
}

/// `u * G_N` with `G_N` the n-fold Kronecker power of `[[1,0],[1,1]]`.
pub fn polar_transform(u: &BitVector) -> Result<BitVector> {
    check_pow2(u.len())?;
    let mut x = u.clone();
    forward_butterfly(&mut x.words, u.len());
    Ok(x)
}

/// `u * G_N^T`. Self-inverse.
pub fn transpose_transform(u: &BitVector) -> Result<BitVector> {
    check_pow2(u.len())?;
    let mut x = u.clone();
    transpose_butterfly(&mut x.words, u.len());
    Ok(x)
}

/// `u_{1:k} * G^T_{N,1:k}` where the matrix is the upper-left `k x k` block of `G_N^T`.
///
/// `G_N^T` is upper triangular, so output `j` only sees inputs `<= j` and the
/// result does not depend on `N` beyond the bound `k <= N`.
pub fn transpose_transform_prefix(prefix: &BitVector, n: usize) -> Result<BitVector> {
    check_pow2(n)?;
    let k = prefix.len();
    if k > n {
        return Err(invalid(format!("prefix length {k} exceeds N = {n}")));
    }
    if k == 0 {
        return Ok(BitVector::zeros(0));
    }
    let m = k.next_power_of_two();
    let mut padded = prefix.resized(m);
    transpose_butterfly(&mut padded.words, m);
    Ok(padded.resized(k))
}

/// Hamming weight of row `i` (1-based) of `G_N`.
pub fn row_weight(n: usize, i: usize) -> Result<usize> {
    check_pow2(n)?;
    if i == 0 || i > n {
        return Err(invalid(format!("row index {i} outside 1..={n}")));
    }
    Ok(1 << (i - 1).count_ones())
}

/// Hamming weight of row `i` (1-based) of `G_N^T`, i.e. of column `i` of `G_N`.
pub fn transpose_row_weight(n: usize, i: usize) -> Result<usize> {
    check_pow2(n)?;
    if i == 0 || i > n {
        return Err(invalid(format!("row index {i} outside 1..={n}")));
    }
    Ok(1 << (n.trailing_zeros() - (i - 1).count_ones()))
}

/// Row `i` (0-based) of `G_N^T` as a packed vector: ones at every `j` with `i ⊆ j`.
pub(crate) fn transpose_row(n: usize, i: usize) -> BitVector {
    let mut r = BitVector::zeros(n);
    r.set(i, true);
    transpose_butterfly(&mut r.words, n);
    r
}

/// Dense matrix over GF(2), stored row-major as packed rows.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: Vec<BitVector>,
    cols: usize,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitVector::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
            cols: n,
        }
    }

    pub fn from_rows(rows: Vec<BitVector>, cols: usize) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("rows must all have the declared column count"));
        }
        Ok(Self { rows, cols })
    }

    /// Explicit `G_N` built by repeated Kronecker products with `G_2`.
    pub fn polar_kernel(n: usize) -> Result<Self> {
        check_pow2(n)?;
        let mut g = Gf2Matrix::identity(1);
        while g.nrows() < n {
            let m = g.nrows();
            let mut next = Gf2Matrix::zeros(2 * m, 2 * m);
            for i in 0..m {
                for j in 0..m {
                    if g.get(i, j) {
                        next.set(i, j, true);
                        next.set(m + i, j, true);
                        next.set(m + i, m + j, true);
                    }
                }
            }
            g = next;
        }
        Ok(g)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.rows[r].set(c, v)
    }

    pub fn row(&self, r: usize) -> &BitVector {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        let mut t = Gf2Matrix::zeros(self.cols, self.nrows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones_positions() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Upper-left `k x k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self {
            rows: self.rows[..k].iter().map(|r| r.resized(k)).collect(),
            cols: k,
        }
    }

    /// Row vector times matrix: `v * M`.
    pub fn left_mul(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.nrows() {
            return Err(invalid(format!(
                "vector length {} does not match {} rows",
                v.len(),
                self.nrows()
            )));
        }
        let mut out = BitVector::zeros(self.cols);
        for i in v.ones_positions() {
            out.xor_assign(&self.rows[i]);
        }
        Ok(out)
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        let rows = self
            .rows
            .iter()
            .map(|r| other.left_mul(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Gf2Matrix {
            rows,
            cols: other.cols,
        })
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(c)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            rank += 1;
        }
        rank
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.nrows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

/// Outcome of solving `A x = b` over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    Unique(BitVector),
    Inconsistent,
    /// Consistent but the solution space has dimension >= 1.
    Multiple,
}

/// Gaussian elimination for `A x = b`, `A` with one row per equation.
pub fn gf2_solve(a: &Gf2Matrix, b: &BitVector) -> Result<SolveStatus> {
    if a.nrows() != b.len() {
        return Err(invalid(format!(
            "matrix has {} rows but right-hand side has length {}",
            a.nrows(),
            b.len()
        )));
    }
    let k = a.ncols();
    let mut rows: Vec<BitVector> = a
        .rows
        .iter()
        .zip(b.iter())
        .map(|(r, bit)| {
            let mut aug = r.resized(k + 1);
            aug.set(k, bit);
            aug
        })
        .collect();

    let mut pivots = Vec::with_capacity(k);
    let mut rank = 0;
    for c in 0..k {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(c)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(c) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(c);
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r.get(k)) {
        return Ok(SolveStatus::Inconsistent);
    }
    if rank < k {
        return Ok(SolveStatus::Multiple);
    }
    let mut x = BitVector::zeros(k);
    for (r, &c) in pivots.iter().enumerate() {
        x.set(c, rows[r].get(k));
    }
    Ok(SolveStatus::Unique(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut impl Rng, n: usize) -> BitVector {
        BitVector::from_bools((0..n).map(|_| rng.random::<bool>()))
    }

    #[test]
    fn zero_input_maps_to_zero() {
        for n in [1, 2, 64, 128, 512] {
            assert!(polar_transform(&BitVector::zeros(n)).unwrap().is_zero());
            assert!(transpose_transform(&BitVector::zeros(n)).unwrap().is_zero());
        }
    }

    #[test]
    fn kernel_rows() {
        let x = polar_transform(&BitVector::from_bits(&[0, 1])).unwrap();
        assert_eq!(x.to_bits(), vec![1, 1]);
        let x = polar_transform(&BitVector::from_bits(&[1, 0])).unwrap();
        assert_eq!(x.to_bits(), vec![1, 0]);
    }

    #[test]
    fn first_unit_under_transpose_is_all_ones() {
        let x = transpose_transform(&BitVector::unit(8, 0)).unwrap();
        assert_eq!(x, BitVector::ones(8));
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            polar_transform(&BitVector::zeros(6)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(transpose_transform(&BitVector::zeros(12)).is_err());
        assert!(polar_transform(&BitVector::zeros(0)).is_err());
        assert!(transpose_transform_prefix(&BitVector::zeros(9), 8).is_err());
    }

    #[test]
    fn prefix_full_length_matches_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_bits(&mut rng, 32);
        assert_eq!(
            transpose_transform_prefix(&u, 32).unwrap(),
            transpose_transform(&u).unwrap()
        );
    }

    #[test]
    fn prefix_k3_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let u = random_bits(&mut rng, 3);
            let once = transpose_transform_prefix(&u, 8).unwrap();
            assert_eq!(transpose_transform_prefix(&once, 8).unwrap(), u);
        }
    }

    #[test]
    fn row_weights() {
        assert_eq!(row_weight(32, 1).unwrap(), 1);
        assert_eq!(row_weight(32, 25).unwrap(), 4);
        assert_eq!(row_weight(32, 12).unwrap(), 8);
        for n in [2, 4, 8, 16, 1024] {
            assert_eq!(row_weight(n, n).unwrap(), n);
            assert_eq!(transpose_row_weight(n, 1).unwrap(), n);
        }
        assert!(row_weight(32, 0).is_err());
        assert!(row_weight(32, 33).is_err());
        let g8 = Gf2Matrix::polar_kernel(8).unwrap();
        for i in 1..=8 {
            assert_eq!(row_weight(8, i).unwrap(), g8.row(i - 1).count_ones());
            assert_eq!(
                transpose_row_weight(8, i).unwrap(),
                g8.transpose().row(i - 1).count_ones()
            );
        }
    }

    #[test]
    fn transpose_row_helper_matches_dense() {
        let gt = Gf2Matrix::polar_kernel(128).unwrap().transpose();
        for i in [0, 1, 5, 63, 64, 100, 127] {
            assert_eq!(&transpose_row(128, i), gt.row(i));
        }
    }

    #[test]
    fn solve_identity_and_zero() {
        let b = BitVector::from_bits(&[1, 0, 1, 1]);
        assert_eq!(
            gf2_solve(&Gf2Matrix::identity(4), &b).unwrap(),
            SolveStatus::Unique(b.clone())
        );
        assert_eq!(
            gf2_solve(&Gf2Matrix::zeros(4, 4), &BitVector::zeros(4)).unwrap(),
            SolveStatus::Multiple
        );
        assert_eq!(
            gf2_solve(&Gf2Matrix::zeros(4, 4), &b).unwrap(),
            SolveStatus::Inconsistent
        );
        assert!(gf2_solve(&Gf2Matrix::identity(3), &b).is_err());
    }

    #[test]
    fn hex_and_binary_text() {
        let v = BitVector::from_bits(&[1, 0, 1, 1, 0, 1]);
        assert_eq!(v.to_hex(), "2d");
        assert_eq!(BitVector::from_hex("2d", 6).unwrap(), v);
        assert_eq!(BitVector::from_hex("0x2D", 6).unwrap(), v);
        assert!(BitVector::from_hex("ff", 6).is_err());
        assert_eq!(BitVector::parse("101101", 6).unwrap(), v);
        assert_eq!(BitVector::parse("2d", 6).unwrap(), v);
        assert_eq!(v.to_binary_string(), "101101");
    }

    #[test]
    fn resize_clears_tail() {
        let v = BitVector::ones(70);
        let r = v.resized(65);
        assert_eq!(r.count_ones(), 65);
        let r = v.resized(3).resized(70);
        assert_eq!(r.count_ones(), 3);
    }
}
