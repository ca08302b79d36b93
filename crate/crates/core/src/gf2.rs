//! Dense linear algebra over GF(2).
//!
//! Rows are packed little-endian into `u64` words: column `c` of a row lives in
//! word `c / 64`, bit `c % 64`. Padding bits past the last column are always
//! zero, so derived equality compares values. Indices are 0-based throughout;
//! the 1-based row/digit numbering used when talking about nets maps to
//! index `ℓ - 1`.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

fn tail_mask(bits: usize) -> u64 {
    match bits % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector from 0/1 values.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// The low `len` bits of `word`, bit `i` giving entry `i`.
    pub fn from_word(word: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_word supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = word & tail_mask(len);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// First word of storage; only meaningful for vectors of at most 64 bits.
    pub fn as_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "BitVector({s})")
    }
}

/// A dense matrix over GF(2), row-major with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a.set(i, i, true);
        }
        a
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut a = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    a.set(r, c, true);
                }
            }
        }
        a
    }

    /// Builds a matrix with at most 64 columns from one word per row.
    pub fn from_row_words(words: &[u64], cols: usize) -> Self {
        assert!(cols <= WORD, "from_row_words supports at most 64 columns");
        let mut a = Self::zeros(words.len(), cols);
        if cols > 0 {
            for (r, &w) in words.iter().enumerate() {
                a.data[r] = w & tail_mask(cols);
            }
        }
        a
    }

    pub fn from_rows(rows: &[BitVector], cols: usize) -> Result<Self> {
        let mut a = Self::zeros(rows.len(), cols);
        for (r, v) in rows.iter().enumerate() {
            if v.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has {} entries, expected {cols}",
                    v.len()
                )));
            }
            a.row_mut(r).copy_from_slice(v.words());
        }
        Ok(a)
    }

    /// Parses rows of `0`/`1` characters. Intended for tests and fixtures.
    pub fn parse_rows(rows: &[&str]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut a = Self::zeros(rows.len(), cols);
        for (r, line) in rows.iter().enumerate() {
            if line.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has {} entries, expected {cols}",
                    line.len()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => a.set(r, c, true),
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unexpected character {other:?} in bit row"
                        )))
                    }
                }
            }
        }
        Ok(a)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) out of range");
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) out of range");
        let mask = 1u64 << (c % WORD);
        let w = &mut self.data[r * self.stride + c / WORD];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    /// Row `r` as a single word; requires at most 64 columns.
    pub fn row_word(&self, r: usize) -> u64 {
        debug_assert!(self.cols <= WORD);
        if self.stride == 0 {
            0
        } else {
            self.data[r * self.stride]
        }
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row(r).to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn xor_rows(&mut self, dst: usize, src: usize) {
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// The first `q` rows.
    pub fn top_rows(&self, q: usize) -> Self {
        assert!(q <= self.rows, "asked for {q} rows of a {}-row matrix", self.rows);
        Self {
            rows: q,
            cols: self.cols,
            stride: self.stride,
            data: self.data[..q * self.stride].to_vec(),
        }
    }

    /// Stacks matrices vertically.
    pub fn vstack(parts: &[&BitMatrix]) -> Result<Self> {
        let cols = parts.first().map_or(0, |p| p.cols);
        if let Some(p) = parts.iter().find(|p| p.cols != cols) {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack a {}-column matrix onto {cols} columns",
                p.cols
            )));
        }
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Self {
            rows,
            cols,
            stride: words_for(cols),
            data,
        })
    }

    pub fn mul(&self, rhs: &BitMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let s = out.stride;
                    for w in 0..s {
                        out.data[r * s + w] ^= rhs.data[k * s + w];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by a vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let bit = self
                .row(r)
                .iter()
                .zip(x.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>()
                % 2
                == 1;
            y.set(r, bit);
        }
        Ok(y)
    }

    /// Gauss-Jordan elimination over the leading `ncols` columns, in place.
    /// Pivot columns are taken in ascending order; returns the pivot columns.
    /// The first `pivots.len()` rows end up in reduced echelon form restricted
    /// to those columns, and all later rows are zero on them.
    fn eliminate(&mut self, ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..ncols {
            if next == self.rows {
                break;
            }
            let word = c / WORD;
            let mask = 1u64 << (c % WORD);
            let Some(p) = (next..self.rows).find(|&r| self.data[r * self.stride + word] & mask != 0)
            else {
                continue;
            };
            self.swap_rows(p, next);
            for r in 0..self.rows {
                if r != next && self.data[r * self.stride + word] & mask != 0 {
                    self.xor_rows(r, next);
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        self.clone().eliminate(self.cols).len()
    }

    /// Canonical basis of the row space: reduced row-echelon form with
    /// ascending pivot columns, one row per basis vector.
    pub fn row_space_basis(&self) -> Self {
        let mut a = self.clone();
        let r = a.eliminate(a.cols).len();
        a.top_rows(r)
    }

    /// Dimension of the affine solution set of `A x = y`, or `None` when the
    /// system is inconsistent.
    pub fn solution_space_dim(&self, y: &BitVector) -> Result<Option<usize>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, matrix has {} rows",
                y.len(),
                self.rows
            )));
        }
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    aug.set(r, c, true);
                }
            }
            if y.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let rank = aug.eliminate(self.cols).len();
        let inconsistent = (rank..self.rows).any(|r| aug.get(r, self.cols));
        Ok((!inconsistent).then_some(self.cols - rank))
    }

    /// Number of `x` with `A x = y (mod 2)`: zero or `2^(cols - rank)`.
    pub fn solve_count(&self, y: &BitVector) -> Result<u128> {
        match self.solution_space_dim(y)? {
            None => Ok(0),
            Some(d) => 1u128.checked_shl(d as u32).ok_or_else(|| {
                Error::InvalidParameter(format!("solution count 2^{d} does not fit in 128 bits"))
            }),
        }
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let s: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        write!(f, "]")
    }
}

pub fn rank(a: &BitMatrix) -> usize {
    a.rank()
}

pub fn solve_count(a: &BitMatrix, y: &BitVector) -> Result<u128> {
    a.solve_count(y)
}

pub fn row_space_basis(a: &BitMatrix) -> BitMatrix {
    a.row_space_basis()
}

fn intersect_pair(u: &BitMatrix, v: &BitMatrix) -> BitMatrix {
    let n = u.cols;
    let u = u.row_space_basis();
    let v = v.row_space_basis();
    let (a, b) = (u.rows, v.rows);
    // [U | I_a 0 ; V | 0 I_b]: rows whose left block vanishes after elimination
    // carry coefficients (x, y) with xU + yV = 0, and xU spans the intersection.
    let mut aug = BitMatrix::zeros(a + b, n + a + b);
    for r in 0..a {
        for c in 0..n {
            if u.get(r, c) {
                aug.set(r, c, true);
            }
        }
        aug.set(r, n + r, true);
    }
    for r in 0..b {
        for c in 0..n {
            if v.get(r, c) {
                aug.set(a + r, c, true);
            }
        }
        aug.set(a + r, n + a + r, true);
    }
    let rank = aug.eliminate(n).len();
    let mut out = BitMatrix::zeros(a + b - rank, n);
    for (i, r) in (rank..a + b).enumerate() {
        for k in 0..a {
            if aug.get(r, n + k) {
                out.xor_rows_from(i, &u, k);
            }
        }
    }
    out.row_space_basis()
}

impl BitMatrix {
    fn xor_rows_from(&mut self, dst: usize, src: &BitMatrix, src_row: usize) {
        let s = self.stride;
        for (x, y) in self.data[dst * s..(dst + 1) * s].iter_mut().zip(src.row(src_row)) {
            *x ^= y;
        }
    }
}

/// Canonical basis of the intersection of the row spaces of `bases`.
pub fn intersect_row_spaces(bases: &[BitMatrix]) -> Result<BitMatrix> {
    let Some(first) = bases.first() else {
        return Err(Error::InvalidParameter(
            "intersection of an empty list of row spaces".into(),
        ));
    };
    if let Some(b) = bases.iter().find(|b| b.cols != first.cols) {
        return Err(Error::DimensionMismatch(format!(
            "row spaces live in {} and {} columns",
            first.cols, b.cols
        )));
    }
    let mut acc = first.row_space_basis();
    for b in &bases[1..] {
        if acc.rows == 0 {
            break;
        }
        acc = intersect_pair(&acc, b);
    }
    Ok(acc)
}

/// Incremental basis of a subspace of GF(2)^64, keyed by leading bit.
#[derive(Clone, Copy)]
pub(crate) struct XorBasis {
    slots: [u64; 64],
    len: usize,
}

impl XorBasis {
    pub(crate) fn new() -> Self {
        Self {
            slots: [0; 64],
            len: 0,
        }
    }

    /// Adds `v`; returns false when `v` is already in the span.
    pub(crate) fn insert(&mut self, mut v: u64) -> bool {
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if self.slots[top] == 0 {
                self.slots[top] = v;
                self.len += 1;
                return true;
            }
            v ^= self.slots[top];
        }
        false
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.len
    }
}
