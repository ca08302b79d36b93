//! Linear matrix scrambles with digital shifts, and the points they produce.
//!
//! Digits are kept in 64-bit words with fractional digit `ℓ` at bit `64 − ℓ`,
//! so a word `w` is the number `w / 2^64`. Precision `E` means only the top
//! `E` bits may be set.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::kappa::KappaSet;
use crate::net::{compositions, GeneratorSet};
use crate::rng::{substream, Stream};

/// Default number of digits per coordinate.
pub const DEFAULT_PRECISION: u32 = 64;

/// Largest supported precision.
pub const MAX_PRECISION: u32 = 64;

/// Mask of the top `e` bits of a digit word.
pub(crate) fn precision_mask(e: u32) -> u64 {
    if e == 0 {
        0
    } else {
        u64::MAX << (64 - e)
    }
}

/// Parity of the set bits of `w` as a `0/1` value.
pub(crate) fn parity(w: u64) -> u64 {
    u64::from(w.count_ones() & 1)
}

/// Scramble matrices `M_j` (`E × m`, unit lower triangular on the top `m`
/// rows) and digital shifts `D_j` (`E` digits) for every coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScrambleSet {
    m: usize,
    precision: u32,
    /// Per coordinate, column `c` of `M_j` as a digit word.
    columns: Vec<Vec<u64>>,
    shifts: Vec<u64>,
}

impl ScrambleSet {
    /// Independent fair bits in every free entry of every `M_j` and `D_j`.
    pub fn random(m: usize, s: usize, precision: u32, seed: u64) -> Result<Self> {
        Self::random_with(m, s, precision, &mut substream(seed, Stream::Scramble, 0))
    }

    pub fn random_with<R: RngCore + ?Sized>(
        m: usize,
        s: usize,
        precision: u32,
        rng: &mut R,
    ) -> Result<Self> {
        check_precision(m, precision)?;
        let emask = precision_mask(precision);
        let mut columns = Vec::with_capacity(s);
        let mut shifts = Vec::with_capacity(s);
        for _ in 0..s {
            let cols = (0..m)
                .map(|c| {
                    let unit = 1u64 << (63 - c);
                    unit | (rng.next_u64() & (unit - 1) & emask)
                })
                .collect();
            columns.push(cols);
            shifts.push(rng.next_u64() & emask);
        }
        Ok(Self {
            m,
            precision,
            columns,
            shifts,
        })
    }

    /// `M_j = [I_m; 0]` and `D_j = 0`: leaves the net unrandomized.
    pub fn identity(m: usize, s: usize, precision: u32) -> Result<Self> {
        check_precision(m, precision)?;
        Ok(Self {
            m,
            precision,
            columns: vec![(0..m).map(|c| 1u64 << (63 - c)).collect(); s],
            shifts: vec![0; s],
        })
    }

    /// Builds a scramble from explicit matrices and shifts, checking the
    /// unit-lower-triangular structure of the top `m` rows.
    pub fn from_parts(matrices: &[BitMatrix], shifts: &[BitVector]) -> Result<Self> {
        if matrices.len() != shifts.len() || matrices.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} scramble matrices but {} shifts",
                matrices.len(),
                shifts.len()
            )));
        }
        let e = matrices[0].rows();
        let m = matrices[0].cols();
        check_precision(m, e as u32)?;
        let mut columns = Vec::with_capacity(matrices.len());
        for (j, (a, d)) in matrices.iter().zip(shifts).enumerate() {
            if a.rows() != e || a.cols() != m || d.len() != e {
                return Err(Error::DimensionMismatch(format!(
                    "coordinate {}: expected {e}x{m} matrix and {e}-digit shift",
                    j + 1
                )));
            }
            for r in 0..m {
                for c in r..m {
                    if a.get(r, c) != (r == c) {
                        return Err(Error::InvalidParameter(format!(
                            "scramble matrix {} is not unit lower triangular at ({}, {})",
                            j + 1,
                            r + 1,
                            c + 1
                        )));
                    }
                }
            }
            columns.push(
                (0..m)
                    .map(|c| (0..e).fold(0u64, |w, r| w | (u64::from(a.get(r, c)) << (63 - r))))
                    .collect(),
            );
        }
        let shifts = shifts
            .iter()
            .map(|d| (0..e).fold(0u64, |w, r| w | (u64::from(d.get(r)) << (63 - r))))
            .collect();
        Ok(Self {
            m,
            precision: e as u32,
            columns,
            shifts,
        })
    }

    /// Same matrices with the shifts replaced by digit words.
    pub fn with_shift_words(mut self, shifts: &[u64]) -> Result<Self> {
        if shifts.len() != self.s() {
            return Err(Error::DimensionMismatch(format!(
                "{} shifts for s = {}",
                shifts.len(),
                self.s()
            )));
        }
        let emask = precision_mask(self.precision);
        self.shifts = shifts.iter().map(|&d| d & emask).collect();
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.columns.len()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Column `c` (0-based) of `M_j` as a digit word.
    pub fn column_word(&self, j: usize, c: usize) -> u64 {
        self.columns[j][c]
    }

    /// `D_j` as a digit word.
    pub fn shift_word(&self, j: usize) -> u64 {
        self.shifts[j]
    }

    pub fn matrix(&self, j: usize) -> BitMatrix {
        let e = self.precision as usize;
        BitMatrix::from_fn(e, self.m, |r, c| (self.columns[j][c] >> (63 - r)) & 1 == 1)
    }

    pub fn shift(&self, j: usize) -> BitVector {
        word_to_digits(self.shifts[j], self.precision)
    }

    /// `Σ_{r∈κ} M_j(r, :)` as a word whose bit `c` is column `c`.
    pub fn row_combination(&self, j: usize, kappa: KappaSet) -> u64 {
        let mask = kappa.digit_mask();
        self.columns[j]
            .iter()
            .enumerate()
            .fold(0u64, |v, (c, &col)| v | (parity(col & mask) << c))
    }
}

fn check_precision(m: usize, precision: u32) -> Result<()> {
    if precision > MAX_PRECISION {
        return Err(Error::InvalidParameter(format!(
            "precision {precision} exceeds {MAX_PRECISION}"
        )));
    }
    if (precision as usize) < m {
        return Err(Error::InvalidParameter(format!(
            "precision {precision} is below m = {m}"
        )));
    }
    Ok(())
}

/// Digits `1..=e` of a word as a bit vector (entry `ℓ−1` is digit `ℓ`).
pub fn word_to_digits(w: u64, e: u32) -> BitVector {
    BitVector::from_bits((0..e).map(|r| (w >> (63 - r)) & 1 == 1))
}

/// `w / 2^64` rounded toward zero to a double; exact when only the top 53
/// digits can be nonzero.
pub fn word_to_f64(w: u64) -> f64 {
    (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `2^m` points in `[0,1)^s`, each coordinate a digit word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    m: usize,
    s: usize,
    precision: u32,
    words: Vec<u64>,
}

impl PointSet {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn len(&self) -> usize {
        self.words.len() / self.s
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn word(&self, i: usize, j: usize) -> u64 {
        self.words[i * self.s + j]
    }

    /// All coordinates of point `i` as digit words.
    pub fn point_words(&self, i: usize) -> &[u64] {
        &self.words[i * self.s..(i + 1) * self.s]
    }

    pub fn digits(&self, i: usize, j: usize) -> BitVector {
        word_to_digits(self.word(i, j), self.precision)
    }

    pub fn coord(&self, i: usize, j: usize) -> f64 {
        word_to_f64(self.word(i, j))
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.point_words(i).iter().map(|&w| word_to_f64(w)).collect()
    }
}

/// Points `x_ij = M_j C_j vec(i) + D_j` for `i = 0..2^m`.
pub fn generate_points(gens: &GeneratorSet, scr: &ScrambleSet) -> Result<PointSet> {
    if gens.m() != scr.m() || gens.s() != scr.s() {
        return Err(Error::DimensionMismatch(format!(
            "generators are (m={}, s={}) but scramble is (m={}, s={})",
            gens.m(),
            gens.s(),
            scr.m(),
            scr.s()
        )));
    }
    let (m, s) = (gens.m(), gens.s());
    let n = 1usize << m;
    let mut words = vec![0u64; n * s];
    for j in 0..s {
        // image of index bit c under M_j C_j
        let image: Vec<u64> = (0..m)
            .map(|c| {
                let mut col = gens.col_word(j, c);
                let mut w = 0;
                while col != 0 {
                    w ^= scr.column_word(j, col.trailing_zeros() as usize);
                    col &= col - 1;
                }
                w
            })
            .collect();
        words[j] = scr.shift_word(j);
        for i in 1..n {
            let prev = i & (i - 1);
            words[i * s + j] = words[prev * s + j] ^ image[i.trailing_zeros() as usize];
        }
    }
    Ok(PointSet {
        m,
        s,
        precision: scr.precision(),
        words,
    })
}

/// The raw net `x_ij = C_j vec(i)` with `m` digits.
pub fn unscrambled_points(gens: &GeneratorSet) -> PointSet {
    let scr = ScrambleSet::identity(gens.m(), gens.s(), gens.m() as u32)
        .expect("precision m always admits m columns");
    generate_points(gens, &scr).expect("shapes agree by construction")
}

/// True when every box `Π_j [a_j 2^{-k_j}, (a_j+1) 2^{-k_j})` holds exactly
/// `2^t` points, for the box shape `k` with `Σ k_j = m − t`.
pub fn elementary_interval_census(pts: &PointSet, shape: &[u32], t: usize) -> Result<bool> {
    if shape.len() != pts.s() {
        return Err(Error::DimensionMismatch(format!(
            "shape has {} entries for s = {}",
            shape.len(),
            pts.s()
        )));
    }
    if t > pts.m() {
        return Err(Error::InvalidParameter(format!("t = {t} exceeds m = {}", pts.m())));
    }
    let total: usize = shape.iter().map(|&k| k as usize).sum();
    if total + t != pts.m() {
        return Err(Error::InvalidParameter(format!(
            "box shape sums to {total}, expected m - t = {}",
            pts.m() - t
        )));
    }
    if let Some(&k) = shape.iter().find(|&&k| k > pts.precision()) {
        return Err(Error::PrecisionTooShort {
            index: k,
            precision: pts.precision(),
        });
    }
    let mut counts = vec![0usize; 1 << total];
    for i in 0..pts.len() {
        let cell = shape
            .iter()
            .zip(pts.point_words(i))
            .fold(0usize, |acc, (&k, &w)| {
                if k == 0 {
                    acc
                } else {
                    (acc << k) | (w >> (64 - k)) as usize
                }
            });
        counts[cell] += 1;
    }
    Ok(counts.iter().all(|&c| c == 1 << t))
}

/// Census over every box shape with `Σ k_j = m − t`.
pub fn is_net_with_quality(pts: &PointSet, t: usize) -> Result<bool> {
    if t > pts.m() {
        return Err(Error::InvalidParameter(format!("t = {t} exceeds m = {}", pts.m())));
    }
    for q in compositions(pts.m() - t, pts.s(), pts.m()) {
        let shape: Vec<u32> = q.iter().map(|&k| k as u32).collect();
        if !elementary_interval_census(pts, &shape, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}
