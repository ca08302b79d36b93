//! Walsh index bookkeeping.
//!
//! A nonnegative integer `k = Σ_{ℓ∈κ} 2^(ℓ-1)` is identified with the finite
//! set `κ ⊂ {1, 2, …}` of positions of its one bits. Position 1 is the least
//! significant bit of `k`; it selects row 1 of a scramble matrix and the most
//! significant fractional digit of a point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible position; `k < 2^MAX_POSITION`.
pub const MAX_POSITION: u32 = 64;

/// A finite set of positions in `1..=64`, stored as the index `k`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KappaSet(u64);

impl KappaSet {
    pub const EMPTY: KappaSet = KappaSet(0);

    pub const fn from_index(k: u64) -> Self {
        KappaSet(k)
    }

    /// Like [`KappaSet::from_index`] but accepts wider input and rejects
    /// indices that do not fit in 64 positions.
    pub fn try_from_index(k: u128) -> Result<Self> {
        u64::try_from(k)
            .map(KappaSet)
            .map_err(|_| Error::IndexOverflow(format!("k = {k} needs more than 64 positions")))
    }

    pub fn from_positions(positions: &[u32]) -> Result<Self> {
        let mut k = 0u64;
        for &p in positions {
            if p == 0 || p > MAX_POSITION {
                return Err(Error::IndexOverflow(format!(
                    "position {p} outside 1..={MAX_POSITION}"
                )));
            }
            k |= 1 << (p - 1);
        }
        Ok(KappaSet(k))
    }

    /// `{ℓ}`.
    pub fn singleton(position: u32) -> Self {
        assert!((1..=MAX_POSITION).contains(&position), "position {position} out of range");
        KappaSet(1 << (position - 1))
    }

    pub const fn index(self) -> u64 {
        self.0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// `|κ|`.
    pub const fn card(self) -> u32 {
        self.0.count_ones()
    }

    /// `⌈κ⌉`, the largest position, with `⌈∅⌉ = 0`.
    pub const fn ceil(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    /// Second largest position, 0 when `|κ| ≤ 1`.
    pub const fn second(self) -> u32 {
        if self.0 == 0 {
            return 0;
        }
        let rest = self.0 & !(1u64 << (63 - self.0.leading_zeros()));
        64 - rest.leading_zeros()
    }

    /// `⌈κ⌉₂`: sum of the two largest positions (just `⌈κ⌉` when `|κ| = 1`).
    pub const fn ceil2(self) -> u32 {
        self.ceil() + self.second()
    }

    pub const fn contains(self, position: u32) -> bool {
        position >= 1 && position <= MAX_POSITION && (self.0 >> (position - 1)) & 1 == 1
    }

    /// Symmetric difference, i.e. `k₁ + k₂` digitwise mod 2.
    pub const fn xor(self, other: KappaSet) -> KappaSet {
        KappaSet(self.0 ^ other.0)
    }

    pub fn positions(self) -> impl Iterator<Item = u32> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let p = rest.trailing_zeros() + 1;
                rest &= rest - 1;
                Some(p)
            }
        })
    }

    /// Mask over a digit word (digit ℓ at bit `64 - ℓ`) selecting the rows in κ.
    pub const fn digit_mask(self) -> u64 {
        self.0.reverse_bits()
    }
}

impl fmt::Debug for KappaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.positions()).finish()
    }
}

impl fmt::Display for KappaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One [`KappaSet`] per coordinate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KappaVector(Vec<KappaSet>);

impl KappaVector {
    pub fn new(components: Vec<KappaSet>) -> Self {
        KappaVector(components)
    }

    pub fn zero(s: usize) -> Self {
        KappaVector(vec![KappaSet::EMPTY; s])
    }

    pub fn from_indices(ks: &[u64]) -> Self {
        KappaVector(ks.iter().map(|&k| KappaSet::from_index(k)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[KappaSet] {
        &self.0
    }

    pub fn component(&self, j: usize) -> KappaSet {
        self.0[j]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|k| k.is_empty())
    }

    /// Coordinates with a nonempty component.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| !self.0[j].is_empty()).collect()
    }

    /// `‖κ‖₀`, total number of bits.
    pub fn norm0(&self) -> u32 {
        self.0.iter().map(|k| k.card()).sum()
    }

    /// `‖⌈κ⌉‖₁`.
    pub fn ceil_norm1(&self) -> u32 {
        self.0.iter().map(|k| k.ceil()).sum()
    }

    /// `‖⌈κ⌉₂‖₁`.
    pub fn ceil2_norm1(&self) -> u32 {
        self.0.iter().map(|k| k.ceil2()).sum()
    }

    pub fn max_ceil(&self) -> u32 {
        self.0.iter().map(|k| k.ceil()).max().unwrap_or(0)
    }

    pub fn xor(&self, other: &KappaVector) -> KappaVector {
        assert_eq!(self.dim(), other.dim(), "xor of index vectors of different dimension");
        KappaVector(self.0.iter().zip(&other.0).map(|(a, b)| a.xor(*b)).collect())
    }

    pub fn indices(&self) -> Vec<u64> {
        self.0.iter().map(|k| k.index()).collect()
    }
}

impl fmt::Debug for KappaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("").field(&self.0).finish()
    }
}

impl fmt::Display for KappaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.index().to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Parses comma-separated indices `k₁,…,k_s`, e.g. `8,8,0`.
impl FromStr for KappaVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ks = s
            .split(',')
            .map(|p| {
                let p = p.trim();
                p.parse::<u128>()
                    .map_err(|e| Error::InvalidParameter(format!("bad Walsh index {p:?}: {e}")))
                    .and_then(KappaSet::try_from_index)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KappaVector(ks))
    }
}
