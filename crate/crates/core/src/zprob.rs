//! Probabilities of the events `Z(k)` and `Z(k₁) ∩ Z(k₂)` over random scrambles.
//!
//! For fixed generators each event is an affine condition on the free bits of
//! the scramble rows that `k` selects. [`z_pair_prob_enum`] counts satisfying
//! assignments one by one, [`z_pair_prob_linear`] solves the same system by
//! elimination, [`z_pair_prob_identity`] applies the closed rule for a single
//! identity generator and [`z_pair_prob_mc`] simply samples scrambles.

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::kappa::{KappaSet, KappaVector};
use crate::net::GeneratorSet;
use crate::rng::{count_hits, Stream};
use crate::scramble::ScrambleSet;
use crate::stats::Frequency;
use crate::walsh::z_event_unchecked;

/// Default limit on enumerated free bits.
pub const ENUM_BIT_LIMIT: u32 = 28;

/// `Pr(Z(k))` for `s = 1`, `C = I_m`: `2^{−m}` when `⌈κ⌉ > m`, else 0.
pub fn z_prob_identity(k: KappaSet, m: usize) -> Result<Dyadic> {
    if k.is_empty() {
        return Ok(Dyadic::from_int(1));
    }
    Ok(if k.ceil() as usize > m {
        Dyadic::pow2_neg(m as u32)
    } else {
        Dyadic::zero()
    })
}

/// `Pr(Z(k₁) ∩ Z(k₂))` for `s = 1`, `C = I_m`, `|κ_i| ≤ 2`.
///
/// Both events hold iff every nonzero element of `span{k₁, k₂}` is zeroed.
/// Reducing the pair to two sets with distinct largest elements, the event
/// is impossible when the smaller of those lies in `1..=m` (that row carries
/// the unit diagonal) and otherwise has probability `2^{−2m}` because two
/// fully random rows beyond `m` must each cancel the rest.
pub fn z_pair_prob_identity(k1: KappaSet, k2: KappaSet, m: usize) -> Result<Dyadic> {
    if k1.is_empty() || k2.is_empty() {
        return Err(Error::InvalidParameter("pair indices must be nonzero".into()));
    }
    if k1 == k2 {
        return Err(Error::InvalidParameter("pair indices must be distinct".into()));
    }
    if k1.card() > 2 || k2.card() > 2 {
        return Err(Error::InvalidParameter(format!(
            "rule covers |κ| ≤ 2, got {} and {}",
            k1.card(),
            k2.card()
        )));
    }
    let (a, b) = if k1.ceil() == k2.ceil() {
        (k1, k1.xor(k2))
    } else {
        (k1, k2)
    };
    let lower = a.ceil().min(b.ceil());
    Ok(if lower as usize > m {
        Dyadic::pow2_neg(2 * m as u32)
    } else {
        Dyadic::zero()
    })
}

/// The events `Z(k_e)` as affine maps of the free scramble bits.
struct AffineEvents {
    m: usize,
    events: usize,
    /// Value at the all-zero assignment, events packed `m` bits apart.
    fixed: u128,
    /// Effect of flipping each free bit that matters.
    effects: Vec<u128>,
    /// Free bits in the referenced rows, including ones without effect.
    free_bits: u32,
}

impl AffineEvents {
    fn build(ks: &[&KappaVector], gens: &GeneratorSet, precision: u32) -> Result<Self> {
        let (m, s) = (gens.m(), gens.s());
        if m > 64 || ks.len() > 2 || ks.is_empty() {
            return Err(Error::InvalidParameter("one or two events with m ≤ 64".into()));
        }
        for k in ks {
            if k.dim() != s {
                return Err(Error::DimensionMismatch(format!(
                    "index has {} coordinates, generators have {s}",
                    k.dim()
                )));
            }
            if k.max_ceil() > precision {
                return Err(Error::PrecisionTooShort {
                    index: k.max_ceil(),
                    precision,
                });
            }
        }
        let slot = |e: usize, w: u64| u128::from(w) << (64 * e);
        let mut fixed = 0u128;
        let mut effects = Vec::new();
        let mut free_bits = 0u32;
        for j in 0..s {
            let union = ks.iter().fold(KappaSet::EMPTY, |u, k| {
                KappaSet::from_index(u.index() | k.component(j).index())
            });
            for l in union.positions() {
                let l = l as usize;
                let contribution = |w: u64| -> u128 {
                    ks.iter()
                        .enumerate()
                        .filter(|(_, k)| k.component(j).contains(l as u32))
                        .fold(0, |acc, (e, _)| acc | slot(e, w))
                };
                if l <= m {
                    fixed ^= contribution(gens.row_word(j, l - 1));
                }
                let free = (l - 1).min(m);
                free_bits += free as u32;
                for c in 0..free {
                    let effect = contribution(gens.row_word(j, c));
                    if effect != 0 {
                        effects.push(effect);
                    }
                }
            }
        }
        Ok(Self {
            m,
            events: ks.len(),
            fixed,
            effects,
            free_bits,
        })
    }

    fn count_by_enumeration(&self) -> u128 {
        let n = self.effects.len();
        let mut state = self.fixed;
        let mut hits = u128::from(state == 0);
        for i in 1u64..1u64 << n {
            state ^= self.effects[i.trailing_zeros() as usize];
            hits += u128::from(state == 0);
        }
        hits
    }

    fn probability_by_elimination(&self) -> Result<Dyadic> {
        let rows = self.events * self.m;
        let bit = |w: u128, r: usize| (w >> ((r / self.m) * 64 + r % self.m)) & 1 == 1;
        let a = BitMatrix::from_fn(rows, self.effects.len(), |r, c| bit(self.effects[c], r));
        let y = BitVector::from_bits((0..rows).map(|r| bit(self.fixed, r)));
        Ok(match a.solution_space_dim(&y)? {
            None => Dyadic::zero(),
            Some(dim) => Dyadic::pow2_neg((self.effects.len() - dim) as u32),
        })
    }
}

fn check_pair(k1: &KappaVector, k2: &KappaVector) -> Result<()> {
    if k1 == k2 {
        return Err(Error::InvalidParameter("pair indices must be distinct".into()));
    }
    Ok(())
}

/// `Pr(Z(k))` by enumerating every assignment of the referenced free bits.
pub fn z_prob_enum(k: &KappaVector, gens: &GeneratorSet, precision: u32) -> Result<Dyadic> {
    enumerate(&[k], gens, precision)
}

/// `Pr(Z(k₁) ∩ Z(k₂))` by enumerating every assignment of the free scramble
/// bits in the rows referenced by `κ₁ ∪ κ₂`. Fails when more than
/// [`ENUM_BIT_LIMIT`] such bits exist.
pub fn z_pair_prob_enum(
    k1: &KappaVector,
    k2: &KappaVector,
    gens: &GeneratorSet,
    precision: u32,
) -> Result<Dyadic> {
    check_pair(k1, k2)?;
    enumerate(&[k1, k2], gens, precision)
}

fn enumerate(ks: &[&KappaVector], gens: &GeneratorSet, precision: u32) -> Result<Dyadic> {
    let sys = AffineEvents::build(ks, gens, precision)?;
    if sys.free_bits > ENUM_BIT_LIMIT {
        return Err(Error::BudgetExceeded {
            bits: sys.free_bits,
            limit: ENUM_BIT_LIMIT,
        });
    }
    let hits = sys.count_by_enumeration();
    Ok(Dyadic::new(hits.into(), sys.effects.len() as u32))
}

/// `Pr(Z(k))` by Gaussian elimination on the affine system; no size limit.
pub fn z_prob_linear(k: &KappaVector, gens: &GeneratorSet) -> Result<Dyadic> {
    AffineEvents::build(&[k], gens, crate::scramble::MAX_PRECISION)?.probability_by_elimination()
}

/// `Pr(Z(k₁) ∩ Z(k₂))` by Gaussian elimination: 0 or `2^{−rank}`.
pub fn z_pair_prob_linear(k1: &KappaVector, k2: &KappaVector, gens: &GeneratorSet) -> Result<Dyadic> {
    check_pair(k1, k2)?;
    AffineEvents::build(&[k1, k2], gens, crate::scramble::MAX_PRECISION)?
        .probability_by_elimination()
}

/// Frequency of `Z(k₁) ∩ Z(k₂)` over independent random scrambles.
pub fn z_pair_prob_mc(
    k1: &KappaVector,
    k2: &KappaVector,
    gens: &GeneratorSet,
    precision: u32,
    trials: u64,
    seed: u64,
) -> Result<Frequency> {
    check_pair(k1, k2)?;
    z_events_mc(&[k1, k2], gens, precision, trials, seed)
}

/// Frequency with which all of the given events hold together.
pub fn z_events_mc(
    ks: &[&KappaVector],
    gens: &GeneratorSet,
    precision: u32,
    trials: u64,
    seed: u64,
) -> Result<Frequency> {
    // validates shapes and precision once
    AffineEvents::build(&ks[..ks.len().min(2)], gens, precision)?;
    let (m, s) = (gens.m(), gens.s());
    ScrambleSet::identity(m, s, precision)?;
    let hits = count_hits(trials, seed, Stream::Trial, |rng| {
        let scr = ScrambleSet::random_with(m, s, precision, rng).expect("validated above");
        ks.iter().all(|k| z_event_unchecked(k, gens, &scr))
    });
    Ok(Frequency::new(hits, trials))
}
