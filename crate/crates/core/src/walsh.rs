//! Walsh functions, Walsh coefficients of the quadratic test integrands, the
//! events `Z(k)` and signs `S(k)` of a scrambled net, and the finite sums used
//! to bound pair contributions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{rational_pow2_neg, rational_to_f64, Dyadic};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::kappa::{KappaSet, KappaVector};
use crate::net::GeneratorSet;
use crate::scramble::{parity, ScrambleSet};

/// Largest argument accepted by [`t_sum`].
pub const T_SUM_MAX: u32 = 20;

/// `wal_k(x) = (−1)^{Σ_{ℓ∈κ} x_ℓ}` for the digits of `x` (entry `ℓ−1` is
/// digit `ℓ`).
pub fn wal(k: KappaSet, x: &BitVector) -> Result<i32> {
    let need = k.ceil();
    if (x.len() as u32) < need {
        return Err(Error::PrecisionTooShort {
            index: need,
            precision: x.len() as u32,
        });
    }
    let odd = k.positions().filter(|&l| x.get(l as usize - 1)).count() % 2 == 1;
    Ok(if odd { -1 } else { 1 })
}

/// [`wal`] on a digit word.
pub fn wal_word(k: KappaSet, w: u64) -> i32 {
    1 - 2 * parity(k.digit_mask() & w) as i32
}

/// Product of univariate Walsh functions across coordinates.
pub fn wal_multi(k: &KappaVector, x: &[BitVector]) -> Result<i32> {
    if k.dim() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "index has {} coordinates, point has {}",
            k.dim(),
            x.len()
        )));
    }
    k.components()
        .iter()
        .zip(x)
        .try_fold(1, |acc, (&kj, xj)| Ok(acc * wal(kj, xj)?))
}

/// Walsh coefficient of `f(x) = x²` for nonzero `k` as an exact dyadic;
/// `None` for `k = 0`, whose coefficient `1/3` is not dyadic.
pub fn walsh_coeff_xsq_dyadic(k: KappaSet) -> Option<Dyadic> {
    match k.card() {
        0 => None,
        1 => Some(-Dyadic::pow2_neg(k.ceil() + 1)),
        2 => Some(Dyadic::pow2_neg(k.ceil2() + 1)),
        _ => Some(Dyadic::zero()),
    }
}

/// Walsh coefficient of `f(x) = x²`:
/// `1/3` at `k = 0`, `−2^{−ℓ−1}` at `κ = {ℓ}`, `2^{−ℓ₁−ℓ₂−1}` at
/// `κ = {ℓ₁, ℓ₂}` and zero when `|κ| > 2`.
pub fn walsh_coeff_xsq(k: KappaSet) -> BigRational {
    match walsh_coeff_xsq_dyadic(k) {
        None => BigRational::new(BigInt::one(), BigInt::from(3)),
        Some(d) => d.to_rational(),
    }
}

/// Walsh coefficient of `g(x) = Π_j x_j²`.
pub fn walsh_coeff_product(k: &KappaVector) -> BigRational {
    k.components()
        .iter()
        .map(|&kj| walsh_coeff_xsq(kj))
        .fold(BigRational::one(), |acc, c| acc * c)
}

/// `deriv_sup · 2^{−‖⌈κ⌉₂‖₁}`, a bound on `|f̂(k)|` for integrands whose
/// mixed partial derivatives are bounded by `deriv_sup`.
pub fn walsh_decay_bound(k: &KappaVector, deriv_sup: f64) -> f64 {
    deriv_sup * 2f64.powi(-(k.ceil2_norm1() as i32))
}

/// Sum of [`walsh_decay_bound`] over all one-dimensional `k` with
/// `⌈κ⌉ > cutoff`: `deriv_sup · (cutoff + 3) · 2^{−cutoff−1}`.
pub fn walsh_tail_bound_1d(cutoff: u32, deriv_sup: f64) -> f64 {
    deriv_sup * f64::from(cutoff + 3) * 2f64.powi(-(cutoff as i32) - 1)
}

fn check_event_args(k: &KappaVector, scr: &ScrambleSet) -> Result<()> {
    if k.dim() != scr.s() {
        return Err(Error::DimensionMismatch(format!(
            "index has {} coordinates, scramble has {}",
            k.dim(),
            scr.s()
        )));
    }
    let top = k.max_ceil();
    if top > scr.precision() {
        return Err(Error::PrecisionTooShort {
            index: top,
            precision: scr.precision(),
        });
    }
    Ok(())
}

/// The event `Σ_j (Σ_{r∈κ_j} M_j(r,:)) C_j = 0`.
pub fn z_event(k: &KappaVector, gens: &GeneratorSet, scr: &ScrambleSet) -> Result<bool> {
    check_event_args(k, scr)?;
    if gens.m() != scr.m() || gens.s() != scr.s() {
        return Err(Error::DimensionMismatch(format!(
            "generators are (m={}, s={}) but scramble is (m={}, s={})",
            gens.m(),
            gens.s(),
            scr.m(),
            scr.s()
        )));
    }
    Ok(z_event_unchecked(k, gens, scr))
}

pub(crate) fn z_event_unchecked(k: &KappaVector, gens: &GeneratorSet, scr: &ScrambleSet) -> bool {
    let mut acc = 0u64;
    for (j, &kj) in k.components().iter().enumerate() {
        if !kj.is_empty() {
            acc ^= gens.combine_rows(j, scr.row_combination(j, kj));
        }
    }
    acc == 0
}

/// The sign `(−1)^{Σ_j Σ_{ℓ∈κ_j} D_j[ℓ]}` attached to `k` by the shift.
pub fn s_sign(k: &KappaVector, scr: &ScrambleSet) -> Result<i32> {
    check_event_args(k, scr)?;
    let odd = k
        .components()
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &kj)| acc ^ parity(kj.digit_mask() & scr.shift_word(j)));
    Ok(1 - 2 * odd as i32)
}

/// All `κ` with `⌈κ⌉ = top`, as indices.
fn sets_with_top(top: u32) -> impl Iterator<Item = u64> {
    let (lead, below) = if top == 0 { (0, 0) } else { (1u64 << (top - 1), 1u64 << (top - 1)) };
    (0..below.max(1)).map(move |low| lead | low)
}

/// `Σ 2^{−⌈κ₁⌉₂−⌈κ₂⌉₂−⌈κ₁₂⌉₂}` over pairs with `⌈κ₁⌉ = ℓ₁`, `⌈κ₂⌉ = ℓ₂` and
/// `⌈κ₁ ⊕ κ₂⌉ = ℓ₁₂`, by exhaustive enumeration.
pub fn t_sum(l1: u32, l2: u32, l12: u32) -> Result<Dyadic> {
    if let Some(&l) = [l1, l2, l12].iter().find(|&&l| l > T_SUM_MAX) {
        return Err(Error::InvalidParameter(format!(
            "t_sum argument {l} exceeds {T_SUM_MAX}"
        )));
    }
    // exponents stay below 6 * T_SUM_MAX, counts below 2^(2 T_SUM_MAX)
    let mut counts = vec![0u64; 6 * T_SUM_MAX as usize + 1];
    for a in sets_with_top(l1) {
        let ka = KappaSet::from_index(a);
        let ca = ka.ceil2();
        for b in sets_with_top(l2) {
            let kab = KappaSet::from_index(a ^ b);
            if kab.ceil() != l12 {
                continue;
            }
            let e = ca + KappaSet::from_index(b).ceil2() + kab.ceil2();
            counts[e as usize] += 1;
        }
    }
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(e, &c)| Dyadic::new(BigInt::from(c), e as u32))
        .sum())
}

/// The strict upper bound `2^{−ℓ₁−ℓ₂−ℓ₁₂+2}` on [`t_sum`].
pub fn t_sum_bound(l1: u32, l2: u32, l12: u32) -> BigRational {
    let e = l1 + l2 + l12;
    if e >= 2 {
        rational_pow2_neg(e - 2)
    } else {
        BigRational::from_integer(BigInt::from(1u32 << (2 - e)))
    }
}

/// Result of checking [`t_sum`] against [`t_sum_bound`] on a cube of arguments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TSumCheck {
    pub max_l: u32,
    pub triples: usize,
    pub nonzero: usize,
    /// Largest `t_sum / bound` seen.
    pub max_ratio: f64,
    pub argmax: (u32, u32, u32),
    pub strict_bound_holds: bool,
    pub symmetric: bool,
}

/// Evaluates [`t_sum`] for every `(ℓ₁, ℓ₂, ℓ₁₂) ∈ {0..=max_l}³` and checks the
/// strict bound and invariance under permuting the arguments.
pub fn check_t_sum_bound(max_l: u32) -> Result<TSumCheck> {
    if max_l > T_SUM_MAX {
        return Err(Error::InvalidParameter(format!(
            "t_sum argument {max_l} exceeds {T_SUM_MAX}"
        )));
    }
    let side = max_l as usize + 1;
    let triples: Vec<(u32, u32, u32)> = (0..=max_l)
        .flat_map(|a| (0..=max_l).flat_map(move |b| (0..=max_l).map(move |c| (a, b, c))))
        .collect();
    let values = triples
        .par_iter()
        .map(|&(a, b, c)| t_sum(a, b, c).map(|d| d.to_rational()))
        .collect::<Result<Vec<BigRational>>>()?;
    let at = |a: u32, b: u32, c: u32| &values[(a as usize * side + b as usize) * side + c as usize];
    let mut out = TSumCheck {
        max_l,
        triples: triples.len(),
        nonzero: 0,
        max_ratio: 0.0,
        argmax: (0, 0, 0),
        strict_bound_holds: true,
        symmetric: true,
    };
    for &(a, b, c) in &triples {
        let v = at(a, b, c);
        let bound = t_sum_bound(a, b, c);
        if !v.is_zero() {
            out.nonzero += 1;
        }
        if *v >= bound {
            out.strict_bound_holds = false;
        }
        let ratio = rational_to_f64(&(v / &bound));
        if ratio > out.max_ratio {
            out.max_ratio = ratio;
            out.argmax = (a, b, c);
        }
        let perms = [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)];
        if perms.iter().any(|&(x, y, z)| at(x, y, z) != v) {
            out.symmetric = false;
        }
    }
    Ok(out)
}
