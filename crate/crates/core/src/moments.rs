//! RQMC estimates, replicate moments and exact series for `f(x) = x²`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::dyadic::{rational_pow2_neg, rational_to_f64, Dyadic};
use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::kappa::{KappaSet, KappaVector};
use crate::net::GeneratorSet;
use crate::rng::{map_chunks, Stream};
use crate::scramble::{generate_points, PointSet, ScrambleSet};
use crate::stats::{batch_ranges, batch_se, pairwise_sum};
use crate::walsh::{s_sign, walsh_coeff_xsq_dyadic, walsh_tail_bound_1d, z_event};
use crate::zprob::z_pair_prob_identity;

/// Default truncation offset: series run over indices up to `m + 24`.
pub const DEFAULT_CUTOFF_OFFSET: u32 = 24;

/// Minimum replicate count for moment estimation.
pub const MIN_REPLICATES: u64 = 16;

/// `μ̂ = 2^{−m} Σ_i f(x_i)`.
pub fn rqmc_estimate(f: &Integrand, pts: &PointSet) -> Result<f64> {
    if f.dim() != pts.s() {
        return Err(Error::DimensionMismatch(format!(
            "integrand has dimension {}, points have {}",
            f.dim(),
            pts.s()
        )));
    }
    let values: Vec<f64> = (0..pts.len()).map(|i| f.eval(&pts.point(i))).collect();
    Ok(pairwise_sum(&values) / pts.len() as f64)
}

/// `μ̂` for each of `replicates` independent scrambles, in replicate order.
pub fn replicate_estimates(
    f: &Integrand,
    gens: &GeneratorSet,
    precision: u32,
    replicates: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if f.dim() != gens.s() {
        return Err(Error::DimensionMismatch(format!(
            "integrand has dimension {}, generators have {}",
            f.dim(),
            gens.s()
        )));
    }
    let (m, s) = (gens.m(), gens.s());
    ScrambleSet::identity(m, s, precision)?;
    let chunks = map_chunks(replicates, seed, Stream::Replicate, |rng, n| {
        (0..n)
            .map(|_| {
                let scr = ScrambleSet::random_with(m, s, precision, rng).expect("validated above");
                let pts = generate_points(gens, &scr).expect("shapes agree");
                rqmc_estimate(f, &pts).expect("dimension checked")
            })
            .collect::<Vec<f64>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// How replicate estimates are centered before taking moments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Subtract the integrand's exact mean.
    Known,
    /// Subtract the average of the replicates.
    Sample,
}

/// Standard errors attached to a [`MomentReport`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentErrors {
    pub mean: f64,
    pub var: f64,
    pub m3: f64,
    pub m4: f64,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
}

/// Moments of `μ̂` over independent scrambles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub integrand: String,
    pub m: usize,
    pub s: usize,
    pub precision: u32,
    pub replicates: u64,
    pub seed: u64,
    pub centering: Centering,
    pub center: f64,
    pub mean: f64,
    /// Second central moment of `μ̂`.
    pub var: f64,
    /// Third central moment of `μ̂`.
    pub m3: f64,
    pub m4: f64,
    /// `m3 / var^{3/2}`; absent when `var = 0`.
    pub gamma: Option<f64>,
    /// `m4 / var² − 3`; absent when `var = 0`.
    pub theta: Option<f64>,
    pub se: MomentErrors,
}

impl MomentReport {
    pub fn skewness(&self) -> Result<f64> {
        self.gamma.ok_or(Error::ZeroVariance)
    }

    pub fn kurtosis(&self) -> Result<f64> {
        self.theta.ok_or(Error::ZeroVariance)
    }
}

struct Moments {
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    fn of(values: &[f64], center: f64) -> Self {
        let n = values.len() as f64;
        let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
        for &v in values {
            let d = v - center;
            let d2 = d * d;
            s1 += v;
            s2 += d2;
            s3 += d2 * d;
            s4 += d2 * d2;
        }
        Self {
            mean: s1 / n,
            m2: s2 / n,
            m3: s3 / n,
            m4: s4 / n,
        }
    }

    fn gamma(&self) -> Option<f64> {
        (self.m2 > 0.0).then(|| self.m3 / self.m2.powf(1.5))
    }

    fn theta(&self) -> Option<f64> {
        (self.m2 > 0.0).then(|| self.m4 / (self.m2 * self.m2) - 3.0)
    }
}

/// Central moments of replicate estimates with batch-means standard errors
/// over `⌈√R⌉` contiguous batches.
fn summarize_replicates(
    values: &[f64],
    centering: Centering,
    known_mean: f64,
) -> (f64, Moments, MomentErrors) {
    let center = match centering {
        Centering::Known => known_mean,
        Centering::Sample => values.iter().sum::<f64>() / values.len() as f64,
    };
    let all = Moments::of(values, center);
    let batches: Vec<Moments> = batch_ranges(values.len())
        .into_iter()
        .map(|r| Moments::of(&values[r], center))
        .collect();
    let pick = |f: &dyn Fn(&Moments) -> f64| batch_se(&batches.iter().map(f).collect::<Vec<_>>());
    let optional = |f: &dyn Fn(&Moments) -> Option<f64>| {
        let vals: Option<Vec<f64>> = batches.iter().map(f).collect();
        vals.map(|v| batch_se(&v)).filter(|_| all.m2 > 0.0)
    };
    let se = MomentErrors {
        mean: pick(&|b| b.mean),
        var: pick(&|b| b.m2),
        m3: pick(&|b| b.m3),
        m4: pick(&|b| b.m4),
        gamma: optional(&|b| b.gamma()),
        theta: optional(&|b| b.theta()),
    };
    (center, all, se)
}

/// Estimates the moments of `μ̂` from `replicates` independent scrambles.
pub fn mc_moments(
    f: &Integrand,
    gens: &GeneratorSet,
    precision: u32,
    replicates: u64,
    seed: u64,
    centering: Centering,
) -> Result<MomentReport> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    let values = replicate_estimates(f, gens, precision, replicates, seed)?;
    let (center, all, se) = summarize_replicates(&values, centering, f.mean());
    Ok(MomentReport {
        integrand: f.to_string(),
        m: gens.m(),
        s: gens.s(),
        precision,
        replicates,
        seed,
        centering,
        center,
        mean: all.mean,
        var: all.m2,
        m3: all.m3,
        m4: all.m4,
        gamma: all.gamma(),
        theta: all.theta(),
        se,
    })
}

/// `(1/45 − 2^{−2m}/189) · 2^{−6m}`, the third central moment of `μ̂` for
/// `f(x) = x²` with `C = I_m`.
pub fn closed_form_third_xsq(m: u32) -> BigRational {
    let a = BigRational::new(BigInt::one(), BigInt::from(45));
    let b = BigRational::new(BigInt::one(), BigInt::from(189)) * rational_pow2_neg(2 * m);
    (a - b) * rational_pow2_neg(6 * m)
}

/// A truncated series with a bound on the omitted part.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: Dyadic,
    pub tail_bound: f64,
    pub cutoff: u32,
}

/// Nonempty sets of at most two positions from `1..=cutoff`.
fn small_sets(cutoff: u32) -> Vec<KappaSet> {
    let mut out = Vec::new();
    for a in 1..=cutoff {
        out.push(KappaSet::singleton(a));
        for b in 1..a {
            out.push(KappaSet::singleton(a).xor(KappaSet::singleton(b)));
        }
    }
    out
}

/// Exact third central moment of `μ̂` for `f(x) = x²`, `C = I_m`, summed over
/// all `k₁ ≠ k₂` with indices in `1..=cutoff`:
/// `Σ f̂(k₁) f̂(k₂) f̂(k₁⊕k₂) Pr(Z(k₁) ∩ Z(k₂))`.
///
/// The omitted terms sum to at most `(8/9)·2^{−2m−3}·4^{−cutoff}`.
pub fn exact_third_moment_xsq(m: u32, cutoff: u32) -> Result<SeriesValue> {
    if cutoff < m + 2 {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff} must be at least m + 2 = {}",
            m + 2
        )));
    }
    if cutoff > 64 {
        return Err(Error::IndexOverflow(format!("cutoff {cutoff} exceeds 64 positions")));
    }
    let sets = small_sets(cutoff);
    // f̂(k) = sign · 2^{-exp}
    let coeff = |k: KappaSet| -> (i64, u32) {
        match k.card() {
            1 => (-1, k.ceil() + 1),
            _ => (1, k.ceil2() + 1),
        }
    };
    let mut counts = vec![0i64; 6 * cutoff as usize + 2 * m as usize + 8];
    for &k1 in &sets {
        let (s1, e1) = coeff(k1);
        for &k2 in &sets {
            let k12 = k1.xor(k2);
            if k1 == k2 || k12.card() > 2 {
                continue;
            }
            let p = z_pair_prob_identity(k1, k2, m as usize)?;
            if p.is_zero() {
                continue;
            }
            let (s2, e2) = coeff(k2);
            let (s12, e12) = coeff(k12);
            counts[(e1 + e2 + e12 + p.exp()) as usize] += s1 * s2 * s12;
        }
    }
    let value = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(e, &c)| Dyadic::new(BigInt::from(c), e as u32))
        .sum();
    let tail_bound = (8.0 / 9.0) * 2f64.powi(-2 * m as i32 - 3) * 4f64.powi(-(cutoff as i32));
    Ok(SeriesValue {
        value,
        tail_bound,
        cutoff,
    })
}

/// The variance series `Σ_{k≠0} f̂(k)² Pr(Z(k))` for `f(x) = x²`, `C = I_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceSeries {
    pub cutoff: u32,
    /// Terms with every index in `1..=cutoff`.
    pub truncated: Dyadic,
    /// Exact sum of the remaining terms.
    pub tail: BigRational,
    pub total: BigRational,
    /// Exact sum over the singletons `κ = {ℓ}`, `ℓ > m`.
    pub singleton_subseries: BigRational,
}

/// `(1/12) · 2^{−3m}`.
pub fn variance_lower_bound_xsq(m: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(12)) * rational_pow2_neg(3 * m)
}

/// Evaluates [`VarianceSeries`]; the tails beyond `cutoff` are geometric and
/// are added in closed form.
pub fn variance_series_xsq(m: u32, cutoff: u32) -> Result<VarianceSeries> {
    if cutoff < m {
        return Err(Error::InvalidParameter(format!("cutoff {cutoff} is below m = {m}")));
    }
    if cutoff > 64 {
        return Err(Error::IndexOverflow(format!("cutoff {cutoff} exceeds 64 positions")));
    }
    let mut truncated = Dyadic::zero();
    let mut singles = Dyadic::zero();
    for k in small_sets(cutoff) {
        if k.ceil() <= m {
            continue;
        }
        let c = walsh_coeff_xsq_dyadic(k).expect("k is nonzero");
        let term = (&c * &c).scale_pow2_neg(m);
        if k.card() == 1 {
            singles += &term;
        }
        truncated += term;
    }
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    let fifteenth = BigRational::new(BigInt::one(), BigInt::from(15));
    let four_k = rational_pow2_neg(2 * cutoff + 2);
    // Σ_{ℓ>K} 2^{-m} 4^{-ℓ-1} = 2^{-m} 4^{-K-1} / 3
    let single_tail = &four_k * &third * rational_pow2_neg(m);
    // Σ_{ℓ₁>K} Σ_{ℓ₂<ℓ₁} 2^{-m} 4^{-ℓ₁-ℓ₂-1} = 2^{-m}/3 · (4^{-K-1}/3 − 16^{-K}/15)
    let pair_tail = (&four_k * &third - rational_pow2_neg(4 * cutoff) * fifteenth)
        * &third
        * rational_pow2_neg(m);
    let tail = &single_tail + pair_tail;
    Ok(VarianceSeries {
        cutoff,
        total: truncated.to_rational() + &tail,
        truncated,
        tail,
        singleton_subseries: singles.to_rational() + single_tail,
    })
}

/// Outcome of comparing `μ̂ − μ` with its truncated Walsh expansion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub error: f64,
    pub series: f64,
    pub residual: f64,
    pub tail_bound: f64,
}

impl DecompositionCheck {
    pub fn holds(&self) -> bool {
        self.residual <= self.tail_bound
    }
}

/// For `f(x) = x²` and one scramble, compares the exact integration error
/// `μ̂ − 1/3` with `Σ_{0<⌈κ⌉≤cutoff} Z(k) S(k) f̂(k)`. The difference is bounded
/// by the Walsh decay tail with derivative bound 2.
pub fn decomposition_check_xsq(
    gens: &GeneratorSet,
    scr: &ScrambleSet,
    cutoff: u32,
) -> Result<DecompositionCheck> {
    if gens.s() != 1 {
        return Err(Error::InvalidParameter("x² is one-dimensional".into()));
    }
    if cutoff > scr.precision() {
        return Err(Error::PrecisionTooShort {
            index: cutoff,
            precision: scr.precision(),
        });
    }
    let pts = generate_points(gens, scr)?;
    // x = w / 2^64, so x² = w² / 2^128 exactly
    let sum: BigInt = (0..pts.len())
        .map(|i| {
            let w = BigInt::from(pts.word(i, 0));
            &w * &w
        })
        .sum();
    let estimate = Dyadic::new(sum, 128 + gens.m() as u32).to_rational();
    let error = estimate - BigRational::new(BigInt::one(), BigInt::from(3));
    let mut series = Dyadic::zero();
    for k in small_sets(cutoff) {
        let kv = KappaVector::new(vec![k]);
        if z_event(&kv, gens, scr)? {
            let c = walsh_coeff_xsq_dyadic(k).expect("k is nonzero");
            series += if s_sign(&kv, scr)? < 0 { -c } else { c };
        }
    }
    let residual = &error - series.to_rational();
    Ok(DecompositionCheck {
        error: rational_to_f64(&error),
        series: series.to_f64(),
        residual: rational_to_f64(&residual).abs(),
        tail_bound: walsh_tail_bound_1d(cutoff, 2.0),
    })
}

/// Bound on `Pr(Z(k₁) ∩ Z(k₂))` for the three-dimensional pair
/// `k₁ = ({ℓ₁},{ℓ₂},∅)`, `k₂ = ({ℓ₁},∅,{ℓ₃})` of a `(t,m,3)`-net with
/// intersection parameter `T`.
pub fn pbar_bound(l1: u32, l2: u32, l3: u32, m: u32, t: u32, big_t: u32) -> f64 {
    let d = m as i64 - t as i64;
    let (a, b, c) = (l1 as i64, l2 as i64, l3 as i64);
    if (a + b).min(a + c).min(b + c) <= d {
        0.0
    } else if a.max(b).max(c) > d {
        2f64.powi(-2 * (d as i32 - 3))
    } else {
        2f64.powi(-2 * m as i32 + big_t as i32 + 3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(
            closed_form_third_xsq(0),
            BigRational::new(BigInt::from(16), BigInt::from(945))
        );
        let r = rational_to_f64(&(closed_form_third_xsq(9) / closed_form_third_xsq(8)));
        assert!((r - 2f64.powi(-6)).abs() < 1e-6);
    }

    #[test]
    fn third_moment_matches_closed_form() {
        for m in 0..=4 {
            let s = exact_third_moment_xsq(m, m + 24).unwrap();
            let exact = rational_to_f64(&closed_form_third_xsq(m));
            let rel = (s.value.to_f64() - exact).abs() / exact;
            assert!(rel < 1e-9, "m = {m}: rel err {rel}");
        }
    }

    #[test]
    fn third_moment_tail_bound_covers_the_gap() {
        for m in 0..=5 {
            let exact = closed_form_third_xsq(m);
            for cutoff in m + 2..m + 8 {
                let s = exact_third_moment_xsq(m, cutoff).unwrap();
                let gap = rational_to_f64(&(&exact - s.value.to_rational())).abs();
                assert!(gap <= s.tail_bound, "m={m} cutoff={cutoff}: {gap} > {}", s.tail_bound);
            }
        }
    }

    #[test]
    fn variance_singletons_are_exact() {
        for m in 0..=8 {
            let v = variance_series_xsq(m, m + 10).unwrap();
            assert_eq!(v.singleton_subseries, variance_lower_bound_xsq(m));
            assert!(v.total > variance_lower_bound_xsq(m));
            let w = variance_series_xsq(m, m + 3).unwrap();
            assert_eq!(v.total, w.total);
        }
    }

    #[test]
    fn pbar_cases() {
        assert_eq!(pbar_bound(1, 1, 1, 8, 2, 5), 0.0);
        assert_eq!(pbar_bound(7, 4, 4, 8, 2, 5), 2f64.powi(-6));
        assert_eq!(pbar_bound(4, 4, 4, 8, 2, 5), 2f64.powi(-8));
    }
}
