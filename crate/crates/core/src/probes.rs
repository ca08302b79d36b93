//! Monte Carlo probes of the probability bounds on `Z(k)` events and on the
//! quality parameter of random generator matrices, plus a confidence-interval
//! coverage experiment.
//!
//! Stochastic verdicts use one margin throughout: a bound passes when the
//! estimate is at most the bound plus [`MARGIN`] standard errors, an equality
//! when the estimate is within [`MARGIN`] standard errors of the target.

use rand::{Rng, RngCore};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::kappa::{KappaSet, KappaVector};
use crate::net::GeneratorSet;
use crate::rng::{count_hits, map_chunks, Stream};
use crate::scramble::ScrambleSet;
use crate::stats::{student_t_quantile, Frequency};
use crate::walsh::z_event_unchecked;
use crate::zprob::z_pair_prob_linear;

/// Standard errors allowed between an estimate and its bound or target.
pub const MARGIN: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Estimate must not exceed the target.
    AtMost,
    /// Estimate must not fall below the target.
    AtLeast,
    /// Estimate must match the target.
    Equal,
    /// Estimate must be exactly the target, no margin.
    Exact,
}

/// One comparison of an estimate with a theoretical value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    pub empirical: f64,
    pub se: f64,
    pub target: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, kind: CheckKind, empirical: f64, se: f64, target: f64) -> Self {
        let pass = match kind {
            CheckKind::AtMost => empirical <= target + MARGIN * se,
            CheckKind::AtLeast => empirical >= target - MARGIN * se,
            CheckKind::Equal => (empirical - target).abs() <= MARGIN * se,
            CheckKind::Exact => empirical == target,
        };
        Self {
            label: label.into(),
            kind,
            empirical,
            se,
            target,
            pass,
        }
    }

    fn frequency(label: impl Into<String>, kind: CheckKind, f: Frequency, target: f64) -> Self {
        Self::new(label, kind, f.p(), f.se(), target)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub probe: String,
    pub params: Value,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl ProbeResult {
    fn new(probe: &str, params: Value, checks: Vec<Check>, notes: Vec<String>) -> Self {
        let verdict = if checks.iter().all(|c| c.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            probe: probe.to_string(),
            params,
            checks,
            notes,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// `J₁∩₂ = { j : ⌈κ₁ⱼ⌉ = ⌈κ₂ⱼ⌉ }`.
pub fn shared_top_coordinates(k1: &KappaVector, k2: &KappaVector) -> Vec<usize> {
    (0..k1.dim())
        .filter(|&j| k1.component(j).ceil() == k2.component(j).ceil())
        .collect()
}

fn check_event_shape(k: &KappaVector, gens: &GeneratorSet, precision: u32) -> Result<()> {
    if k.dim() != gens.s() {
        return Err(Error::DimensionMismatch(format!(
            "index has {} coordinates, generators have {}",
            k.dim(),
            gens.s()
        )));
    }
    if k.max_ceil() > precision {
        return Err(Error::PrecisionTooShort {
            index: k.max_ceil(),
            precision,
        });
    }
    ScrambleSet::identity(gens.m(), gens.s(), precision).map(|_| ())
}

fn kvec_json(k: &KappaVector) -> Value {
    json!(k.indices())
}

/// Frequency of `Z(k)` against `Pr(Z(k)) ≤ 2^{−m+t+s}`.
pub fn probe_single_event(
    gens: &GeneratorSet,
    k: &KappaVector,
    precision: u32,
    trials: u64,
    seed: u64,
) -> Result<ProbeResult> {
    if k.is_zero() {
        return Err(Error::InvalidParameter("index must be nonzero".into()));
    }
    check_event_shape(k, gens, precision)?;
    let (m, s, t) = (gens.m(), gens.s(), gens.t_value());
    let hits = count_hits(trials, seed, Stream::Trial, |rng| {
        let scr = ScrambleSet::random_with(m, s, precision, rng).expect("validated");
        z_event_unchecked(k, gens, &scr)
    });
    let freq = Frequency::new(hits, trials);
    let bound = 2f64.powi(t as i32 + s as i32 - m as i32);
    let mut checks = vec![Check::frequency("Pr(Z(k)) <= 2^(-m+t+s)", CheckKind::AtMost, freq, bound)];
    if (k.ceil_norm1() as usize) <= m - t {
        checks.push(Check::frequency(
            "Pr(Z(k)) = 0 when sum of tops <= m-t",
            CheckKind::Exact,
            freq,
            0.0,
        ));
    }
    let params = json!({"m": m, "s": s, "t": t, "precision": precision, "trials": trials, "seed": seed, "k": kvec_json(k)});
    Ok(ProbeResult::new("single-event", params, checks, vec![]))
}

/// Options for [`probe_pair_event`].
#[derive(Clone, Debug, Default)]
pub struct PairEventOptions {
    /// Also require the joint frequency to reach this value.
    pub at_least: Option<f64>,
}

/// Joint frequency of `Z(k₁) ∩ Z(k₂)` against the pair bounds, and a product
/// test of independence when no coordinate shares its largest index.
pub fn probe_pair_event(
    gens: &GeneratorSet,
    k1: &KappaVector,
    k2: &KappaVector,
    precision: u32,
    trials: u64,
    seed: u64,
    options: &PairEventOptions,
) -> Result<ProbeResult> {
    if k1.is_zero() || k2.is_zero() || k1 == k2 {
        return Err(Error::InvalidParameter("indices must be distinct and nonzero".into()));
    }
    check_event_shape(k1, gens, precision)?;
    check_event_shape(k2, gens, precision)?;
    let (m, s, t) = (gens.m(), gens.s(), gens.t_value());
    let counts = map_chunks(trials, seed, Stream::Trial, |rng, n| {
        let mut c = [0u64; 3];
        for _ in 0..n {
            let scr = ScrambleSet::random_with(m, s, precision, rng).expect("validated");
            let a = z_event_unchecked(k1, gens, &scr);
            let b = z_event_unchecked(k2, gens, &scr);
            c[0] += u64::from(a);
            c[1] += u64::from(b);
            c[2] += u64::from(a && b);
        }
        c
    })
    .into_iter()
    .fold([0u64; 3], |acc, c| [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]]);
    let (fa, fb, fab) = (
        Frequency::new(counts[0], trials),
        Frequency::new(counts[1], trials),
        Frequency::new(counts[2], trials),
    );
    let d = m as f64 - t as f64 - s as f64;
    let shared = shared_top_coordinates(k1, k2);
    let outside: u32 = (0..s)
        .filter(|j| !shared.contains(j))
        .map(|j| k1.component(j).ceil())
        .sum();
    let mut checks = vec![Check::frequency(
        "Pr(Z1 & Z2) <= 2^(-(3/2)(m-t-s))",
        CheckKind::AtMost,
        fab,
        2f64.powf(-1.5 * d),
    )];
    if s <= 2 || outside as usize >= m - t {
        checks.push(Check::frequency(
            "Pr(Z1 & Z2) <= 2^(-2(m-t-s))",
            CheckKind::AtMost,
            fab,
            2f64.powf(-2.0 * d),
        ));
    }
    let k12 = k1.xor(k2);
    if [k1, k2, &k12].iter().any(|k| (k.ceil_norm1() as usize) <= m - t) {
        checks.push(Check::frequency(
            "Pr(Z1 & Z2) = 0 when some sum of tops <= m-t",
            CheckKind::Exact,
            fab,
            0.0,
        ));
    }
    if shared.is_empty() {
        let (pa, pb) = (fa.p(), fb.p());
        let se = (fab.se().powi(2) + (pb * fa.se()).powi(2) + (pa * fb.se()).powi(2)).sqrt();
        checks.push(Check::new(
            "Pr(Z1 & Z2) = Pr(Z1) Pr(Z2) when no coordinate shares its top index",
            CheckKind::Equal,
            fab.p(),
            se,
            pa * pb,
        ));
    }
    if let Some(lower) = options.at_least {
        checks.push(Check::frequency("Pr(Z1 & Z2) reaches the stated value", CheckKind::AtLeast, fab, lower));
    }
    let params = json!({
        "m": m, "s": s, "t": t, "precision": precision, "trials": trials, "seed": seed,
        "k1": kvec_json(k1), "k2": kvec_json(k2), "shared_top_coordinates": shared,
        "pr_z1": fa.p(), "pr_z2": fb.p(),
    });
    Ok(ProbeResult::new("pair-event", params, checks, vec![]))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Quality parameters of random generator sets against
/// `Pr(t ≥ s log₂ m) ≤ 1/((s−1)! m)`, with the weaker classical threshold
/// `⌈s log₂ m + log₂ (s−1)!⌉` reported alongside.
pub fn probe_t_distribution(m: usize, s: usize, draws: u64, seed: u64) -> Result<ProbeResult> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need m ≥ 2, got {m}")));
    }
    if s < 2 {
        // the threshold s log₂ m is 0 for s = 1, so the event is certain
        return Err(Error::InvalidParameter("need s ≥ 2".into()));
    }
    GeneratorSet::identity(m, s)?;
    let ts: Vec<usize> = map_chunks(draws, seed, Stream::Generators, |rng, n| {
        (0..n)
            .map(|_| GeneratorSet::random_with(m, s, rng).expect("validated").t_value())
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let threshold = s as f64 * (m as f64).log2();
    let classical = (threshold + factorial(s - 1).log2()).ceil();
    let bound = 1.0 / (factorial(s - 1) * m as f64);
    let above = ts.iter().filter(|&&t| t as f64 >= threshold).count() as u64;
    let beyond = ts.iter().filter(|&&t| t as f64 > classical).count() as u64;
    let in_range = ts.iter().all(|&t| t <= m);
    let mut histogram = vec![0u64; m + 1];
    for &t in &ts {
        histogram[t.min(m)] += 1;
    }
    let checks = vec![
        Check::frequency("Pr(t >= s log2 m) <= 1/((s-1)! m)", CheckKind::AtMost, Frequency::new(above, draws), bound),
        Check::frequency(
            "Pr(t > ceil(s log2 m + log2 (s-1)!)) <= 1/((s-1)! m)",
            CheckKind::AtMost,
            Frequency::new(beyond, draws),
            bound,
        ),
        Check::new("every t lies in 0..=m", CheckKind::Exact, f64::from(u8::from(in_range)), 0.0, 1.0),
    ];
    let params = json!({
        "m": m, "s": s, "draws": draws, "seed": seed,
        "threshold": threshold, "classical_threshold": classical, "t_histogram": histogram,
    });
    Ok(ProbeResult::new("t-distribution", params, checks, vec![]))
}

/// Joint frequency of `Z(k₁) ∩ Z(k₂)` when both the generators and the
/// scrambles are random, against the exact value `2^{−2m}`.
pub fn probe_random_pair_law(
    m: usize,
    s: usize,
    k1: &KappaVector,
    k2: &KappaVector,
    trials: u64,
    seed: u64,
) -> Result<ProbeResult> {
    if k1.is_zero() || k2.is_zero() || k1 == k2 {
        return Err(Error::InvalidParameter("indices must be distinct and nonzero".into()));
    }
    if k1.dim() != s || k2.dim() != s {
        return Err(Error::DimensionMismatch(format!("indices need {s} coordinates")));
    }
    if k1.max_ceil() as usize > m || k2.max_ceil() as usize > m {
        return Err(Error::InvalidParameter(format!(
            "every index position must be at most m = {m}"
        )));
    }
    GeneratorSet::identity(m, s)?;
    let precision = m as u32;
    let hits = count_hits(trials, seed, Stream::Trial, |rng| {
        let gens = GeneratorSet::random_with(m, s, rng).expect("validated");
        let scr = ScrambleSet::random_with(m, s, precision, rng).expect("validated");
        z_event_unchecked(k1, &gens, &scr) && z_event_unchecked(k2, &gens, &scr)
    });
    let freq = Frequency::new(hits, trials);
    let target = 2f64.powi(-2 * m as i32);
    let checks = vec![Check::frequency("Pr(Z1 & Z2) = 2^(-2m)", CheckKind::Equal, freq, target)];
    let params = json!({"m": m, "s": s, "trials": trials, "seed": seed, "k1": kvec_json(k1), "k2": kvec_json(k2)});
    Ok(ProbeResult::new("pair-law", params, checks, vec![]))
}

/// Parameters of [`probe_cstar`].
#[derive(Clone, Debug)]
pub struct CstarConfig {
    pub m: usize,
    pub s: usize,
    pub eps: f64,
    /// Random generator sets to draw; ignored for a fixed net.
    pub c_draws: u64,
    /// Index pairs sampled per generator set.
    pub pair_samples: u64,
    pub seed: u64,
    /// Pairs always included besides the sampled ones.
    pub extra_pairs: Vec<(KappaVector, KappaVector)>,
}

const CSTAR_BAND: u32 = 4;

fn sample_kappa_vector<R: RngCore + ?Sized>(rng: &mut R, s: usize, max_top: u32) -> KappaVector {
    loop {
        let comps: Vec<KappaSet> = (0..s)
            .map(|_| {
                if s > 1 && rng.random_bool(0.5) {
                    return KappaSet::EMPTY;
                }
                // top ℓ with weight max_top + 1 − ℓ
                let total = max_top * (max_top + 1) / 2;
                let mut u = rng.random_range(0..total);
                let mut top = 1;
                while u >= max_top + 1 - top {
                    u -= max_top + 1 - top;
                    top += 1;
                }
                let low = if top > 1 { rng.next_u64() & ((1u64 << (top - 1)) - 1) } else { 0 };
                KappaSet::from_index((1u64 << (top - 1)) | low)
            })
            .collect();
        let k = KappaVector::new(comps);
        if !k.is_zero() {
            return k;
        }
    }
}

/// Largest exact conditional pair probability over the sampled pairs.
fn max_pair_probability<R: RngCore + ?Sized>(
    gens: &GeneratorSet,
    cfg: &CstarConfig,
    rng: &mut R,
) -> f64 {
    let max_top = cfg.m as u32 + CSTAR_BAND;
    let mut worst = 0f64;
    let mut consider = |k1: &KappaVector, k2: &KappaVector| {
        if k1 != k2 {
            let p = z_pair_prob_linear(k1, k2, gens).expect("shapes validated").to_f64();
            worst = worst.max(p);
        }
    };
    for (k1, k2) in &cfg.extra_pairs {
        consider(k1, k2);
    }
    for _ in 0..cfg.pair_samples {
        let k1 = sample_kappa_vector(rng, cfg.s, max_top);
        let k2 = sample_kappa_vector(rng, cfg.s, max_top);
        consider(&k1, &k2);
    }
    worst
}

fn cstar_params(cfg: &CstarConfig, threshold: f64, fixed: bool) -> Value {
    json!({
        "m": cfg.m, "s": cfg.s, "eps": cfg.eps, "c_draws": if fixed { 1 } else { cfg.c_draws },
        "pair_samples": cfg.pair_samples, "seed": cfg.seed, "threshold": threshold,
        "extra_pairs": cfg.extra_pairs.iter().map(|(a, b)| json!([kvec_json(a), kvec_json(b)])).collect::<Vec<_>>(),
        "max_top": cfg.m as u32 + CSTAR_BAND,
    })
}

fn cstar_note() -> String {
    format!(
        "pairs are sampled (tops up to m+{CSTAR_BAND}, weighted toward small tops) rather than \
         exhausted; a pass does not certify the bound for every pair"
    )
}

fn validate_cstar(cfg: &CstarConfig) -> Result<()> {
    if cfg.eps.is_nan() || cfg.eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {}", cfg.eps)));
    }
    if cfg.m as u32 + CSTAR_BAND > 64 {
        return Err(Error::InvalidParameter(format!("m = {} too large for sampling", cfg.m)));
    }
    for (a, b) in &cfg.extra_pairs {
        if a.dim() != cfg.s || b.dim() != cfg.s {
            return Err(Error::DimensionMismatch(format!("extra pairs need {} coordinates", cfg.s)));
        }
    }
    GeneratorSet::identity(cfg.m, cfg.s).map(|_| ())
}

/// Draws random generator sets and counts those for which some sampled pair
/// has conditional probability above `2^{−2(1−ε)m}`; the failing fraction is
/// compared with `((s−1)! m)^{−1} + m^{3s} 2^{−2εm}`.
pub fn probe_cstar(cfg: &CstarConfig) -> Result<ProbeResult> {
    validate_cstar(cfg)?;
    let threshold = 2f64.powf(-2.0 * (1.0 - cfg.eps) * cfg.m as f64);
    let failing = count_hits(cfg.c_draws, cfg.seed, Stream::Sample, |rng| {
        let gens = GeneratorSet::random_with(cfg.m, cfg.s, rng).expect("validated");
        max_pair_probability(&gens, cfg, rng) > threshold
    });
    let (m, s) = (cfg.m as f64, cfg.s as i32);
    let bound = 1.0 / (factorial(cfg.s - 1) * m) + m.powi(3 * s) * 2f64.powf(-2.0 * cfg.eps * m);
    let checks = vec![Check::frequency(
        "fraction of C with a sampled pair above 2^(-2(1-eps)m) <= ((s-1)! m)^-1 + m^(3s) 2^(-2 eps m)",
        CheckKind::AtMost,
        Frequency::new(failing, cfg.c_draws),
        bound,
    )];
    Ok(ProbeResult::new("cstar", cstar_params(cfg, threshold, false), checks, vec![cstar_note()]))
}

/// The same membership test applied to one fixed generator set: passes when
/// no sampled pair exceeds `2^{−2(1−ε)m}`.
pub fn probe_cstar_fixed(gens: &GeneratorSet, cfg: &CstarConfig) -> Result<ProbeResult> {
    validate_cstar(cfg)?;
    if gens.m() != cfg.m || gens.s() != cfg.s {
        return Err(Error::DimensionMismatch("generator shape differs from configuration".into()));
    }
    let threshold = 2f64.powf(-2.0 * (1.0 - cfg.eps) * cfg.m as f64);
    let mut rng = crate::rng::substream(cfg.seed, Stream::Sample, 0);
    let worst = max_pair_probability(gens, cfg, &mut rng);
    let checks = vec![Check::new(
        "largest sampled pair probability <= 2^(-2(1-eps)m)",
        CheckKind::AtMost,
        worst,
        0.0,
        threshold,
    )];
    Ok(ProbeResult::new("cstar-fixed", cstar_params(cfg, threshold, true), checks, vec![cstar_note()]))
}

/// Empirical coverage of Student-t intervals built from replicated RQMC estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CiReport {
    pub integrand: String,
    pub m: usize,
    pub s: usize,
    pub replicates: u64,
    pub repetitions: u64,
    pub level: f64,
    pub coverage: f64,
    pub se: f64,
    pub mean_half_width: f64,
    pub seed: u64,
}

/// Repeats: draw `replicates` scrambles, form `mean ± t_{R−1} · sd/√R`, and
/// record whether the exact integral is covered.
pub fn ci_coverage(
    f: &Integrand,
    gens: &GeneratorSet,
    precision: u32,
    replicates: u64,
    repetitions: u64,
    level: f64,
    seed: u64,
) -> Result<CiReport> {
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 replicates, got {replicates}")));
    }
    if f.dim() != gens.s() {
        return Err(Error::DimensionMismatch(format!(
            "integrand has dimension {}, generators have {}",
            f.dim(),
            gens.s()
        )));
    }
    let (m, s) = (gens.m(), gens.s());
    ScrambleSet::identity(m, s, precision)?;
    let q = student_t_quantile((replicates - 1) as f64, 0.5 + level / 2.0)?;
    let mu = f.mean();
    let r = replicates as f64;
    let outcomes: Vec<(bool, f64)> = map_chunks(repetitions, seed, Stream::Sample, |rng, n| {
        (0..n)
            .map(|_| {
                let est: Vec<f64> = (0..replicates)
                    .map(|_| {
                        let scr = ScrambleSet::random_with(m, s, precision, rng).expect("validated");
                        let pts = crate::scramble::generate_points(gens, &scr).expect("shapes agree");
                        crate::moments::rqmc_estimate(f, &pts).expect("dimension checked")
                    })
                    .collect();
                let mean = est.iter().sum::<f64>() / r;
                let sd = (est.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
                let half = q * sd / r.sqrt();
                ((mean - mu).abs() <= half, half)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let covered = outcomes.iter().filter(|(c, _)| *c).count() as u64;
    let freq = Frequency::new(covered, repetitions);
    Ok(CiReport {
        integrand: f.to_string(),
        m,
        s,
        replicates,
        repetitions,
        level,
        coverage: freq.p(),
        se: freq.se(),
        mean_half_width: outcomes.iter().map(|(_, h)| h).sum::<f64>() / repetitions.max(1) as f64,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_policy() {
        assert!(Check::new("x", CheckKind::AtMost, 0.11, 0.01, 0.08).pass);
        assert!(!Check::new("x", CheckKind::AtMost, 0.13, 0.01, 0.08).pass);
        assert!(Check::new("x", CheckKind::Equal, 0.5, 0.01, 0.46).pass);
        assert!(!Check::new("x", CheckKind::Equal, 0.5, 0.01, 0.45).pass);
        assert!(Check::new("x", CheckKind::AtLeast, 0.1, 0.01, 0.14).pass);
        assert!(!Check::new("x", CheckKind::Exact, 1e-9, 0.0, 0.0).pass);
    }

    #[test]
    fn shared_tops() {
        let a: KappaVector = "8,8,0".parse().unwrap();
        let b: KappaVector = "8,0,8".parse().unwrap();
        assert_eq!(shared_top_coordinates(&a, &b), vec![0]);
    }

    #[test]
    fn constant_integrand_is_always_covered() {
        let f = Integrand::Const { s: 1, value: 0.7 };
        let gens = GeneratorSet::identity(3, 1).unwrap();
        let rep = ci_coverage(&f, &gens, 64, 4, 50, 0.95, 1).unwrap();
        assert_eq!(rep.coverage, 1.0);
        assert_eq!(rep.mean_half_width, 0.0);
    }

    #[test]
    fn sampled_indices_are_nonzero_and_in_band() {
        let mut rng = crate::rng::substream(1, Stream::Sample, 0);
        for _ in 0..1000 {
            let k = sample_kappa_vector(&mut rng, 2, 14);
            assert!(!k.is_zero());
            assert!(k.max_ceil() <= 14);
        }
    }
}
