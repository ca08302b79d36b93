//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use dignet::dyadic::rational_to_f64;
use dignet::gf2::BitMatrix;
use dignet::integrand::Integrand;
use dignet::kappa::{KappaSet, KappaVector};
use dignet::moments::{
    closed_form_third_xsq, decomposition_check_xsq, exact_third_moment_xsq, mc_moments,
    variance_lower_bound_xsq, variance_series_xsq, Centering, DEFAULT_CUTOFF_OFFSET,
};
use dignet::net::GeneratorSet;
use dignet::probes::{
    probe_pair_event, probe_random_pair_law, probe_t_distribution, PairEventOptions, MARGIN,
};
use dignet::scramble::{generate_points, is_net_with_quality, ScrambleSet};
use dignet::walsh::check_t_sum_bound;
use dignet::zprob::{z_pair_prob_enum, z_pair_prob_identity, z_pair_prob_linear, z_pair_prob_mc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn third_moment_oracle() -> Outcome {
    let mut worst = 0f64;
    for m in 0..=8u32 {
        let exact = exact_third_moment_xsq(m, m + DEFAULT_CUTOFF_OFFSET).map_err(|e| e.to_string())?;
        let closed = rational_to_f64(&closed_form_third_xsq(m));
        let rel = ((exact.value.to_f64() - closed) / closed).abs();
        worst = worst.max(rel);
    }
    verdict(worst <= 1e-6, format!("max relative error {worst:.3e} over m = 0..8"))
}

fn variance_lower_bound() -> Outcome {
    for m in 0..=8u32 {
        let v = variance_series_xsq(m, m + DEFAULT_CUTOFF_OFFSET).map_err(|e| e.to_string())?;
        let bound = variance_lower_bound_xsq(m);
        if v.total < bound {
            return Err(format!("m = {m}: variance below (1/12) 2^(-3m)"));
        }
        if v.singleton_subseries != bound {
            return Err(format!("m = {m}: singleton subseries differs from (1/12) 2^(-3m)"));
        }
    }
    Ok("series >= (1/12) 2^(-3m) and singleton subseries equal exactly, m = 0..8".into())
}

fn mc_third_moment() -> Outcome {
    let gens = GeneratorSet::identity(3, 1).map_err(|e| e.to_string())?;
    let rep = mc_moments(&Integrand::Xsq, &gens, 64, 2_000_000, 20_241_015, Centering::Known)
        .map_err(|e| e.to_string())?;
    let target = rational_to_f64(&closed_form_third_xsq(3));
    let z = (rep.m3 - target) / rep.se.m3;
    verdict(
        z.abs() <= MARGIN,
        format!("m3 = {:.6e} (batch SE {:.2e}), target {target:.6e}, z = {z:.2}", rep.m3, rep.se.m3),
    )
}

fn pair_law() -> Outcome {
    let k1: KappaVector = "4,0".parse().map_err(|e: dignet::Error| e.to_string())?;
    let k2: KappaVector = "0,8".parse().map_err(|e: dignet::Error| e.to_string())?;
    let res = probe_random_pair_law(4, 2, &k1, &k2, 1_000_000, 7).map_err(|e| e.to_string())?;
    let c = &res.checks[0];
    verdict(
        res.passed(),
        format!("frequency {:.4e} +- {:.1e}, target {:.4e}", c.empirical, c.se, c.target),
    )
}

fn t_distribution() -> Outcome {
    let res = probe_t_distribution(8, 2, 4000, 11).map_err(|e| e.to_string())?;
    let c = &res.checks[0];
    let in_range = res.checks[2].pass;
    verdict(
        c.pass && in_range,
        format!(
            "Pr(t >= 6) = {:.4} +- {:.4} vs 1/8, all t in 0..=8: {in_range}, histogram {}",
            c.empirical, c.se, res.params["t_histogram"]
        ),
    )
}

fn t_sum_exhaustive() -> Outcome {
    let start = Instant::now();
    let chk = check_t_sum_bound(10).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        chk.strict_bound_holds && chk.symmetric && secs < 60.0,
        format!(
            "{} triples, max ratio {:.4} at {:?}, symmetric {}, {secs:.1} s",
            chk.triples, chk.max_ratio, chk.argmax, chk.symmetric
        ),
    )
}

fn counterexample() -> Outcome {
    let base = GeneratorSet::search(7, 3, 1, 3, 1_000_000).map_err(|e| e.to_string())?;
    let gens = GeneratorSet::embed_counterexample(&base).map_err(|e| e.to_string())?;
    let t = gens.t_value();
    let big_t = gens.big_t_value().map_err(|e| e.to_string())?;
    let k1 = KappaVector::new(vec![KappaSet::singleton(4), KappaSet::singleton(4), KappaSet::EMPTY]);
    let k2 = KappaVector::new(vec![KappaSet::singleton(4), KappaSet::EMPTY, KappaSet::singleton(4)]);
    let exact = z_pair_prob_linear(&k1, &k2, &gens).map_err(|e| e.to_string())?;
    let target = 2f64.powi(-9);
    let opts = PairEventOptions { at_least: Some(target) };
    let res = probe_pair_event(&gens, &k1, &k2, 64, 1_000_000, 5, &opts).map_err(|e| e.to_string())?;
    let c = res.checks.last().expect("at-least check present");
    verdict(
        t <= 2 && big_t >= 5 && c.pass,
        format!(
            "t = {t}, T = {big_t}, witness frequency {:.4e} +- {:.1e} (exact {:.4e}) vs 2^-9",
            c.empirical,
            c.se,
            exact.to_f64()
        ),
    )
}

fn identity_t_values() -> Outcome {
    for m in 2..=10 {
        let t = GeneratorSet::identity(m, 2).map_err(|e| e.to_string())?.t_value();
        if t != m - 1 {
            return Err(format!("identity m = {m}, s = 2 has t = {t}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tested = 0;
    while tested < 200 {
        let m = rng.random_range(1..=12usize);
        let a = BitMatrix::from_fn(m, m, |_, _| rng.random_bool(0.5));
        if a.rank() < m {
            continue;
        }
        let t = GeneratorSet::new(vec![a]).map_err(|e| e.to_string())?.t_value();
        if t != 0 {
            return Err(format!("invertible {m}x{m} matrix has t = {t}"));
        }
        tested += 1;
    }
    Ok("identity pairs give t = m-1 for m = 2..10; 200 invertible single matrices give t = 0".into())
}

fn oracle_cross_validation() -> Outcome {
    let mut compared = 0;
    for m in 1..=3usize {
        let gens = GeneratorSet::identity(m, 1).map_err(|e| e.to_string())?;
        for a in 1..=5u64 {
            for b in 1..=5u64 {
                if a == b {
                    continue;
                }
                let (ka, kb) = (KappaSet::from_index(a), KappaSet::from_index(b));
                let rule = z_pair_prob_identity(ka, kb, m).map_err(|e| e.to_string())?;
                let enumerated = z_pair_prob_enum(
                    &KappaVector::new(vec![ka]),
                    &KappaVector::new(vec![kb]),
                    &gens,
                    8,
                )
                .map_err(|e| e.to_string())?;
                if rule.to_rational() != enumerated.to_rational() {
                    return Err(format!("m = {m}, k = ({a}, {b}): rule {rule:?} vs enumeration {enumerated:?}"));
                }
                compared += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0f64;
    for fixture in 0..10u64 {
        let gens = GeneratorSet::random(2, 2, 100 + fixture).map_err(|e| e.to_string())?;
        let (k1, k2) = loop {
            let draw = |rng: &mut ChaCha8Rng| {
                KappaVector::from_indices(&[rng.random_range(0..16), rng.random_range(0..16)])
            };
            let (a, b) = (draw(&mut rng), draw(&mut rng));
            if a != b && !a.is_zero() && !b.is_zero() {
                break (a, b);
            }
        };
        let exact = z_pair_prob_enum(&k1, &k2, &gens, 8).map_err(|e| e.to_string())?.to_f64();
        let freq = z_pair_prob_mc(&k1, &k2, &gens, 8, 200_000, fixture).map_err(|e| e.to_string())?;
        let gap = (freq.p() - exact).abs();
        let ok = if freq.se() == 0.0 { gap == 0.0 } else { gap <= MARGIN * freq.se() };
        if !ok {
            return Err(format!("fixture {fixture}: enumeration {exact} vs frequency {}", freq.p()));
        }
        if freq.se() > 0.0 {
            worst = worst.max(gap / freq.se());
        }
    }
    Ok(format!(
        "{compared} identity-rule pairs equal enumeration; 10 random fixtures within {worst:.2} SE"
    ))
}

fn decomposition_residual() -> Outcome {
    let gens = GeneratorSet::identity(4, 1).map_err(|e| e.to_string())?;
    let mut worst = 0f64;
    for seed in 0..100 {
        let scr = ScrambleSet::random(4, 1, 48, seed).map_err(|e| e.to_string())?;
        let chk = decomposition_check_xsq(&gens, &scr, 40).map_err(|e| e.to_string())?;
        if !chk.holds() {
            return Err(format!("seed {seed}: residual {:.3e} above bound {:.3e}", chk.residual, chk.tail_bound));
        }
        worst = worst.max(chk.residual / chk.tail_bound);
    }
    Ok(format!("100 scrambles, largest residual/bound {worst:.3e}"))
}

fn scramble_invariance() -> Outcome {
    for seed in 0..100 {
        let gens = GeneratorSet::random(4, 2, 1000 + seed).map_err(|e| e.to_string())?;
        let t = gens.t_value();
        let scr = ScrambleSet::random(4, 2, 64, seed).map_err(|e| e.to_string())?;
        let pts = generate_points(&gens, &scr).map_err(|e| e.to_string())?;
        if !is_net_with_quality(&pts, t).map_err(|e| e.to_string())? {
            return Err(format!("seed {seed}: scrambled points fail the census at t = {t}"));
        }
    }
    Ok("100 scrambled random (m=4, s=2) nets keep their t".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("exact third moment matches closed form", third_moment_oracle),
        ("variance lower bound", variance_lower_bound),
        ("Monte Carlo third central moment", mc_third_moment),
        ("pair probability equals 2^-2m for random generators", pair_law),
        ("distribution of t for random generators", t_distribution),
        ("exhaustive finite-sum bound", t_sum_exhaustive),
        ("counterexample tightness", counterexample),
        ("identity and invertible t-values", identity_t_values),
        ("probability oracles agree", oracle_cross_validation),
        ("error decomposition residual", decomposition_residual),
        ("scrambling preserves t", scramble_invariance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
