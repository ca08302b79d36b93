use dignet::dyadic::rational_to_f64;
use dignet::integrand::Integrand;
use dignet::kappa::{KappaSet, KappaVector};
use dignet::moments::{
    decomposition_check_xsq, mc_moments, pbar_bound, replicate_estimates, variance_series_xsq,
    Centering,
};
use dignet::net::GeneratorSet;
use dignet::scramble::ScrambleSet;
use dignet::zprob::z_pair_prob_linear;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn replicates_do_not_depend_on_worker_count() {
    let gens = GeneratorSet::random(5, 2, 1).unwrap();
    let f = Integrand::ProdXsq { s: 2 };
    let one = in_pool(1, || replicate_estimates(&f, &gens, 64, 10_000, 3).unwrap());
    let four = in_pool(4, || replicate_estimates(&f, &gens, 64, 10_000, 3).unwrap());
    assert_eq!(one, four);
    let a = in_pool(1, || mc_moments(&f, &gens, 64, 10_000, 3, Centering::Known).unwrap());
    let b = in_pool(3, || mc_moments(&f, &gens, 64, 10_000, 3, Centering::Known).unwrap());
    assert_eq!(a, b);
}

#[test]
fn monte_carlo_variance_matches_exact_series() {
    for m in [2u32, 4] {
        let gens = GeneratorSet::identity(m as usize, 1).unwrap();
        let rep = mc_moments(&Integrand::Xsq, &gens, 64, 400_000, 17 + m as u64, Centering::Known).unwrap();
        let exact = rational_to_f64(&variance_series_xsq(m, m + 24).unwrap().total);
        assert!(
            (rep.var - exact).abs() <= 4.0 * rep.se.var,
            "m = {m}: {} vs {exact} (SE {})",
            rep.var,
            rep.se.var
        );
        assert!((rep.mean - 1.0 / 3.0).abs() <= 4.0 * rep.se.mean);
    }
}

#[test]
fn sample_centering_is_close_to_known_centering() {
    let gens = GeneratorSet::identity(3, 1).unwrap();
    let known = mc_moments(&Integrand::Xsq, &gens, 64, 50_000, 2, Centering::Known).unwrap();
    let sample = mc_moments(&Integrand::Xsq, &gens, 64, 50_000, 2, Centering::Sample).unwrap();
    assert_eq!(known.mean, sample.mean);
    assert!((known.var - sample.var).abs() <= 4.0 * known.se.var);
}

#[test]
fn constant_integrand_has_no_skewness() {
    let gens = GeneratorSet::identity(3, 2).unwrap();
    let rep = mc_moments(&Integrand::Const { s: 2, value: 1.5 }, &gens, 64, 64, 0, Centering::Known).unwrap();
    assert_eq!(rep.var, 0.0);
    assert!(rep.gamma.is_none());
    assert!(rep.skewness().is_err());
}

#[test]
fn decomposition_holds_for_random_invertible_generators() {
    let mut checked = 0;
    for seed in 0..200 {
        let gens = GeneratorSet::random(5, 1, seed).unwrap();
        if gens.t_value() != 0 {
            continue;
        }
        let scr = ScrambleSet::random(5, 1, 48, seed).unwrap();
        let chk = decomposition_check_xsq(&gens, &scr, 40).unwrap();
        assert!(chk.holds(), "seed {seed}: {chk:?}");
        checked += 1;
    }
    assert!(checked > 20);
}

#[test]
fn counterexample_pair_probabilities_stay_below_pbar() {
    let base = GeneratorSet::search(7, 3, 1, 3, 1_000_000).unwrap();
    let gens = GeneratorSet::embed_counterexample(&base).unwrap();
    let q = gens.quality().unwrap();
    let (m, t, big_t) = (q.m as u32, q.t as u32, q.big_t.unwrap() as u32);
    for l1 in 1..=m + 2 {
        for l2 in 1..=m + 2 {
            for l3 in 1..=m + 2 {
                let k1 = KappaVector::new(vec![KappaSet::singleton(l1), KappaSet::singleton(l2), KappaSet::EMPTY]);
                let k2 = KappaVector::new(vec![KappaSet::singleton(l1), KappaSet::EMPTY, KappaSet::singleton(l3)]);
                let p = z_pair_prob_linear(&k1, &k2, &gens).unwrap().to_f64();
                let bound = pbar_bound(l1, l2, l3, m, t, big_t);
                assert!(p <= bound, "({l1},{l2},{l3}): {p} > {bound}");
            }
        }
    }
}
