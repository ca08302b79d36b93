use dignet::integrand::Integrand;
use dignet::kappa::{KappaSet, KappaVector};
use dignet::net::GeneratorSet;
use dignet::probes::{
    ci_coverage, probe_cstar, probe_cstar_fixed, probe_pair_event, probe_random_pair_law,
    probe_single_event, probe_t_distribution, CheckKind, CstarConfig, PairEventOptions,
};
use dignet::Error;

fn kv(text: &str) -> KappaVector {
    text.parse().unwrap()
}

fn witness_pair() -> (KappaVector, KappaVector) {
    let one = KappaSet::singleton(4);
    (
        KappaVector::new(vec![one, one, KappaSet::EMPTY]),
        KappaVector::new(vec![one, KappaSet::EMPTY, one]),
    )
}

fn counterexample() -> GeneratorSet {
    let base = GeneratorSet::search(7, 3, 1, 3, 1_000_000).unwrap();
    GeneratorSet::embed_counterexample(&base).unwrap()
}

#[test]
fn single_event_on_identity_beyond_m() {
    let gens = GeneratorSet::identity(4, 1).unwrap();
    let k = KappaVector::new(vec![KappaSet::singleton(5)]);
    let res = probe_single_event(&gens, &k, 64, 200_000, 1).unwrap();
    assert!(res.passed());
    let c = &res.checks[0];
    assert!((c.empirical - 1.0 / 16.0).abs() <= 4.0 * c.se);
}

#[test]
fn single_event_below_the_net_threshold_never_occurs() {
    let gens = GeneratorSet::identity(4, 1).unwrap();
    let k = kv("12");
    let res = probe_single_event(&gens, &k, 64, 50_000, 2).unwrap();
    let exact = res.checks.iter().find(|c| c.kind == CheckKind::Exact).unwrap();
    assert_eq!(exact.empirical, 0.0);
    assert!(res.passed());
}

#[test]
fn single_event_on_random_generators() {
    let gens = GeneratorSet::random(6, 2, 3).unwrap();
    for (i, k) in ["37,5", "64,0", "100,90"].iter().enumerate() {
        let res = probe_single_event(&gens, &kv(k), 64, 100_000, i as u64).unwrap();
        assert!(res.passed(), "{k}: {:?}", res.checks);
    }
}

#[test]
fn single_event_rejects_zero_index() {
    let gens = GeneratorSet::identity(3, 2).unwrap();
    assert!(matches!(
        probe_single_event(&gens, &kv("0,0"), 64, 10, 0),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn pair_event_in_two_dimensions() {
    let gens = GeneratorSet::random(5, 2, 11).unwrap();
    let res = probe_pair_event(&gens, &kv("40,3"), &kv("9,33"), 64, 200_000, 4, &PairEventOptions::default()).unwrap();
    // s = 2 always brings the stronger bound
    assert!(res.checks.iter().any(|c| c.label.contains("-2(m-t-s)")));
    assert!(res.passed(), "{:?}", res.checks);
}

#[test]
fn pair_event_without_shared_tops_factorises() {
    let gens = GeneratorSet::identity(3, 2).unwrap();
    let res = probe_pair_event(&gens, &kv("16,0"), &kv("0,32"), 64, 400_000, 5, &PairEventOptions::default()).unwrap();
    assert_eq!(res.params["shared_top_coordinates"], serde_json::json!([]));
    assert!(res.checks.iter().any(|c| c.kind == CheckKind::Equal));
    assert!(res.passed(), "{:?}", res.checks);
}

#[test]
fn pair_event_with_small_tops_is_exactly_zero() {
    let gens = GeneratorSet::random(6, 2, 21).unwrap();
    let t = gens.t_value();
    assert!(t <= 4);
    let res = probe_pair_event(&gens, &kv("1,0"), &kv("64,64"), 64, 50_000, 6, &PairEventOptions::default()).unwrap();
    let exact = res.checks.iter().find(|c| c.kind == CheckKind::Exact).unwrap();
    assert_eq!(exact.empirical, 0.0);
}

#[test]
fn counterexample_reaches_the_three_halves_rate() {
    let gens = counterexample();
    let (k1, k2) = witness_pair();
    let opts = PairEventOptions { at_least: Some(2f64.powi(-9)) };
    let res = probe_pair_event(&gens, &k1, &k2, 64, 300_000, 7, &opts).unwrap();
    assert!(res.passed(), "{:?}", res.checks);
}

#[test]
fn t_distribution_in_three_dimensions() {
    let res = probe_t_distribution(4, 3, 4000, 8).unwrap();
    assert!(res.passed(), "{:?}", res.checks);
    assert_eq!(res.checks[0].target, 0.125);
}

#[test]
fn t_distribution_needs_two_dimensions() {
    assert!(probe_t_distribution(8, 1, 100, 0).is_err());
    assert!(probe_t_distribution(1, 2, 100, 0).is_err());
}

#[test]
fn pair_law_in_one_dimension() {
    let k1 = KappaVector::new(vec![KappaSet::singleton(2)]);
    let k2 = KappaVector::new(vec![KappaSet::singleton(3)]);
    let res = probe_random_pair_law(3, 1, &k1, &k2, 400_000, 9).unwrap();
    assert_eq!(res.checks[0].target, 2f64.powi(-6));
    assert!(res.passed(), "{:?}", res.checks);
}

#[test]
fn pair_law_rejects_tops_beyond_m() {
    let k1 = KappaVector::new(vec![KappaSet::singleton(5)]);
    let k2 = KappaVector::new(vec![KappaSet::singleton(3)]);
    assert!(probe_random_pair_law(3, 1, &k1, &k2, 100, 0).is_err());
    assert!(probe_random_pair_law(3, 1, &k2, &k2, 100, 0).is_err());
}

fn cstar_config(m: usize, s: usize, eps: f64) -> CstarConfig {
    CstarConfig {
        m,
        s,
        eps,
        c_draws: 200,
        pair_samples: 300,
        seed: 12,
        extra_pairs: vec![],
    }
}

#[test]
fn cstar_random_generators() {
    let res = probe_cstar(&cstar_config(10, 2, 0.5)).unwrap();
    assert!(res.passed(), "{:?}", res.checks);
    assert!(!res.notes.is_empty());
}

#[test]
fn cstar_with_unit_eps_never_fails() {
    let mut cfg = cstar_config(6, 2, 1.0);
    cfg.c_draws = 50;
    let res = probe_cstar(&cfg).unwrap();
    assert_eq!(res.checks[0].empirical, 0.0);
}

#[test]
fn counterexample_fails_cstar_membership() {
    let mut cfg = cstar_config(8, 3, 0.2);
    cfg.extra_pairs = vec![witness_pair()];
    let res = probe_cstar_fixed(&counterexample(), &cfg).unwrap();
    assert!(!res.passed());
    assert!(res.checks[0].empirical >= 2f64.powi(-9));
}

#[test]
fn cstar_rejects_nonpositive_eps() {
    assert!(probe_cstar(&cstar_config(4, 2, 0.0)).is_err());
}

#[test]
fn probes_are_reproducible() {
    let gens = GeneratorSet::random(4, 2, 13).unwrap();
    let a = probe_single_event(&gens, &kv("17,9"), 64, 20_000, 14).unwrap();
    let b = probe_single_event(&gens, &kv("17,9"), 64, 20_000, 14).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn median_level_intervals_cover_about_half_the_time() {
    let gens = GeneratorSet::identity(4, 1).unwrap();
    let rep = ci_coverage(&Integrand::Xsq, &gens, 64, 64, 4000, 0.5, 15).unwrap();
    assert!((rep.coverage - 0.5).abs() <= 4.0 * rep.se, "{rep:?}");
}

#[test]
fn nominal_level_report() {
    let gens = GeneratorSet::identity(6, 1).unwrap();
    let rep = ci_coverage(&Integrand::Xsq, &gens, 64, 8, 2000, 0.95, 16).unwrap();
    assert!((0.0..=1.0).contains(&rep.coverage));
    assert!(rep.mean_half_width > 0.0);
    assert!(ci_coverage(&Integrand::Xsq, &gens, 64, 1, 10, 0.95, 0).is_err());
}
