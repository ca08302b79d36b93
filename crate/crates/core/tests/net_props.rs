use dignet::gf2::BitMatrix;
use dignet::net::GeneratorSet;
use dignet::scramble::{generate_points, is_net_with_quality, unscrambled_points, ScrambleSet};
use dignet::Error;
use proptest::prelude::*;

/// Smallest `t` for which every elementary box of volume `2^{t−m}` holds
/// exactly `2^t` points.
fn t_by_point_counting(gens: &GeneratorSet) -> usize {
    let pts = unscrambled_points(gens);
    (0..=gens.m())
        .find(|&t| is_net_with_quality(&pts, t).unwrap())
        .expect("t = m always holds")
}

fn lower_unit_triangular(m: usize, bits: u64) -> BitMatrix {
    let mut k = 0;
    BitMatrix::from_fn(m, m, |r, c| {
        if r == c {
            true
        } else if c < r {
            k += 1;
            (bits >> (k % 64)) & 1 == 1
        } else {
            false
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn t_matches_point_counting(m in 1usize..=4, s in 1usize..=3, seed in any::<u64>()) {
        let gens = GeneratorSet::random(m, s, seed).unwrap();
        prop_assert_eq!(gens.t_value(), t_by_point_counting(&gens));
    }

    #[test]
    fn fast_t_matches_composition_search(m in 1usize..=8, s in 1usize..=4, seed in any::<u64>()) {
        let gens = GeneratorSet::random(m, s, seed).unwrap();
        prop_assert_eq!(gens.t_value(), gens.t_value_by_compositions());
    }

    #[test]
    fn t_survives_lower_triangular_mixing(m in 1usize..=8, s in 1usize..=3, seed in any::<u64>(), bits in any::<u64>()) {
        let gens = GeneratorSet::random(m, s, seed).unwrap();
        let mixed: Vec<BitMatrix> = gens
            .matrices()
            .iter()
            .enumerate()
            .map(|(j, c)| lower_unit_triangular(m, bits.rotate_left(j as u32 * 7)).mul(c).unwrap())
            .collect();
        let mixed = GeneratorSet::new(mixed).unwrap();
        prop_assert_eq!(mixed.t_value(), gens.t_value());
    }

    #[test]
    fn scrambled_points_keep_t(m in 1usize..=5, s in 1usize..=3, seed in any::<u64>(), precision in 5u32..=64) {
        let gens = GeneratorSet::random(m, s, seed).unwrap();
        let scr = ScrambleSet::random(m, s, precision.max(m as u32), seed ^ 1).unwrap();
        let pts = generate_points(&gens, &scr).unwrap();
        prop_assert!(is_net_with_quality(&pts, gens.t_value()).unwrap());
    }

    #[test]
    fn text_round_trip(m in 1usize..=12, s in 1usize..=4, seed in any::<u64>()) {
        let gens = GeneratorSet::random(m, s, seed).unwrap();
        prop_assert_eq!(GeneratorSet::from_text(&gens.to_text(), "memory").unwrap(), gens);
    }
}

#[test]
fn save_and_load_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.txt");
    let gens = GeneratorSet::random(6, 3, 42).unwrap();
    gens.save(&path).unwrap();
    let back = GeneratorSet::load(&path).unwrap();
    assert_eq!(back, gens);
    assert_eq!(back.t_value(), gens.t_value());
}

#[test]
fn loading_a_missing_file_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absent.txt");
    match GeneratorSet::load(&path) {
        Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}

#[test]
fn malformed_file_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "dignet v1 m=2 s=1\n10\n0x\n").unwrap();
    match GeneratorSet::load(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn counterexample_structure() {
    let base = GeneratorSet::search(7, 3, 1, 3, 1_000_000).unwrap();
    assert!(base.t_value() <= 1);
    let gens = GeneratorSet::embed_counterexample(&base).unwrap();
    let q = gens.quality().unwrap();
    assert!(q.t <= 2);
    assert!(q.big_t.unwrap() >= 5);
    // the three leading 4-row spaces share the unit vector in column 4
    assert!(gens.intersection_rank(4, 4, 4).unwrap() >= 1);
    let pts = unscrambled_points(&gens);
    assert!(is_net_with_quality(&pts, q.t).unwrap());
}
