use dignet::gf2::{intersect_row_spaces, BitMatrix, BitVector};
use dignet::kappa::{KappaSet, KappaVector};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(any::<bool>(), r * c)
            .prop_map(move |bits| BitMatrix::from_fn(r, c, |i, j| bits[i * c + j]))
    })
}

fn matrices_with_cols(n: usize, cols: usize) -> impl Strategy<Value = Vec<BitMatrix>> {
    prop::collection::vec(
        (1..=cols).prop_flat_map(move |r| {
            prop::collection::vec(any::<bool>(), r * cols)
                .prop_map(move |bits| BitMatrix::from_fn(r, cols, |i, j| bits[i * cols + j]))
        }),
        n,
    )
}

proptest! {
    #[test]
    fn rank_equals_rank_of_transpose(a in matrix(12, 12)) {
        prop_assert_eq!(a.rank(), a.transpose().rank());
        prop_assert!(a.rank() <= a.rows().min(a.cols()));
    }

    #[test]
    fn rank_of_product_is_at_most_factor_ranks(a in matrix(8, 8), seed in any::<u64>()) {
        let b = BitMatrix::from_fn(a.cols(), 6, |i, j| (seed >> ((i * 6 + j) % 64)) & 1 == 1);
        let ab = a.mul(&b).unwrap();
        prop_assert!(ab.rank() <= a.rank().min(b.rank()));
    }

    #[test]
    fn intersection_dimension_formula(parts in matrices_with_cols(2, 10)) {
        let (u, v) = (&parts[0], &parts[1]);
        let both = intersect_row_spaces(&[u.row_space_basis(), v.row_space_basis()]).unwrap();
        let sum = BitMatrix::vstack(&[u, v]).unwrap().rank();
        prop_assert_eq!(both.rank(), u.rank() + v.rank() - sum);
    }

    #[test]
    fn intersection_lies_in_every_space(parts in matrices_with_cols(3, 8)) {
        let bases: Vec<BitMatrix> = parts.iter().map(|p| p.row_space_basis()).collect();
        let both = intersect_row_spaces(&bases).unwrap();
        for r in 0..both.rows() {
            for b in &bases {
                // adding intersection rows must not raise the rank
                let extended = BitMatrix::vstack(&[b, &both.top_rows(r + 1)]).unwrap();
                prop_assert_eq!(extended.rank(), b.rank());
            }
        }
    }

    #[test]
    fn intersection_ignores_order(parts in matrices_with_cols(3, 8)) {
        let bases: Vec<BitMatrix> = parts.iter().map(|p| p.row_space_basis()).collect();
        let forward = intersect_row_spaces(&bases).unwrap();
        let reversed: Vec<BitMatrix> = bases.iter().rev().cloned().collect();
        let backward = intersect_row_spaces(&reversed).unwrap();
        prop_assert_eq!(forward.rank(), backward.rank());
        let joint = BitMatrix::vstack(&[&forward, &backward]).unwrap();
        prop_assert_eq!(joint.rank(), forward.rank());
    }

    #[test]
    fn solution_count_matches_brute_force(a in matrix(6, 8), y in any::<u64>()) {
        let y = BitVector::from_word(y & ((1 << a.rows()) - 1), a.rows());
        let brute = (0u64..1 << a.cols())
            .filter(|&x| a.mul_vec(&BitVector::from_word(x, a.cols())).unwrap() == y)
            .count() as u128;
        prop_assert_eq!(a.solve_count(&y).unwrap(), brute);
    }

    #[test]
    fn kappa_xor_is_a_group(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (KappaSet::from_index(a), KappaSet::from_index(b), KappaSet::from_index(c));
        prop_assert_eq!(a.xor(b).xor(c), a.xor(b.xor(c)));
        prop_assert_eq!(a.xor(b), b.xor(a));
        prop_assert_eq!(a.xor(KappaSet::EMPTY), a);
        prop_assert!(a.xor(a).is_empty());
    }

    #[test]
    fn kappa_vector_text_round_trip(ks in prop::collection::vec(any::<u64>(), 1..6)) {
        let k = KappaVector::from_indices(&ks);
        let back: KappaVector = k.to_string().parse().unwrap();
        prop_assert_eq!(back, k);
    }

    #[test]
    fn kappa_positions_rebuild_the_set(a in any::<u64>()) {
        let k = KappaSet::from_index(a);
        let positions: Vec<u32> = k.positions().collect();
        prop_assert_eq!(KappaSet::from_positions(&positions).unwrap(), k);
        prop_assert_eq!(positions.len() as u32, k.card());
        prop_assert_eq!(positions.iter().copied().max().unwrap_or(0), k.ceil());
    }
}
