mod common;

use num_bigint::BigInt;
use proptest::prelude::*;

use common::props;
use common::*;
use opalg::linalg::module::{cokernel, kernel_basis, solve};
use opalg::linalg::{int, snf, ExactMatrix, FgModule, Ring};

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[test]
fn smith_form_contract_on_random_matrices() {
    props::snf_contract(props::SNF_CASES).unwrap();
}

#[test]
fn textbook_smith_form() {
    let m = ExactMatrix::from_i64(Ring::Integers, &[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
    let s = snf(&m).unwrap();
    let d: Vec<BigInt> = s.invariant_factors().iter().map(|x| x.to_integer()).collect();
    assert_eq!(d, big(&[2, 6, 12]));
}

#[test]
fn smith_form_needs_integers() {
    let m = ExactMatrix::from_i64(Ring::Rationals, &[&[1, 2]]);
    assert!(snf(&m).is_err());
}

#[test]
fn cokernels_are_canonical() {
    let z = Ring::Integers;
    let m = ExactMatrix::from_i64(z, &[&[2, 0], &[0, 3], &[0, 0]]);
    assert_eq!(cokernel(&m), FgModule { ring: z, rank: 1, torsion: big(&[6]) });
    assert_eq!(FgModule::from_orders(z, &big(&[4, 6])), FgModule { ring: z, rank: 0, torsion: big(&[2, 12]) });
    assert_eq!(invariant_factors(&[4, 6]), big(&[2, 12]));
}

#[test]
fn prime_fields_reduce_entries() {
    let f = Ring::parse("GF(5)").unwrap();
    let m = ExactMatrix::from_i64(f, &[&[7, -1]]);
    assert_eq!(m.get(0, 0), &int(2));
    assert_eq!(m.get(0, 1), &int(4));
    assert!(Ring::parse("GF(4)").is_err());
    assert!(Ring::parse("RR").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kernel_basis_is_annihilated(rows in prop::collection::vec(prop::collection::vec(-5i64..=5, 4), 1..5), ring in any_ring()) {
        let m = ExactMatrix::from_fn(ring, rows.len(), 4, |i, j| int(rows[i][j]));
        let k = kernel_basis(&m);
        prop_assert!(m.mul(&k).is_zero());
        if ring.is_field() {
            prop_assert_eq!(k.cols(), 4 - rank_oracle(&m));
        }
    }

    #[test]
    fn solve_recovers_a_preimage(rows in prop::collection::vec(prop::collection::vec(-5i64..=5, 3), 1..5), x in prop::collection::vec(-4i64..=4, 3)) {
        let q = Ring::Rationals;
        let a = ExactMatrix::from_fn(q, rows.len(), 3, |i, j| int(rows[i][j]));
        let xv = ExactMatrix::from_fn(q, 3, 1, |i, _| int(x[i]));
        let b = a.mul(&xv);
        let sol = solve(&a, &b).expect("b lies in the image");
        prop_assert_eq!(a.mul(&sol), b);
    }

    #[test]
    fn rank_matches_elimination(rows in prop::collection::vec(prop::collection::vec(-9i64..=9, 5), 0..6), ring in any_ring()) {
        let m = ExactMatrix::from_fn(ring, rows.len(), 5, |i, j| int(rows[i][j]));
        prop_assert_eq!(m.rank(), rank_oracle(&m));
    }
}
