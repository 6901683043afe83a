mod common;

use std::collections::BTreeMap;

use num_bigint::BigInt;

use common::{instances, props};
use opalg::algebra::{dual_numbers, ground_algebra, initial_algebra, torsion_square_algebra, OAlgebra};
use opalg::complex::ChainComplex;
use opalg::envelope::{
    closed_form, enveloping_operad, split_coequalizer_witness, square_quotient, ClosedFormKind, EnvelopingOperad, SplitKind,
    TruncationBounds,
};
use opalg::linalg::{FgModule, Ring};
use opalg::operad::builtin_a3zero;

#[test]
fn every_split_witness_satisfies_the_identities() {
    let count = props::split_suite().unwrap();
    assert!(count >= 30, "only {count} witnesses");
}

#[test]
fn swapped_arrows_break_a_witness() {
    let alg = dual_numbers(Ring::Rationals);
    let mut w = split_coequalizer_witness(&SplitKind::Uass, &alg, 1, 2, 3).unwrap();
    std::mem::swap(&mut w.f, &mut w.g);
    assert!(props::split_identities(&w).is_err());
}

#[test]
fn free_operad_basis_matches_reduced_trees() {
    let lines = instances::free_operad_counts().unwrap();
    assert_eq!(lines.len(), 2 * (instances::FREE_MAX_ARITY + 1));
}

#[test]
fn filtration_stages_reach_the_direct_envelope() {
    instances::filtration_coherence().unwrap();
}

fn ranks(c: &ChainComplex) -> BTreeMap<i64, usize> {
    c.degrees().into_iter().map(|n| (n, c.rank(n))).filter(|(_, r)| *r > 0).collect()
}

#[test]
fn unital_envelope_of_dual_numbers_is_a_tensor_power() {
    let alg = dual_numbers(Ring::Rationals);
    let env = enveloping_operad(&alg, &TruncationBounds::default().arity(3)).unwrap();
    assert!(env.stabilized());
    for n in 0..=3 {
        // (k ⊕ kε)^{⊗(n+1)}
        assert_eq!(env.complex(n).total_rank(), 1 << (n + 1), "arity {n}");
    }
}

#[test]
fn ground_algebra_envelope_is_the_operad() {
    let env = enveloping_operad(&ground_algebra(Ring::Integers), &TruncationBounds::default()).unwrap();
    for n in 0..=4 {
        assert_eq!(ranks(&env.complex(n)), [(0, 1)].into_iter().collect(), "arity {n}");
    }
}

#[test]
fn torsion_survives_in_the_nilpotent_envelope() {
    let alg = torsion_square_algebra();
    let sq = square_quotient(&alg).unwrap();
    let two = BigInt::from(2);
    assert_eq!(sq.module(0), FgModule { ring: Ring::Integers, rank: 1, torsion: vec![two.clone()] });
    let env = EnvelopingOperad::new(&alg, TruncationBounds::default());
    let c = env.component(1).unwrap();
    assert!(c.is_stabilized());
    assert_eq!(c.complex().module(0), FgModule { ring: Ring::Integers, rank: 3, torsion: vec![two.clone(), two] });
    assert_eq!(env.complex(2).unwrap().module(0), FgModule::free(Ring::Integers, 1));
    assert!(env.complex(3).unwrap().is_zero());
}

#[test]
fn closed_forms_agree_on_small_instances() {
    let cases: Vec<(ClosedFormKind, OAlgebra)> = vec![
        (ClosedFormKind::Uass, dual_numbers(Ring::Integers)),
        (ClosedFormKind::Initial, initial_algebra(builtin_a3zero(Ring::Integers))),
        (ClosedFormKind::A3zero, torsion_square_algebra()),
    ];
    for (kind, alg) in cases {
        let bounds = TruncationBounds::default().arity(3);
        let env = enveloping_operad(&alg, &bounds).unwrap();
        for (n, c) in closed_form(&kind, &alg, 3).unwrap() {
            assert_eq!(env.complex(n).invariants(), c.invariants(), "{} arity {n}", alg.name());
        }
    }
}

#[test]
fn relations_descend_to_compositions() {
    let env = EnvelopingOperad::new(&dual_numbers(Ring::Rationals), TruncationBounds::default().arity(3));
    for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        for i in 1..=p {
            env.check_composition_descent(p, q, i, 64).unwrap();
            let comp = env.composition(p, q, i).unwrap();
            common::check_chain_map(&comp).unwrap();
        }
    }
}
