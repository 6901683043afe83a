mod common;

use proptest::prelude::*;

use common::catalan;
use opalg::tree::{decode, enumerate_trees, LeafKind, PlanarTree, TreeSpec};

/// Planar trees with `n` leaves and every vertex of arity at least 2 (small Schröder numbers).
fn schroeder(n: usize) -> usize {
    let mut s = vec![0usize, 1, 1];
    for k in 3..=n {
        s.push(((6 * k - 9) * s[k - 1] - (k - 3) * s[k - 2]) / k);
    }
    s[n]
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn binary_trees_are_counted_by_catalan() {
    for n in 1..=7 {
        let trees = enumerate_trees(&TreeSpec::new(n).arities(vec![2])).unwrap();
        assert_eq!(trees.len(), catalan(n - 1), "{n} leaves");
        assert!(trees.iter().all(|t| t.num_vertices() == n - 1));
    }
}

#[test]
fn reduced_planar_trees_are_counted_by_schroeder() {
    for n in 1..=6 {
        let trees = enumerate_trees(&TreeSpec::new(n).arities((2..=n.max(2)).collect())).unwrap();
        assert_eq!(trees.len(), schroeder(n), "{n} leaves");
    }
}

#[test]
fn straight_leaves_are_placed_anywhere() {
    // at most s straight leaves among n + k leaves
    for (n, s) in [(1, 2), (2, 2), (3, 1)] {
        let trees = enumerate_trees(&TreeSpec::new(n).straight(s).arities(vec![2])).unwrap();
        let expected: usize = (0..=s).map(|k| catalan(n + k - 1) * binom(n + k, k)).sum();
        assert_eq!(trees.len(), expected, "n = {n}, s = {s}");
    }
}

#[test]
fn unary_vertices_need_a_bound() {
    assert!(enumerate_trees(&TreeSpec::new(2)).is_err());
    let trees = enumerate_trees(&TreeSpec::new(1).vertices(0, 3).arities(vec![1])).unwrap();
    assert_eq!(trees.len(), 4);
}

#[test]
fn codes_name_leaves_and_corks() {
    let t = decode("(~(|())^)").unwrap();
    assert_eq!(t.arity(), 3);
    assert_eq!(t.num_vertices(), 3);
    assert_eq!(t.count_leaves(LeafKind::Bumpy), 1);
    assert_eq!(t.code(), "(~(|())^)");
    for bad in ["", "(", "(~", "~)", "(x)", "(~)(~)"] {
        assert!(decode(bad).is_err(), "{bad:?}");
    }
}

fn any_tree() -> impl Strategy<Value = PlanarTree> {
    let leaf = prop_oneof![Just(PlanarTree::snaky()), Just(PlanarTree::straight()), Just(PlanarTree::leaf(LeafKind::Bumpy))];
    leaf.prop_recursive(4, 24, 4, |inner| prop::collection::vec(inner, 0..4).prop_map(PlanarTree::Vertex))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn codes_round_trip(t in any_tree()) {
        prop_assert_eq!(decode(&t.code()).unwrap(), t);
    }

    #[test]
    fn grafting_replaces_one_leaf(t in any_tree(), u in any_tree(), i in 0usize..8) {
        prop_assume!(t.num_leaves() > 0);
        let i = 1 + i % t.num_leaves();
        let g = t.graft(i, &u).unwrap();
        prop_assert_eq!(g.num_leaves(), t.num_leaves() - 1 + u.num_leaves());
        prop_assert_eq!(g.num_vertices(), t.num_vertices() + u.num_vertices());
        prop_assert!(t.graft(t.num_leaves() + 1, &u).is_err());
    }

    #[test]
    fn contraction_undoes_subdivision(t in any_tree()) {
        for e in t.edges() {
            if e.is_empty() {
                continue;
            }
            let s = t.subdivide_edge(&e).unwrap();
            prop_assert_eq!(s.num_vertices(), t.num_vertices() + 1);
            prop_assert_eq!(s.contract_inner_edge(&e).unwrap(), t.clone());
        }
    }

    #[test]
    fn contracting_inner_edges_drops_one_vertex(t in any_tree()) {
        for e in t.inner_edges() {
            let c = t.contract_inner_edge(&e).unwrap();
            prop_assert_eq!(c.num_vertices() + 1, t.num_vertices());
            prop_assert_eq!(c.leaves(), t.leaves());
        }
    }
}
